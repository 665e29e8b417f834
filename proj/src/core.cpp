#include "ot/core.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace ot {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NegativeEntry: return "NegativeEntry";
    case ErrorCode::NonFiniteEntry: return "NonFiniteEntry";
    case ErrorCode::NotNormalized: return "NotNormalized";
    case ErrorCode::ZeroMarginalEntry: return "ZeroMarginalEntry";
    case ErrorCode::NotSubfeasible: return "NotSubfeasible";
    case ErrorCode::ZeroMass: return "ZeroMass";
    case ErrorCode::EmptySupport: return "EmptySupport";
    case ErrorCode::MarginalMismatch: return "MarginalMismatch";
    case ErrorCode::ZeroCostMatrix: return "ZeroCostMatrix";
    case ErrorCode::InvalidEpsilon: return "InvalidEpsilon";
    case ErrorCode::InvalidDimension: return "InvalidDimension";
    case ErrorCode::NotConverged: return "NotConverged";
    case ErrorCode::NotScalable: return "NotScalable";
    case ErrorCode::NotACoupling: return "NotACoupling";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::IoError: return "IoError";
  }
  return "UnknownError";
}

namespace {

void check_finite_nonneg(const std::vector<double>& v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) {
      throw Error(ErrorCode::NonFiniteEntry, std::string(what) +
                      " contains a non-finite entry");
    }
    if (x < 0.0) {
      throw Error(ErrorCode::NegativeEntry,
                  std::string(what) + " contains a negative entry");
    }
  }
}

}  // namespace

Histogram::Histogram(std::vector<double> values) : values_(std::move(values)) {
  check_finite_nonneg(values_, "histogram");
  for (double x : values_) {
    if (x > 0.0) ++support_size_;
  }
}

Histogram Histogram::uniform(std::size_t n) {
  return Histogram(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

double Histogram::min_entry() const {
  double m = std::numeric_limits<double>::infinity();
  for (double x : values_) m = std::min(m, x);
  return m;
}

CostMatrix::CostMatrix(Matrix entries) : entries_(std::move(entries)) {
  check_finite_nonneg(entries_.data(), "cost matrix");
  max_entry_ = entries_.max_entry();
}

TransportInstance validate_instance(CostMatrix cost, Histogram row_marginal,
                                    Histogram col_marginal) {
  if (cost.rows() == 0 || cost.cols() == 0) {
    throw Error(ErrorCode::DimensionMismatch, "cost matrix is empty");
  }
  if (cost.rows() != row_marginal.size() ||
      cost.cols() != col_marginal.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                "cost is " + std::to_string(cost.rows()) + "x" +
                    std::to_string(cost.cols()) + " but marginals have sizes " +
                    std::to_string(row_marginal.size()) + " and " +
                    std::to_string(col_marginal.size()));
  }
  for (const Histogram* h : {&row_marginal, &col_marginal}) {
    double s = 0.0;
    for (double x : h->values()) s += x;
    if (std::fabs(s - 1.0) > kNormalizationTol) {
      throw Error(ErrorCode::NotNormalized,
                  "marginal sums to " + std::to_string(s));
    }
  }
  TransportInstance inst;
  inst.has_zero_marginal =
      row_marginal.has_zero_entry() || col_marginal.has_zero_entry();
  inst.cost = std::move(cost);
  inst.row_marginal = std::move(row_marginal);
  inst.col_marginal = std::move(col_marginal);
  return inst;
}

double transport_cost(const CostMatrix& cost, const Coupling& x) {
  if (!cost.entries().same_shape(x.plan)) {
    throw Error(ErrorCode::DimensionMismatch,
                "cost and plan shapes differ in transport_cost");
  }
  double s = 0.0;
  const std::vector<double>& c = cost.entries().data();
  const std::vector<double>& p = x.plan.data();
  for (std::size_t k = 0; k < p.size(); ++k) s += c[k] * p[k];
  return s;
}

double entropy(const Coupling& x) {
  double h = 0.0;
  for (double v : x.plan.data()) {
    if (v > 0.0) h -= v * (std::log(v) - 1.0);
  }
  return h;
}

MarginalResiduals marginal_residuals(const Coupling& x, const Histogram& r,
                                     const Histogram& c) {
  if (x.rows() != r.size() || x.cols() != c.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                "plan shape does not match marginals");
  }
  MarginalResiduals res;
  std::vector<double> rs = x.plan.row_sums();
  std::vector<double> cs = x.plan.col_sums();
  res.row_residual.resize(r.size());
  res.col_residual.resize(c.size());
  for (std::size_t i = 0; i < r.size(); ++i) res.row_residual[i] = r[i] - rs[i];
  for (std::size_t j = 0; j < c.size(); ++j) res.col_residual[j] = c[j] - cs[j];
  res.l1_total = l1_norm(res.row_residual) + l1_norm(res.col_residual);
  return res;
}

Coupling product_coupling(const Histogram& r, const Histogram& c) {
  Matrix m(r.size(), c.size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    for (std::size_t j = 0; j < c.size(); ++j) m(i, j) = r[i] * c[j];
  }
  return Coupling(std::move(m));
}

}  // namespace ot
