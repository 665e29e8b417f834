#include "ot/rounding.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ot {

bool TruncationMap::is_identity() const {
  return mass_factor == 1.0 &&
         row_support.size() == truncated_row.size() &&
         col_support.size() == truncated_col.size() &&
         row_support.size() > 0 &&
         row_support.back() == row_support.size() - 1 &&
         col_support.back() == col_support.size() - 1;
}

CostMatrix TruncationMap::restrict_cost(const CostMatrix& cost) const {
  Matrix sub(row_support.size(), col_support.size());
  for (std::size_t a = 0; a < row_support.size(); ++a) {
    for (std::size_t b = 0; b < col_support.size(); ++b) {
      sub(a, b) = cost(row_support[a], col_support[b]);
    }
  }
  return CostMatrix(std::move(sub));
}

Coupling complete_subfeasible(const Coupling& x, const Histogram& r,
                              const Histogram& c) {
  if (x.rows() != r.size() || x.cols() != c.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                "plan shape does not match marginals");
  }
  std::vector<double> e_r = x.plan.row_sums();
  std::vector<double> e_c = x.plan.col_sums();
  for (std::size_t i = 0; i < e_r.size(); ++i) {
    double d = r[i] - e_r[i];
    if (d < -kSubfeasibleTol) {
      throw Error(ErrorCode::NotSubfeasible,
                  "row sum " + std::to_string(i) + " exceeds marginal by " +
                      std::to_string(-d));
    }
    e_r[i] = std::max(d, 0.0);
  }
  for (std::size_t j = 0; j < e_c.size(); ++j) {
    double d = c[j] - e_c[j];
    if (d < -kSubfeasibleTol) {
      throw Error(ErrorCode::NotSubfeasible,
                  "column sum " + std::to_string(j) + " exceeds marginal by " +
                      std::to_string(-d));
    }
    e_c[j] = std::max(d, 0.0);
  }
  double norm_c = l1_norm(e_c);
  Matrix y = x.plan;
  if (norm_c > 0.0) {
    for (std::size_t i = 0; i < y.rows(); ++i) {
      double scale = e_r[i] / norm_c;
      double* row = y.row(i);
      for (std::size_t j = 0; j < y.cols(); ++j) row[j] += scale * e_c[j];
    }
  }
  return Coupling(std::move(y));
}

Coupling round_to_polytope(const Coupling& b, const Histogram& r,
                           const Histogram& c, const CostMatrix& cost) {
  if (b.rows() != r.size() || b.cols() != c.size() ||
      !cost.entries().same_shape(b.plan)) {
    throw Error(ErrorCode::DimensionMismatch,
                "plan, marginals and cost shapes disagree");
  }
  if (b.total_mass <= 0.0) {
    throw Error(ErrorCode::ZeroMass, "cannot round an all-zero plan");
  }
  Matrix m = b.plan;
  // Rows first, then columns; the completed result does not depend on the
  // order but intermediate values do.
  std::vector<double> rs = m.row_sums();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    if (rs[i] > r[i]) {
      double scale = r[i] / rs[i];
      double* row = m.row(i);
      for (std::size_t j = 0; j < m.cols(); ++j) row[j] *= scale;
    }
  }
  std::vector<double> cs = m.col_sums();
  std::vector<double> col_scale(m.cols(), 1.0);
  bool any = false;
  for (std::size_t j = 0; j < m.cols(); ++j) {
    if (cs[j] > c[j]) {
      col_scale[j] = c[j] / cs[j];
      any = true;
    }
  }
  if (any) {
    for (std::size_t i = 0; i < m.rows(); ++i) {
      double* row = m.row(i);
      for (std::size_t j = 0; j < m.cols(); ++j) row[j] *= col_scale[j];
    }
  }
  return complete_subfeasible(Coupling(std::move(m)), r, c);
}

namespace {

// Support of entries >= threshold (ties kept), plus their total mass.
std::pair<std::vector<std::size_t>, double> select_support(
    const Histogram& h, double threshold) {
  std::vector<std::size_t> support;
  double mass = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (h[i] >= threshold) {
      support.push_back(i);
      mass += h[i];
    }
  }
  return {std::move(support), mass};
}

}  // namespace

TruncationMap truncate_marginals(const Histogram& r, const Histogram& c,
                                 double eps, double c_max) {
  if (eps <= 0.0) {
    throw Error(ErrorCode::InvalidEpsilon, "eps must be positive");
  }
  if (c_max <= 0.0) {
    throw Error(ErrorCode::ZeroCostMatrix,
                "truncation threshold needs |C|_max > 0");
  }
  TruncationMap map;
  map.row_threshold = eps / (2.0 * c_max * static_cast<double>(r.size()));
  map.col_threshold = eps / (2.0 * c_max * static_cast<double>(c.size()));
  auto [row_support, row_mass] = select_support(r, map.row_threshold);
  auto [col_support, col_mass] = select_support(c, map.col_threshold);
  if (row_support.empty() || col_support.empty()) {
    throw Error(ErrorCode::EmptySupport,
                "truncation removed all marginal mass; eps exceeds 2|C|_max");
  }
  map.mass_factor = row_mass * col_mass;
  std::vector<double> tr(row_support.size());
  for (std::size_t a = 0; a < row_support.size(); ++a) {
    tr[a] = r[row_support[a]] / row_mass;
  }
  std::vector<double> tc(col_support.size());
  for (std::size_t b = 0; b < col_support.size(); ++b) {
    tc[b] = c[col_support[b]] / col_mass;
  }
  // Exact identity when nothing was removed: keep mass_factor at 1 and the
  // marginals untouched so downstream sees bit-identical values.
  if (row_support.size() == r.size() && col_support.size() == c.size()) {
    map.mass_factor = 1.0;
    map.truncated_row = r;
    map.truncated_col = c;
  } else {
    map.truncated_row = Histogram(std::move(tr));
    map.truncated_col = Histogram(std::move(tc));
  }
  map.row_support = std::move(row_support);
  map.col_support = std::move(col_support);
  return map;
}

Coupling extend_coupling(const Coupling& truncated_plan,
                         const TruncationMap& map, const Histogram& r,
                         const Histogram& c) {
  if (truncated_plan.rows() != map.row_support.size() ||
      truncated_plan.cols() != map.col_support.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                "plan shape does not match the truncation supports");
  }
  MarginalResiduals res = marginal_residuals(
      truncated_plan, map.truncated_row, map.truncated_col);
  if (res.l1_total > 1e-9) {
    throw Error(ErrorCode::MarginalMismatch,
                "plan is not feasible for the truncated marginals (residual " +
                    std::to_string(res.l1_total) + ")");
  }
  Matrix out(r.size(), c.size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    for (std::size_t j = 0; j < c.size(); ++j) out(i, j) = r[i] * c[j];
  }
  const double mu = map.mass_factor;
  for (std::size_t a = 0; a < map.row_support.size(); ++a) {
    for (std::size_t b = 0; b < map.col_support.size(); ++b) {
      out(map.row_support[a], map.col_support[b]) =
          mu * truncated_plan.plan(a, b);
    }
  }
  return Coupling(std::move(out));
}

}  // namespace ot
