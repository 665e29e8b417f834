#pragma once

#include <cstddef>
#include <vector>

#include "ot/error.hpp"
#include "ot/matrix.hpp"

namespace ot {

// Tolerance for "entries sum to 1" on user-supplied histograms. Solver
// outputs are held to the looser kFeasibilityTol instead, since iterative
// methods accumulate round-off the inputs never see.
inline constexpr double kNormalizationTol = 1e-12;
inline constexpr double kFeasibilityTol = 1e-8;

// Probability vector. Entries are nonnegative and sum to 1 within
// kNormalizationTol. Restricted-support histograms (after marginal
// truncation) are ordinary Histograms over the retained indices.
class Histogram {
 public:
  Histogram() = default;
  explicit Histogram(std::vector<double> values);

  static Histogram uniform(std::size_t n);

  const std::vector<double>& values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::size_t size() const { return values_.size(); }
  // Number of strictly positive entries.
  std::size_t support_size() const { return support_size_; }
  double min_entry() const;
  bool has_zero_entry() const { return support_size_ != values_.size(); }

 private:
  std::vector<double> values_;
  std::size_t support_size_ = 0;
};

// Nonnegative cost matrix with its maximum entry cached.
class CostMatrix {
 public:
  CostMatrix() = default;
  explicit CostMatrix(Matrix entries);

  const Matrix& entries() const { return entries_; }
  double operator()(std::size_t i, std::size_t j) const {
    return entries_(i, j);
  }
  std::size_t rows() const { return entries_.rows(); }
  std::size_t cols() const { return entries_.cols(); }
  double max_entry() const { return max_entry_; }

 private:
  Matrix entries_;
  double max_entry_ = 0.0;
};

// A validated transport problem: cost plus row/column marginals of
// matching dimensions. Zero marginal entries are legal (the scaling
// pipeline removes them by truncation) but recorded, because the packing
// pipeline and the scaling oracle both require strictly positive targets.
struct TransportInstance {
  CostMatrix cost;
  Histogram row_marginal;
  Histogram col_marginal;
  bool has_zero_marginal = false;

  std::size_t rows() const { return cost.rows(); }
  std::size_t cols() const { return cost.cols(); }
};

// Candidate transport plan. Not necessarily feasible; feasibility is a
// question answered by marginal_residuals.
struct Coupling {
  Matrix plan;
  double total_mass = 0.0;

  Coupling() = default;
  explicit Coupling(Matrix m) : plan(std::move(m)), total_mass(plan.sum()) {}

  std::size_t rows() const { return plan.rows(); }
  std::size_t cols() const { return plan.cols(); }
};

// e_r = r - X1 and e_c = c - X^T 1, with their combined l1 norm.
// Signs are preserved; entries are negative where X overshoots.
struct MarginalResiduals {
  std::vector<double> row_residual;
  std::vector<double> col_residual;
  double l1_total = 0.0;
};

TransportInstance validate_instance(CostMatrix cost, Histogram row_marginal,
                                    Histogram col_marginal);

// <C, X>, row-major accumulation.
double transport_cost(const CostMatrix& cost, const Coupling& x);

// H(X) = -sum_ij X_ij (log X_ij - 1), with 0 (log 0 - 1) = 0.
double entropy(const Coupling& x);

MarginalResiduals marginal_residuals(const Coupling& x, const Histogram& r,
                                     const Histogram& c);

// Product coupling r (x) c. Optimal whenever every plan has equal cost;
// the solvers short-circuit to it when the cost matrix is identically 0.
Coupling product_coupling(const Histogram& r, const Histogram& c);

}  // namespace ot
