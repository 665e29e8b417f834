#pragma once

#include <vector>

#include "ot/core.hpp"

namespace ot {

// Subfeasibility slack: row/column sums may exceed their marginals by this
// much and still be clamped to equality, since iterative solvers return
// boundary-tight iterates with round-off.
inline constexpr double kSubfeasibleTol = 1e-10;

// Result of removing marginal entries below eps / (2 * c_max * dim) and
// renormalizing. mass_factor is the product of the retained masses of the
// two sides; the extension step scales the truncated plan by it.
struct TruncationMap {
  std::vector<std::size_t> row_support;
  std::vector<std::size_t> col_support;
  double mass_factor = 1.0;
  Histogram truncated_row;
  Histogram truncated_col;
  double row_threshold = 0.0;
  double col_threshold = 0.0;

  bool is_identity() const;
  // Cost matrix restricted to row_support x col_support.
  CostMatrix restrict_cost(const CostMatrix& cost) const;
};

// Rank-one completion: given X with X1 <= r and X^T 1 <= c, returns
// Y = X + e_r e_c^T / |e_c|_1 which has marginals exactly r and c.
// Y >= X entrywise, so objective values can only improve for maximization
// against a nonnegative matrix.
Coupling complete_subfeasible(const Coupling& x, const Histogram& r,
                              const Histogram& c);

// Projection of a near-feasible nonnegative matrix onto U(r, c): scale
// each row down to its marginal, then each column, then complete the
// remaining deficit with the rank-one construction. The cost increase is
// at most 2 |C|_max times the initial l1 marginal residual.
Coupling round_to_polytope(const Coupling& b, const Histogram& r,
                           const Histogram& c, const CostMatrix& cost);

// eps is clamped to c_max by callers; with that clamp both supports are
// guaranteed nonempty.
TruncationMap truncate_marginals(const Histogram& r, const Histogram& c,
                                 double eps, double c_max);

// Inverse of truncation: scale the truncated plan by mass_factor on the
// retained block and fill everything else with the product coupling, which
// restores the original marginals exactly.
Coupling extend_coupling(const Coupling& truncated_plan,
                         const TruncationMap& map, const Histogram& r,
                         const Histogram& c);

}  // namespace ot
