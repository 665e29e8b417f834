#pragma once

#include <memory>
#include <utility>
#include <vector>

#include "ot/core.hpp"
#include "ot/report.hpp"

namespace ot {

// Packing LP derived from a transport instance:
//
//   max <B, X>  subject to  X1 <= r, X^T 1 <= c, X >= 0
//
// with B = |C|_max 11^T - C. The 2n x nm incidence matrix is never
// materialized: every variable (i, j) appears with coefficient 1 in row
// constraint i and column constraint j, so constraint loads are just the
// row and column sums of the plan.
struct PackingLP {
  Matrix objective;                   // B, entrywise >= 0
  std::vector<double> row_capacity;   // r
  std::vector<double> col_capacity;   // c
  double cost_shift = 0.0;            // |C|_max used to build B

  std::size_t rows() const { return objective.rows(); }
  std::size_t cols() const { return objective.cols(); }
  std::size_t num_constraints() const { return rows() + cols(); }
  std::size_t num_variables() const { return objective.size(); }
};

struct PackingSolution {
  Matrix x;              // nonnegative, Ax <= b within 1e-9
  double value = 0.0;    // d . x
  long iterations = 0;
  double epsilon_used = 0.0;
  // Best dual upper bound on V_* certified during the run; value >=
  // (1 - eps) * dual_bound implies the Definition-style guarantee without
  // reference to an external oracle.
  double dual_bound = 0.0;
  bool certified = false;
};

// Solver contract: feasible x with d.x >= (1 - eps) V_*.
class PackingOracle {
 public:
  virtual ~PackingOracle() = default;
  virtual PackingSolution solve(const PackingLP& lp, double eps) const = 0;
};

// Deterministic width-independent multiplicative-weights solver. Grows the
// coordinate with the smallest weighted load per unit objective (ties to
// the lowest index), with weights exponential in the normalized constraint
// loads, until a constraint saturates or a duality-gap certificate shows
// the (1 - eps) guarantee already holds.
class ReferencePackingSolver final : public PackingOracle {
 public:
  struct Options {
    // Iteration cap as a multiple of m log(m) / eps^2.
    double budget_factor = 8.0;
    // Steps between duality-gap evaluations.
    long certificate_interval = 256;
  };

  ReferencePackingSolver() = default;
  explicit ReferencePackingSolver(Options opts) : opts_(opts) {}

  PackingSolution solve(const PackingLP& lp, double eps) const override;

 private:
  Options opts_;
};

PackingLP build_packing_instance(const TransportInstance& inst);

// Reference-solver entry point.
PackingSolution solve_packing(const PackingLP& lp, double eps);

// Full pipeline: build the packing instance, solve it with
// eps' = eps / |C|_max, reshape, and complete to exact marginals.
std::pair<Coupling, SolveReport> solve_ot_via_packing(
    const TransportInstance& inst, double eps,
    const PackingOracle* oracle = nullptr);

}  // namespace ot
