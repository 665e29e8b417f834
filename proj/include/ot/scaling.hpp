#pragma once

#include <utility>
#include <vector>

#include "ot/core.hpp"
#include "ot/report.hpp"

namespace ot {

// Matrix scaling problem in log domain: find diagonal scalings (stored as
// log-domain potentials x, y) so that exp(log_entries + x 1^T + 1 y^T) has
// row sums row_target and column sums col_target. Entries of the Gibbs
// kernel exp(-C/eta) shrink like n^(-8|C|/eps), so the matrix itself is
// never materialized without its potentials.
struct ScalingProblem {
  Matrix log_entries;    // log A, entries <= 0 (|A|_max <= 1)
  Histogram row_target;  // r, max entry <= 1
  Histogram col_target;  // c, max entry <= 1; sum r = sum c within 1e-12
  double log_entry_floor = 0.0;  // log(nu) = -min_ij log A_ij
  double target_floor = 1.0;     // xi = 1 / min over r and c entries
  double log_mass = 0.0;         // log sum_ij A_ij

  std::size_t rows() const { return log_entries.rows(); }
  std::size_t cols() const { return log_entries.cols(); }
};

// Dual variables of the scaling objective; exp(x), exp(y) are the
// diagonal scaling factors.
struct Potentials {
  std::vector<double> x;
  std::vector<double> y;
};

struct ScalingResult {
  Potentials potentials;
  MarginalResiduals residuals;  // of the scaled matrix vs the targets
  long half_iterations = 0;
  bool converged = false;
  double best_residual = 0.0;
  // Dual objective value after each half-iteration, recorded when
  // requested; non-increasing for exact alternating minimization.
  std::vector<double> dual_trace;
};

struct SinkhornOptions {
  long max_half_iterations = 100000;
  bool track_dual_trace = false;
  Potentials initial;  // empty means start from zero potentials
};

// Definition-style oracle contract: potentials whose scaled matrix has
// combined l1 marginal residual at most eps1.
class ScalingOracle {
 public:
  virtual ~ScalingOracle() = default;
  virtual ScalingResult scale(const ScalingProblem& problem, double eps1,
                              const SinkhornOptions& opts) const = 0;
};

// Log-domain Sinkhorn (alternating exact row/column residual elimination
// through log-sum-exp). The stopping rule is checked after every
// half-iteration. Reference oracle; a Newton-type oracle can be plugged in
// through the same interface.
class SinkhornOracle final : public ScalingOracle {
 public:
  ScalingResult scale(const ScalingProblem& problem, double eps1,
                      const SinkhornOptions& opts) const override;
};

ScalingProblem make_scaling_problem(Matrix log_entries, Histogram row_target,
                                    Histogram col_target);

// eta = eps / (4 log n); with it, 2 eta log n = eps / 2.
double regularization_parameter(double eps, std::size_t n);

// Scaling problem with kernel log-entries -C/eta and the given targets.
ScalingProblem gibbs_kernel_log(const CostMatrix& cost, double eta,
                                const Histogram& row_target,
                                const Histogram& col_target);

// Throws NotConvergedError when the iteration cap is reached; the error
// carries the best residual seen.
std::pair<Potentials, MarginalResiduals> sinkhorn_scale(
    const ScalingProblem& problem, double eps1, long max_half_iterations);

// psi(x, y) = 1^T M 1 - r^T x - c^T y for M = exp(log A + x + y).
double dual_objective(const ScalingProblem& problem, const Potentials& z);

// delta = eps^2 / (2n): a squared-l2 residual below delta implies an l1
// residual below eps.
double l2_to_l1_tolerance(double eps, std::size_t n);

// Bound 2 log(n nu xi) on the sup norm of some optimal potential vector,
// after normalizing min x = 0.
double potential_radius(std::size_t n, double nu, double xi);
double potential_radius_log(std::size_t n, double log_nu, double log_xi);

// The scaled matrix exp(log A + x + y), materialized.
Matrix scaled_matrix(const ScalingProblem& problem, const Potentials& z);

struct ScalingPipelineOptions {
  // Half-iteration cap; <= 0 picks ceil(50 (log n + |C|/eps)^2).
  long max_half_iterations = 0;
  // Half-iterations between early-exit certificate checks on the default
  // Sinkhorn path.
  long certificate_interval = 8;
};

// Full pipeline: truncate marginals (eps/2 budget), build the Gibbs kernel
// with eta = (eps/2) / (4 log n), scale to l1 residual (eps/2) / (8 |C|),
// round to the polytope, extend back to the original marginals.
std::pair<Coupling, SolveReport> solve_ot_via_scaling(
    const TransportInstance& inst, double eps,
    const ScalingOracle* oracle = nullptr,
    const ScalingPipelineOptions& opts = {});

}  // namespace ot
