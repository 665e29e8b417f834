#include "ot/scaling.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <string>

#include "ot/rounding.hpp"

namespace ot {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_sum_exp(const double* values, std::size_t count) {
  double mx = kNegInf;
  for (std::size_t k = 0; k < count; ++k) mx = std::max(mx, values[k]);
  if (mx == kNegInf) return kNegInf;
  double s = 0.0;
  for (std::size_t k = 0; k < count; ++k) s += std::exp(values[k] - mx);
  return mx + std::log(s);
}

}  // namespace

ScalingProblem make_scaling_problem(Matrix log_entries, Histogram row_target,
                                    Histogram col_target) {
  if (log_entries.rows() != row_target.size() ||
      log_entries.cols() != col_target.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                "log matrix shape does not match targets");
  }
  double max_log = kNegInf, min_log = std::numeric_limits<double>::infinity();
  for (double v : log_entries.data()) {
    if (std::isnan(v)) {
      throw Error(ErrorCode::NonFiniteEntry, "log entry is NaN");
    }
    max_log = std::max(max_log, v);
    min_log = std::min(min_log, v);
  }
  if (max_log > 1e-12) {
    throw Error(ErrorCode::NotNormalized, "|A|_max exceeds 1");
  }
  double r_sum = 0.0, c_sum = 0.0;
  for (double v : row_target.values()) r_sum += v;
  for (double v : col_target.values()) c_sum += v;
  if (std::fabs(r_sum - c_sum) > 1e-12) {
    throw Error(ErrorCode::NotNormalized,
                "row and column targets have different total mass");
  }
  ScalingProblem p;
  p.log_mass = log_sum_exp(log_entries.data().data(), log_entries.size());
  p.log_entry_floor = -min_log;
  double min_target = std::min(row_target.min_entry(), col_target.min_entry());
  p.target_floor = min_target > 0.0
                       ? 1.0 / min_target
                       : std::numeric_limits<double>::infinity();
  p.log_entries = std::move(log_entries);
  p.row_target = std::move(row_target);
  p.col_target = std::move(col_target);
  return p;
}

double regularization_parameter(double eps, std::size_t n) {
  if (!(eps > 0.0)) {
    throw Error(ErrorCode::InvalidEpsilon, "eps must be positive");
  }
  if (n < 2) {
    throw Error(ErrorCode::InvalidDimension,
                "regularization needs n >= 2 (log n would vanish)");
  }
  return eps / (4.0 * std::log(static_cast<double>(n)));
}

ScalingProblem gibbs_kernel_log(const CostMatrix& cost, double eta,
                                const Histogram& row_target,
                                const Histogram& col_target) {
  if (!(eta > 0.0)) {
    throw Error(ErrorCode::InvalidEpsilon,
                "regularization parameter must be positive");
  }
  Matrix log_entries(cost.rows(), cost.cols());
  for (std::size_t k = 0; k < log_entries.size(); ++k) {
    log_entries.data()[k] = -cost.entries().data()[k] / eta;
  }
  return make_scaling_problem(std::move(log_entries), row_target, col_target);
}

double l2_to_l1_tolerance(double eps, std::size_t n) {
  if (!(eps > 0.0)) {
    throw Error(ErrorCode::InvalidEpsilon, "eps must be positive");
  }
  if (n < 1) {
    throw Error(ErrorCode::InvalidDimension, "n must be at least 1");
  }
  return eps * eps / (2.0 * static_cast<double>(n));
}

double potential_radius(std::size_t n, double nu, double xi) {
  if (n < 1 || nu < 1.0 || xi < 1.0) {
    throw Error(ErrorCode::InvalidDimension,
                "potential radius needs n >= 1, nu >= 1, xi >= 1");
  }
  return 2.0 * std::log(static_cast<double>(n) * nu * xi);
}

double potential_radius_log(std::size_t n, double log_nu, double log_xi) {
  if (n < 1 || log_nu < 0.0 || log_xi < 0.0) {
    throw Error(ErrorCode::InvalidDimension,
                "potential radius needs n >= 1, log nu >= 0, log xi >= 0");
  }
  return 2.0 * (std::log(static_cast<double>(n)) + log_nu + log_xi);
}

Matrix scaled_matrix(const ScalingProblem& problem, const Potentials& z) {
  Matrix m(problem.rows(), problem.cols());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const double* la = problem.log_entries.row(i);
    double* out = m.row(i);
    for (std::size_t j = 0; j < m.cols(); ++j) {
      out[j] = std::exp(la[j] + z.x[i] + z.y[j]);
    }
  }
  return m;
}

double dual_objective(const ScalingProblem& problem, const Potentials& z) {
  if (z.x.size() != problem.rows() || z.y.size() != problem.cols()) {
    throw Error(ErrorCode::DimensionMismatch,
                "potential lengths do not match the problem");
  }
  const std::size_t n = problem.rows(), m = problem.cols();
  std::vector<double> buf(m);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double* la = problem.log_entries.row(i);
    for (std::size_t j = 0; j < m; ++j) buf[j] = la[j] + z.y[j];
    double lse = log_sum_exp(buf.data(), m);
    if (lse > kNegInf) total += std::exp(z.x[i] + lse);
  }
  double linear = 0.0;
  for (std::size_t i = 0; i < n; ++i) linear += problem.row_target[i] * z.x[i];
  for (std::size_t j = 0; j < m; ++j) linear += problem.col_target[j] * z.y[j];
  return total - linear;
}

namespace {

// One residual sweep: materializes M = exp(log A + x + y) row by row and
// accumulates row and column sums. Returns the l1 residual.
double residual_sweep(const ScalingProblem& p, const Potentials& z,
                      std::vector<double>& row_sums,
                      std::vector<double>& col_sums, double& mass) {
  const std::size_t n = p.rows(), m = p.cols();
  row_sums.assign(n, 0.0);
  col_sums.assign(m, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double* la = p.log_entries.row(i);
    const double xi = z.x[i];
    double rs = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      double v = std::exp(la[j] + xi + z.y[j]);
      rs += v;
      col_sums[j] += v;
    }
    row_sums[i] = rs;
  }
  mass = 0.0;
  double resid = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mass += row_sums[i];
    resid += std::fabs(row_sums[i] - p.row_target[i]);
  }
  for (std::size_t j = 0; j < m; ++j) {
    resid += std::fabs(col_sums[j] - p.col_target[j]);
  }
  return resid;
}

}  // namespace

ScalingResult SinkhornOracle::scale(const ScalingProblem& p, double eps1,
                                    const SinkhornOptions& opts) const {
  if (!(eps1 > 0.0)) {
    throw Error(ErrorCode::InvalidEpsilon, "residual target must be positive");
  }
  const std::size_t n = p.rows(), m = p.cols();
  if (p.row_target.min_entry() <= 0.0 || p.col_target.min_entry() <= 0.0) {
    throw Error(ErrorCode::NotScalable,
                "scaling targets must be strictly positive");
  }
  ScalingResult result;
  result.potentials.x.assign(n, 0.0);
  result.potentials.y.assign(m, 0.0);
  if (!opts.initial.x.empty()) {
    if (opts.initial.x.size() != n || opts.initial.y.size() != m) {
      throw Error(ErrorCode::DimensionMismatch, "bad initial potentials");
    }
    result.potentials = opts.initial;
  }
  std::vector<double>& x = result.potentials.x;
  std::vector<double>& y = result.potentials.y;
  std::vector<double> buf(std::max(n, m));
  std::vector<double> row_sums, col_sums;
  double mass = 0.0;

  auto record = [&](double resid) {
    if (opts.track_dual_trace) {
      double linear = 0.0;
      for (std::size_t i = 0; i < n; ++i) linear += p.row_target[i] * x[i];
      for (std::size_t j = 0; j < m; ++j) linear += p.col_target[j] * y[j];
      result.dual_trace.push_back(mass - linear);
    }
    return resid <= eps1;
  };

  // Residual may already be met by the warm start.
  double resid = residual_sweep(p, result.potentials, row_sums, col_sums, mass);
  double best_resid = resid;
  if (resid <= eps1) {
    result.converged = true;
  }
  while (!result.converged &&
         result.half_iterations < opts.max_half_iterations) {
    const bool row_turn = (result.half_iterations % 2) == 0;
    if (row_turn) {
      for (std::size_t i = 0; i < n; ++i) {
        const double* la = p.log_entries.row(i);
        for (std::size_t j = 0; j < m; ++j) buf[j] = la[j] + y[j];
        double lse = log_sum_exp(buf.data(), m);
        if (lse == kNegInf) {
          throw Error(ErrorCode::NotScalable,
                      "row " + std::to_string(i) + " of A is identically zero");
        }
        x[i] = std::log(p.row_target[i]) - lse;
      }
    } else {
      for (std::size_t j = 0; j < m; ++j) {
        for (std::size_t i = 0; i < n; ++i) {
          buf[i] = p.log_entries(i, j) + x[i];
        }
        double lse = log_sum_exp(buf.data(), n);
        if (lse == kNegInf) {
          throw Error(ErrorCode::NotScalable,
                      "column " + std::to_string(j) +
                          " of A is identically zero");
        }
        y[j] = std::log(p.col_target[j]) - lse;
      }
    }
    ++result.half_iterations;
    resid = residual_sweep(p, result.potentials, row_sums, col_sums, mass);
    best_resid = std::min(best_resid, resid);
    result.converged = record(resid);
  }
  result.residuals.row_residual.resize(n);
  result.residuals.col_residual.resize(m);
  for (std::size_t i = 0; i < n; ++i) {
    result.residuals.row_residual[i] = p.row_target[i] - row_sums[i];
  }
  for (std::size_t j = 0; j < m; ++j) {
    result.residuals.col_residual[j] = p.col_target[j] - col_sums[j];
  }
  result.residuals.l1_total = resid;
  result.best_residual = best_resid;
  return result;
}

std::pair<Potentials, MarginalResiduals> sinkhorn_scale(
    const ScalingProblem& problem, double eps1, long max_half_iterations) {
  SinkhornOptions opts;
  opts.max_half_iterations = max_half_iterations;
  ScalingResult result = SinkhornOracle().scale(problem, eps1, opts);
  if (!result.converged) {
    throw NotConvergedError(
        "Sinkhorn did not reach residual " + std::to_string(eps1) + " in " +
            std::to_string(max_half_iterations) + " half-iterations",
        result.best_residual, result.half_iterations);
  }
  return {std::move(result.potentials), std::move(result.residuals)};
}

namespace {

// Feasible dual candidate for the (truncated) transport LP built from the
// current potentials: u_i = eta (x_i - max(0, max_j log M_ij)), v = eta y.
// Weak duality then bounds OPT from below, so cost(rounded) - dual is a
// certified optimality gap.
double dual_lp_value(const ScalingProblem& p, const Potentials& z,
                     double eta) {
  const std::size_t n = p.rows(), m = p.cols();
  double value = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double* la = p.log_entries.row(i);
    double s = kNegInf;
    for (std::size_t j = 0; j < m; ++j) {
      s = std::max(s, la[j] + z.x[i] + z.y[j]);
    }
    value += p.row_target[i] * eta * (z.x[i] - std::max(s, 0.0));
  }
  for (std::size_t j = 0; j < m; ++j) {
    value += p.col_target[j] * eta * z.y[j];
  }
  return value;
}

}  // namespace

std::pair<Coupling, SolveReport> solve_ot_via_scaling(
    const TransportInstance& inst, double eps, const ScalingOracle* oracle,
    const ScalingPipelineOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  if (!(eps > 0.0)) {
    throw Error(ErrorCode::InvalidEpsilon, "eps must be positive");
  }
  SolveReport report;
  report.method = SolveMethod::scaling;
  report.epsilon = eps;
  auto finish = [&](Coupling plan, long iterations) {
    report.cost = transport_cost(inst.cost, plan);
    report.residual_l1 =
        marginal_residuals(plan, inst.row_marginal, inst.col_marginal).l1_total;
    report.iterations = iterations;
    report.wall_time_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                              std::chrono::steady_clock::now() - t0)
                              .count();
    return std::make_pair(std::move(plan), report);
  };

  const double c_max = inst.cost.max_entry();
  if (c_max <= 0.0 || eps >= c_max) {
    return finish(product_coupling(inst.row_marginal, inst.col_marginal), 0);
  }
  if (inst.rows() == 1 || inst.cols() == 1) {
    // The coupling is unique, hence optimal.
    return finish(product_coupling(inst.row_marginal, inst.col_marginal), 0);
  }
  const double eps_half = eps / 2.0;

  TruncationMap map =
      truncate_marginals(inst.row_marginal, inst.col_marginal, eps_half, c_max);
  CostMatrix sub_cost = map.restrict_cost(inst.cost);
  const Histogram& tr = map.truncated_row;
  const Histogram& tc = map.truncated_col;

  if (tr.size() == 1 || tc.size() == 1) {
    Coupling unique = product_coupling(tr, tc);
    return finish(extend_coupling(unique, map, inst.row_marginal,
                                  inst.col_marginal),
                  0);
  }

  const std::size_t n_eff = std::max(tr.size(), tc.size());
  const double eta = regularization_parameter(eps_half, n_eff);
  ScalingProblem problem = gibbs_kernel_log(sub_cost, eta, tr, tc);
  const double eps1 = eps_half / (8.0 * c_max);

  long cap = opts.max_half_iterations;
  if (cap <= 0) {
    double t = std::log(static_cast<double>(n_eff)) + c_max / eps;
    cap = static_cast<long>(std::ceil(50.0 * t * t));
  }

  SinkhornOptions sopts;
  sopts.max_half_iterations = cap;
  if (oracle) {
    ScalingResult result = oracle->scale(problem, eps1, sopts);
    if (!result.converged) {
      throw NotConvergedError("scaling oracle did not meet its residual",
                              result.residuals.l1_total,
                              result.half_iterations);
    }
    Coupling rounded = round_to_polytope(
        Coupling(scaled_matrix(problem, result.potentials)), tr, tc, sub_cost);
    return finish(extend_coupling(rounded, map, inst.row_marginal,
                                  inst.col_marginal),
                  result.half_iterations);
  }

  // Default path: Sinkhorn in chunks with a duality-gap early exit. Either
  // stopping rule yields a plan within eps_half of the truncated optimum.
  SinkhornOracle sinkhorn;
  long done = 0;
  double best_resid = std::numeric_limits<double>::infinity();
  while (true) {
    sopts.max_half_iterations =
        std::min(opts.certificate_interval, cap - done);
    ScalingResult result = sinkhorn.scale(problem, eps1, sopts);
    done += result.half_iterations;
    best_resid = std::min(best_resid, result.best_residual);
    Coupling rounded = round_to_polytope(
        Coupling(scaled_matrix(problem, result.potentials)), tr, tc, sub_cost);
    if (result.converged) {
      return finish(extend_coupling(rounded, map, inst.row_marginal,
                                    inst.col_marginal),
                    done);
    }
    double gap = transport_cost(sub_cost, rounded) -
                 dual_lp_value(problem, result.potentials, eta);
    if (gap <= eps_half) {
      return finish(extend_coupling(rounded, map, inst.row_marginal,
                                    inst.col_marginal),
                    done);
    }
    if (done >= cap) {
      throw NotConvergedError(
          "scaling pipeline hit its half-iteration cap " + std::to_string(cap),
          best_resid, done);
    }
    sopts.initial = std::move(result.potentials);
  }
}

}  // namespace ot
