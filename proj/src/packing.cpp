#include "ot/packing.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <queue>
#include <string>

#include "ot/rounding.hpp"

namespace ot {

PackingLP build_packing_instance(const TransportInstance& inst) {
  const double shift = inst.cost.max_entry();
  if (shift <= 0.0) {
    throw Error(ErrorCode::ZeroCostMatrix,
                "all-zero cost matrix; every coupling is optimal");
  }
  PackingLP lp;
  lp.cost_shift = shift;
  lp.objective = Matrix(inst.rows(), inst.cols());
  for (std::size_t k = 0; k < lp.objective.size(); ++k) {
    lp.objective.data()[k] = shift - inst.cost.entries().data()[k];
  }
  lp.row_capacity = inst.row_marginal.values();
  lp.col_capacity = inst.col_marginal.values();
  return lp;
}

namespace {

struct HeapEntry {
  double ratio;  // stale lower bound on the current weighted cost ratio
  std::size_t idx;
};

struct HeapCompare {
  bool operator()(const HeapEntry& a, const HeapEntry& b) const {
    if (a.ratio != b.ratio) return a.ratio > b.ratio;
    return a.idx > b.idx;  // ties go to the lowest index
  }
};

using RatioHeap =
    std::priority_queue<HeapEntry, std::vector<HeapEntry>, HeapCompare>;

// Width-independent MWU state for the implicitly-structured OT packing LP.
// Loads are constraint utilizations (Ax)_j / b_j; weights are
// exp(alpha * load - shift) with a shared shift so they stay representable
// for large alpha.
class MwuState {
 public:
  MwuState(const PackingLP& lp, double eps_step)
      : lp_(lp),
        n_(lp.rows()),
        m_(lp.cols()),
        band_(1.0 + eps_step),
        row_load_(n_, 0.0),
        col_load_(m_, 0.0),
        row_weight_(n_, 1.0),
        col_weight_(m_, 1.0),
        x_(n_, m_) {
    std::size_t active_constraints = 0;
    for (double b : lp.row_capacity) active_constraints += b > 0.0 ? 1 : 0;
    for (double b : lp.col_capacity) active_constraints += b > 0.0 ? 1 : 0;
    alpha_ = std::log(std::max<double>(active_constraints, 2)) / eps_step;
    rebuild_heap();
  }

  // Grows a coordinate whose ratio is within the (1 + eps) band of minimal.
  // Returns false when no coordinate can grow (empty heap) or a constraint
  // just saturated.
  bool step(double eps_step) {
    auto picked = pop_acceptable();
    if (!picked) return false;
    const std::size_t idx = *picked;
    const std::size_t i = idx / m_, j = idx % m_;
    const double bi = lp_.row_capacity[i], bj = lp_.col_capacity[j];
    const double max_norm = std::max(1.0 / bi, 1.0 / bj);
    const double step_delta = eps_step / (alpha_ * max_norm);
    const double cap_delta = std::min((1.0 - row_load_[i]) * bi,
                                      (1.0 - col_load_[j]) * bj);
    const double delta = std::min(step_delta, cap_delta);
    bool saturated = cap_delta <= step_delta;
    x_(i, j) += delta;
    value_ += delta * lp_.objective(i, j);
    if (saturated) {
      // Land exactly on the binding constraint.
      if ((1.0 - row_load_[i]) * bi <= (1.0 - col_load_[j]) * bj) {
        row_load_[i] = 1.0;
        col_load_[j] += delta / bj;
      } else {
        col_load_[j] = 1.0;
        row_load_[i] += delta / bi;
      }
    } else {
      row_load_[i] += delta / bi;
      col_load_[j] += delta / bj;
    }
    row_weight_[i] = shifted_weight(row_load_[i]);
    col_weight_[j] = shifted_weight(col_load_[j]);
    max_load_ = std::max({max_load_, row_load_[i], col_load_[j]});
    if (alpha_ * max_load_ - shift_ > 250.0) {
      rebuild_heap();
    } else {
      heap_.push({current_ratio(idx), idx});
    }
    return !saturated;
  }

  // Dual upper bound on V_* from the current weights: y = sigma * w / b is
  // feasible for the covering dual by the choice of sigma, so b^T y bounds
  // the packing value. The weight shift cancels between sigma and the sum.
  double dual_bound() const {
    double sigma = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      const double bi = lp_.row_capacity[i];
      if (bi <= 0.0) continue;
      const double wi = row_weight_[i] / bi;
      for (std::size_t j = 0; j < m_; ++j) {
        const double bj = lp_.col_capacity[j];
        const double d = lp_.objective(i, j);
        if (bj <= 0.0 || d <= 0.0) continue;
        sigma = std::max(sigma, d / (wi + col_weight_[j] / bj));
      }
    }
    double weight_sum = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      if (lp_.row_capacity[i] > 0.0) weight_sum += row_weight_[i];
    }
    for (std::size_t j = 0; j < m_; ++j) {
      if (lp_.col_capacity[j] > 0.0) weight_sum += col_weight_[j];
    }
    return sigma * weight_sum;
  }

  double value() const { return value_; }
  double max_load() const { return max_load_; }

  // Value of the iterate rescaled to touch the constraint boundary; the
  // rescaled plan x / max_load is feasible, so this is the value to hold
  // against the dual bound.
  double scaled_value() const {
    return max_load_ > 0.0 ? value_ / max_load_ : value_;
  }

  // The boundary-rescaled plan.
  Matrix take_plan() {
    if (max_load_ > 0.0 && max_load_ < 1.0) {
      double f = 1.0 / max_load_;
      for (double& v : x_.data()) v *= f;
    }
    return std::move(x_);
  }

 private:
  double shifted_weight(double load) const {
    return std::exp(alpha_ * load - shift_);
  }

  double current_ratio(std::size_t idx) const {
    const std::size_t i = idx / m_, j = idx % m_;
    return (row_weight_[i] / lp_.row_capacity[i] +
            col_weight_[j] / lp_.col_capacity[j]) /
           lp_.objective(i, j);
  }

  void rebuild_heap() {
    shift_ = alpha_ * max_load_;
    for (std::size_t i = 0; i < n_; ++i) {
      if (lp_.row_capacity[i] > 0.0) row_weight_[i] = shifted_weight(row_load_[i]);
    }
    for (std::size_t j = 0; j < m_; ++j) {
      if (lp_.col_capacity[j] > 0.0) col_weight_[j] = shifted_weight(col_load_[j]);
    }
    std::vector<HeapEntry> entries;
    entries.reserve(n_ * m_);
    for (std::size_t i = 0; i < n_; ++i) {
      if (lp_.row_capacity[i] <= 0.0) continue;
      for (std::size_t j = 0; j < m_; ++j) {
        if (lp_.col_capacity[j] <= 0.0) continue;
        const std::size_t idx = i * m_ + j;
        if (lp_.objective(i, j) <= 0.0) continue;
        entries.push_back({current_ratio(idx), idx});
      }
    }
    heap_ = RatioHeap(HeapCompare{}, std::move(entries));
  }

  // Lazy selection: stale ratios are lower bounds because weights only
  // grow, so a refreshed entry within the band of the next stale ratio is
  // within the band of the true minimum. Alternating refreshes terminate
  // because one of any two refreshed ratios is within the band of the
  // other.
  std::optional<std::size_t> pop_acceptable() {
    if (heap_.empty()) return std::nullopt;
    HeapEntry best = heap_.top();
    heap_.pop();
    best.ratio = current_ratio(best.idx);
    while (!heap_.empty() && best.ratio > band_ * heap_.top().ratio) {
      HeapEntry contender = heap_.top();
      heap_.pop();
      contender.ratio = current_ratio(contender.idx);
      if (contender.ratio < best.ratio ||
          (contender.ratio == best.ratio && contender.idx < best.idx)) {
        heap_.push(best);
        best = contender;
      } else {
        heap_.push(contender);
      }
    }
    return best.idx;
  }

  const PackingLP& lp_;
  std::size_t n_, m_;
  double band_;
  std::vector<double> row_load_, col_load_;
  std::vector<double> row_weight_, col_weight_;
  Matrix x_;
  double value_ = 0.0;
  double max_load_ = 0.0;
  double alpha_ = 1.0;
  double shift_ = 0.0;
  RatioHeap heap_;
};

// Pull the plan back inside Ax <= b if incremental load tracking drifted.
double enforce_feasibility(Matrix& x, const PackingLP& lp) {
  double scale = 1.0;
  std::vector<double> rs = x.row_sums();
  std::vector<double> cs = x.col_sums();
  for (std::size_t i = 0; i < rs.size(); ++i) {
    if (rs[i] > lp.row_capacity[i] && rs[i] > 0.0) {
      scale = std::min(scale, lp.row_capacity[i] / rs[i]);
    }
  }
  for (std::size_t j = 0; j < cs.size(); ++j) {
    if (cs[j] > lp.col_capacity[j] && cs[j] > 0.0) {
      scale = std::min(scale, lp.col_capacity[j] / cs[j]);
    }
  }
  if (scale < 1.0) {
    for (double& v : x.data()) v *= scale;
  }
  return scale;
}

}  // namespace

PackingSolution ReferencePackingSolver::solve(const PackingLP& lp,
                                              double eps) const {
  if (!(eps > 0.0) || eps >= 1.0) {
    throw Error(ErrorCode::InvalidEpsilon,
                "packing solver needs 0 < eps < 1, got " + std::to_string(eps));
  }
  for (double b : lp.row_capacity) {
    if (b < 0.0) throw Error(ErrorCode::NegativeEntry, "negative capacity");
  }
  for (double b : lp.col_capacity) {
    if (b < 0.0) throw Error(ErrorCode::NegativeEntry, "negative capacity");
  }
  for (double d : lp.objective.data()) {
    if (d < 0.0) throw Error(ErrorCode::NegativeEntry, "negative objective");
  }
  // Internal step tolerance; at saturation the potential argument gives
  // value >= (1 - s)/(1 + s) V_* which exceeds (1 - eps) V_* for s = eps/2.5.
  const double eps_step = eps / 2.5;
  MwuState state(lp, eps_step);

  const double m_active = std::max<double>(lp.num_constraints(), 2);
  const double budget_real = opts_.budget_factor *
                             static_cast<double>(lp.num_variables()) *
                             std::log(m_active) / (eps_step * eps_step);
  const long budget = static_cast<long>(std::min(budget_real, 4e9)) + 1000;

  PackingSolution sol;
  sol.epsilon_used = eps;
  sol.dual_bound = std::numeric_limits<double>::infinity();
  const long cert_interval = std::max<long>(
      opts_.certificate_interval,
      std::min<long>(4096, static_cast<long>(lp.num_variables()) / 2));
  long steps = 0;
  bool saturated = false;
  while (steps < budget) {
    if (steps % cert_interval == 0) {
      sol.dual_bound = std::min(sol.dual_bound, state.dual_bound());
      if (state.scaled_value() >= (1.0 - eps) * sol.dual_bound) {
        sol.certified = true;
        break;
      }
    }
    bool more = state.step(eps_step);
    ++steps;
    if (!more) {
      saturated = state.max_load() >= 1.0;
      break;
    }
  }
  sol.dual_bound = std::min(sol.dual_bound, state.dual_bound());
  if (!sol.certified &&
      state.scaled_value() >= (1.0 - eps) * sol.dual_bound) {
    sol.certified = true;
  }
  if (!sol.certified && !saturated && steps >= budget) {
    throw NotConvergedError(
        "packing solver exhausted its step budget before certifying",
        sol.dual_bound > 0.0 ? 1.0 - state.scaled_value() / sol.dual_bound
                             : 0.0,
        steps);
  }
  sol.iterations = steps;
  Matrix plan = state.take_plan();
  enforce_feasibility(plan, lp);
  sol.value = 0.0;
  for (std::size_t k = 0; k < plan.size(); ++k) {
    sol.value += plan.data()[k] * lp.objective.data()[k];
  }
  sol.x = std::move(plan);
  return sol;
}

PackingSolution solve_packing(const PackingLP& lp, double eps) {
  return ReferencePackingSolver().solve(lp, eps);
}

std::pair<Coupling, SolveReport> solve_ot_via_packing(
    const TransportInstance& inst, double eps, const PackingOracle* oracle) {
  const auto t0 = std::chrono::steady_clock::now();
  if (!(eps > 0.0)) {
    throw Error(ErrorCode::InvalidEpsilon, "eps must be positive");
  }
  if (inst.has_zero_marginal) {
    throw Error(ErrorCode::ZeroMarginalEntry,
                "packing reduction needs strictly positive marginals");
  }
  SolveReport report;
  report.method = SolveMethod::packing;
  report.epsilon = eps;

  const double c_max = inst.cost.max_entry();
  auto finish = [&](Coupling y, long iterations) {
    report.cost = transport_cost(inst.cost, y);
    report.residual_l1 =
        marginal_residuals(y, inst.row_marginal, inst.col_marginal).l1_total;
    report.iterations = iterations;
    report.wall_time_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                              std::chrono::steady_clock::now() - t0)
                              .count();
    return std::make_pair(std::move(y), report);
  };
  if (c_max <= 0.0 || eps >= c_max) {
    // Every coupling is within eps of optimal; the product plan is exact.
    return finish(product_coupling(inst.row_marginal, inst.col_marginal), 0);
  }
  PackingLP lp = build_packing_instance(inst);
  const double eps_prime = eps / c_max;
  ReferencePackingSolver reference;
  const PackingOracle& solver = oracle ? *oracle : reference;
  PackingSolution sol = solver.solve(lp, eps_prime);
  Coupling y = complete_subfeasible(Coupling(std::move(sol.x)),
                                    inst.row_marginal, inst.col_marginal);
  return finish(std::move(y), sol.iterations);
}

}  // namespace ot
