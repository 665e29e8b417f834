// Acceptance suite: every criterion the artifact commits to, one pass/fail
// line each. Exit code is the number of failed criteria.

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "ot/gen.hpp"
#include "ot/io.hpp"
#include "ot/matching.hpp"
#include "ot/oracle.hpp"
#include "ot/packing.hpp"
#include "ot/rounding.hpp"
#include "ot/scaling.hpp"

using namespace ot;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(const std::string& name, bool pass, const std::string& detail,
            Clock::time_point t0) {
  double secs =
      std::chrono::duration<double>(Clock::now() - t0).count();
  std::printf("[%s] %-34s %s (%.1fs)\n", pass ? "PASS" : "FAIL", name.c_str(),
              detail.c_str(), secs);
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

constexpr std::size_t kSizes[] = {5, 10, 20, 50};
constexpr double kEpsilons[] = {0.5, 0.1, 0.05};
constexpr int kInstancesPerSize = 100;  // 50 uniform + 50 random-positive

TransportInstance grid_instance(std::size_t n, int k) {
  MarginalKind kind =
      k < kInstancesPerSize / 2 ? MarginalKind::uniform
                                : MarginalKind::random_positive;
  return random_transport_instance(
      n, n, 7919ULL * n + static_cast<std::uint64_t>(k), kind);
}

// Criterion: both solve pipelines reach cost <= OPT + eps with marginal
// residual <= 1e-8 across the full seeded grid.
void criterion_eps_optimality() {
  auto t0 = Clock::now();
  double worst_gap_slack = -1e300;
  double worst_resid = 0.0;
  long cases = 0, bad = 0;
  for (std::size_t n : kSizes) {
    for (int k = 0; k < kInstancesPerSize; ++k) {
      TransportInstance inst = grid_instance(n, k);
      double exact = exact_ot(inst).optimum;
      for (double eps : kEpsilons) {
        for (SolveMethod method :
             {SolveMethod::packing, SolveMethod::scaling}) {
          auto [plan, rep] = method == SolveMethod::packing
                                 ? solve_ot_via_packing(inst, eps)
                                 : solve_ot_via_scaling(inst, eps);
          double slack = rep.cost - exact - eps;
          worst_gap_slack = std::max(worst_gap_slack, slack);
          worst_resid = std::max(worst_resid, rep.residual_l1);
          ++cases;
          if (slack > 1e-8 || rep.residual_l1 > 1e-8) ++bad;
        }
      }
    }
  }
  report("eps-optimality (both methods)", bad == 0,
         std::to_string(cases) + " solves, worst gap-eps " +
             fmt(worst_gap_slack) + ", worst residual " + fmt(worst_resid),
         t0);
}

// Criterion: the packing oracle honors d.x >= (1 - eps) V_* with Ax <= b.
void criterion_packing_contract() {
  auto t0 = Clock::now();
  long cases = 0, bad = 0;
  double worst_ratio = 1e300;
  for (std::size_t n : kSizes) {
    for (int k = 0; k < kInstancesPerSize; ++k) {
      TransportInstance inst = grid_instance(n, k);
      PackingLP lp = build_packing_instance(inst);
      double vstar = inst.cost.max_entry() - exact_ot(inst).optimum;
      for (double eps : kEpsilons) {
        PackingSolution sol = solve_packing(lp, eps);
        ++cases;
        bool ok = sol.value >= (1.0 - eps) * vstar - 1e-9;
        std::vector<double> rs = sol.x.row_sums(), cs = sol.x.col_sums();
        for (std::size_t i = 0; i < rs.size(); ++i) {
          ok = ok && rs[i] <= lp.row_capacity[i] + 1e-9;
        }
        for (std::size_t j = 0; j < cs.size(); ++j) {
          ok = ok && cs[j] <= lp.col_capacity[j] + 1e-9;
        }
        if (vstar > 0.0) {
          worst_ratio = std::min(worst_ratio, sol.value / vstar);
        }
        if (!ok) ++bad;
      }
    }
  }
  report("packing (1-eps) contract", bad == 0,
         std::to_string(cases) + " solves, worst value/V* " + fmt(worst_ratio),
         t0);
}

// Criterion: |e_r|_1 = |e_c|_1 on 1000 subfeasible couplings and the
// rank-one completion is feasible and entrywise dominating.
void criterion_lp_rounding_identity() {
  auto t0 = Clock::now();
  long bad = 0;
  double worst_identity = 0.0, worst_resid = 0.0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    std::size_t n = 2 + seed % 7, m = 2 + (seed / 7) % 7;
    TransportInstance inst = random_transport_instance(
        n, m, seed + 31337, MarginalKind::random_positive);
    Coupling x =
        random_subfeasible(inst.row_marginal, inst.col_marginal, seed);
    MarginalResiduals res =
        marginal_residuals(x, inst.row_marginal, inst.col_marginal);
    double identity_gap =
        std::fabs(l1_norm(res.row_residual) - l1_norm(res.col_residual));
    worst_identity = std::max(worst_identity, identity_gap);
    Coupling y = complete_subfeasible(x, inst.row_marginal, inst.col_marginal);
    double resid =
        marginal_residuals(y, inst.row_marginal, inst.col_marginal).l1_total;
    worst_resid = std::max(worst_resid, resid);
    bool dominated = true;
    for (std::size_t t = 0; t < y.plan.size(); ++t) {
      dominated = dominated && y.plan.data()[t] >= x.plan.data()[t] - 1e-15;
    }
    if (identity_gap > 1e-10 || resid > 1e-10 || !dominated) ++bad;
  }
  report("rank-one completion identity", bad == 0,
         "1000 couplings, worst |e_r|-|e_c| " + fmt(worst_identity) +
             ", worst residual " + fmt(worst_resid),
         t0);
}

// Criterion: polytope rounding increases cost by at most
// 2 |C|_max (|B1 - r|_1 + |B^T1 - c|_1).
void criterion_polytope_rounding_bound() {
  auto t0 = Clock::now();
  long bad = 0;
  double worst_slack = -1e300;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    std::size_t n = 2 + seed % 6, m = 2 + (seed / 6) % 6;
    TransportInstance inst = random_transport_instance(
        n, m, seed + 77777, MarginalKind::random_positive);
    Coupling b = random_coupling(inst.row_marginal, inst.col_marginal, seed);
    Rng rng(seed * 131 + 9);
    for (double& v : b.plan.data()) v *= 0.85 + 0.3 * rng.uniform();
    b = Coupling(std::move(b.plan));
    double resid =
        marginal_residuals(b, inst.row_marginal, inst.col_marginal).l1_total;
    Coupling x =
        round_to_polytope(b, inst.row_marginal, inst.col_marginal, inst.cost);
    double out_resid =
        marginal_residuals(x, inst.row_marginal, inst.col_marginal).l1_total;
    double slack = transport_cost(inst.cost, x) -
                   (transport_cost(inst.cost, b) +
                    2.0 * inst.cost.max_entry() * resid);
    worst_slack = std::max(worst_slack, slack);
    if (slack > 1e-8 || out_resid > 1e-9) ++bad;
  }
  report("polytope rounding cost bound", bad == 0,
         "1000 plans, worst bound slack " + fmt(worst_slack), t0);
}

// Criterion: truncating sub-threshold marginal mass, solving exactly, and
// extending loses at most eps.
void criterion_truncation_composition() {
  auto t0 = Clock::now();
  long bad = 0, cases = 0;
  double worst = -1e300;
  for (std::uint64_t seed = 0; cases < 100 && seed < 3000; ++seed) {
    std::size_t n = 3 + seed % 4;
    double eps = 0.2 + 0.2 * (seed % 2);
    TransportInstance base = random_transport_instance(
        n, n, seed + 999, MarginalKind::random_positive);
    // Force one entry of each marginal below eps / (2 |C|_max n).
    double threshold = eps / (2.0 * base.cost.max_entry() * n);
    auto squash = [&](const Histogram& h) {
      std::vector<double> v = h.values();
      v[0] = threshold * 0.4;
      double rest = 0.0;
      for (std::size_t i = 1; i < n; ++i) rest += v[i];
      for (std::size_t i = 1; i < n; ++i) v[i] *= (1.0 - v[0]) / rest;
      double s = 0.0;
      for (std::size_t i = 0; i + 1 < n; ++i) s += v[i];
      v[n - 1] = 1.0 - s;
      return Histogram(v);
    };
    TransportInstance inst = validate_instance(base.cost,
                                               squash(base.row_marginal),
                                               squash(base.col_marginal));
    TruncationMap map = truncate_marginals(inst.row_marginal,
                                           inst.col_marginal, eps,
                                           inst.cost.max_entry());
    if (map.is_identity()) continue;
    ++cases;
    TransportInstance trunc =
        validate_instance(map.restrict_cost(inst.cost), map.truncated_row,
                          map.truncated_col);
    Coupling ext = extend_coupling(*exact_ot(trunc).argmin_plan, map,
                                   inst.row_marginal, inst.col_marginal);
    double resid =
        marginal_residuals(ext, inst.row_marginal, inst.col_marginal).l1_total;
    double slack =
        transport_cost(inst.cost, ext) - exact_ot(inst).optimum - eps;
    worst = std::max(worst, slack);
    if (slack > 1e-8 || resid > 1e-9) ++bad;
  }
  report("marginal truncation composition", bad == 0,
         std::to_string(cases) + " truncated instances, worst cost slack " +
             fmt(worst),
         t0);
}

// Criterion: normalized near-optimal potentials stay within
// 2 log(n nu xi) + 0.1.
void criterion_potential_radius() {
  auto t0 = Clock::now();
  long bad = 0;
  double worst_margin = -1e300;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    std::size_t n = 2 + seed % 9;
    Rng rng(seed * 17 + 3);
    Matrix log_a(n, n);
    for (double& v : log_a.data()) v = -4.0 * rng.uniform();
    TransportInstance inst = random_transport_instance(
        n, n, seed + 555, MarginalKind::random_positive);
    ScalingProblem p = make_scaling_problem(std::move(log_a),
                                            inst.row_marginal,
                                            inst.col_marginal);
    auto [z, res] = sinkhorn_scale(p, 1e-10, 500000);
    double min_x = *std::min_element(z.x.begin(), z.x.end());
    double radius =
        potential_radius_log(n, p.log_entry_floor, std::log(p.target_floor));
    double extent = 0.0;
    for (double v : z.x) extent = std::max(extent, std::fabs(v - min_x));
    for (double v : z.y) extent = std::max(extent, std::fabs(v + min_x));
    worst_margin = std::max(worst_margin, extent - radius);
    if (extent > radius + 0.1) ++bad;
  }
  report("potential radius bound", bad == 0,
         "50 problems, worst extent-radius " + fmt(worst_margin), t0);
}

// Criterion: the scaling dual objective never increases across
// half-iterations.
void criterion_sinkhorn_monotonicity() {
  auto t0 = Clock::now();
  long bad = 0;
  double worst_rise = -1e300;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    std::size_t n = 2 + seed % 6;
    TransportInstance inst = random_transport_instance(
        n, n, seed + 4242, MarginalKind::random_positive);
    ScalingProblem p = gibbs_kernel_log(inst.cost, 0.05 + 0.05 * (seed % 4),
                                        inst.row_marginal, inst.col_marginal);
    SinkhornOptions opts;
    opts.max_half_iterations = 80;
    opts.track_dual_trace = true;
    ScalingResult r = SinkhornOracle().scale(p, 1e-13, opts);
    for (std::size_t t = 1; t < r.dual_trace.size(); ++t) {
      double rise = r.dual_trace[t] - r.dual_trace[t - 1];
      worst_rise = std::max(worst_rise, rise);
      if (rise > 1e-10) ++bad;
    }
  }
  report("Sinkhorn dual monotonicity", bad == 0,
         "50 problems, worst half-step rise " + fmt(worst_rise), t0);
}

struct MatchCorpus {
  BipartiteGraph graph;
  std::size_t n;
  double hk;
};

std::vector<MatchCorpus> matching_corpus() {
  std::vector<MatchCorpus> out;
  const double densities[] = {0.05, 0.2, 0.5};
  for (int k = 0; k < 200; ++k) {
    Rng rng(100000ULL + k);
    std::size_t n = 5 + rng.bits() % 96;  // 5..100
    double density = densities[k % 3];
    BipartiteGraph g = random_bipartite_graph(
        n, n, density, 200000ULL + static_cast<std::uint64_t>(k));
    double hk = hopcroft_karp(g).optimum;
    out.push_back({std::move(g), n, hk});
  }
  return out;
}

// Criterion: the OT pipeline recovers the exact maximum matching on every
// corpus graph for both methods and both tolerances; augmentation counts
// beyond n eps + 1 are logged as a soft rate.
void criterion_matching_equivalence(const std::vector<MatchCorpus>& corpus) {
  auto t0 = Clock::now();
  long bad = 0, soft_ok = 0, runs = 0;
  for (const auto& item : corpus) {
    for (SolveMethod method : {SolveMethod::packing, SolveMethod::scaling}) {
      for (double eps : {0.5, 1.0 / (2.0 * static_cast<double>(item.n))}) {
        MatchResult r = max_matching_via_ot(item.graph, eps, method);
        ++runs;
        if (static_cast<double>(r.matching.size) != item.hk) ++bad;
        if (static_cast<double>(r.augmentations) <=
            static_cast<double>(item.n) * eps + 1.0) {
          ++soft_ok;
        }
      }
    }
  }
  double soft_rate = 100.0 * static_cast<double>(soft_ok) /
                     static_cast<double>(runs);
  char detail[128];
  std::snprintf(detail, sizeof(detail),
                "%ld runs, %ld size mismatches; aug <= n*eps+1 in %.1f%% "
                "(soft, target 95%%)",
                runs, bad, soft_rate);
  if (soft_rate < 95.0) {
    std::printf("[WARN] augmentation-count soft bound below target\n");
  }
  report("matching equals Hopcroft-Karp", bad == 0, detail, t0);
}

// Criterion: exact OT value of the reduction instance is 1 - OPT_M / n.
void criterion_matching_value_identity(
    const std::vector<MatchCorpus>& corpus) {
  auto t0 = Clock::now();
  long bad = 0;
  double worst = 0.0;
  for (const auto& item : corpus) {
    double opt_t = exact_ot(matching_to_ot(item.graph)).optimum;
    double predicted = 1.0 - item.hk / static_cast<double>(item.n);
    worst = std::max(worst, std::fabs(opt_t - predicted));
    if (std::fabs(opt_t - predicted) > 1e-9) ++bad;
  }
  report("matching/OT value identity", bad == 0,
         "200 graphs, worst |OPT_T - (1 - OPT_M/n)| " + fmt(worst), t0);
}

// Criterion: network simplex equals brute-force vertex enumeration.
void criterion_oracle_consistency() {
  auto t0 = Clock::now();
  long bad = 0, cases = 0;
  double worst = 0.0;
  for (std::uint64_t seed = 0; cases < 500; ++seed) {
    std::size_t n = 2 + seed % 3, m = 2 + (seed / 3) % 3;
    if (n * m > 16) continue;
    ++cases;
    TransportInstance inst = random_transport_instance(
        n, m, seed + 123, seed % 2 ? MarginalKind::uniform
                                   : MarginalKind::random_positive);
    double a = exact_ot(inst).optimum;
    double b = exact_ot_vertex_enumeration(inst).optimum;
    worst = std::max(worst, std::fabs(a - b));
    if (std::fabs(a - b) > 1e-9) ++bad;
  }
  report("oracle self-consistency", bad == 0,
         "500 instances, worst |simplex - enumeration| " + fmt(worst), t0);
}

int run_cli(const std::string& args) {
  std::string cmd = std::string(OT_CLI_BINARY) + " " + args +
                    " > /dev/null 2>&1";
  return WEXITSTATUS(std::system(cmd.c_str()));
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string without_walltime(const fs::path& p) {
  std::ifstream in(p);
  std::string line, out;
  while (std::getline(in, line)) {
    if (line.find("wall_time_ms") == std::string::npos) out += line + '\n';
  }
  return out;
}

// Criterion: CLI runs are deterministic and certify their own output, on
// the canonical 2x2 and a 20x20 random instance.
void criterion_cli_roundtrip() {
  auto t0 = Clock::now();
  fs::path dir = fs::temp_directory_path() /
                 ("ot_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  bool ok = true;
  std::string detail = "deterministic + certified";

  auto stage = [&](const TransportInstance& inst, const std::string& tag) {
    fs::path c = dir / (tag + "_C.csv"), r = dir / (tag + "_r.csv"),
             col = dir / (tag + "_c.csv");
    write_matrix_csv(c.string(), inst.cost.entries());
    write_vector_csv(r.string(), inst.row_marginal.values());
    write_vector_csv(col.string(), inst.col_marginal.values());
    for (const std::string method : {"packing", "scaling"}) {
      fs::path p1 = dir / (tag + method + "1.csv"),
               p2 = dir / (tag + method + "2.csv");
      fs::path j1 = dir / (tag + method + "1.json"),
               j2 = dir / (tag + method + "2.json");
      std::string base = "solve --cost " + c.string() + " --row " +
                         r.string() + " --col " + col.string() +
                         " --eps 0.1 --seed 3 --method " + method;
      if (run_cli(base + " --out " + p1.string() + " --report " +
                  j1.string()) != 0 ||
          run_cli(base + " --out " + p2.string() + " --report " +
                  j2.string()) != 0) {
        ok = false;
        detail = "solve failed on " + tag + "/" + method;
        return;
      }
      if (slurp(p1) != slurp(p2) ||
          without_walltime(j1) != without_walltime(j2)) {
        ok = false;
        detail = "non-deterministic output on " + tag + "/" + method;
        return;
      }
      if (run_cli("certify --cost " + c.string() + " --row " + r.string() +
                  " --col " + col.string() + " --plan " + p1.string() +
                  " --eps 0.1") != 0) {
        ok = false;
        detail = "round-trip certification failed on " + tag + "/" + method;
        return;
      }
    }
  };

  TransportInstance canonical = validate_instance(
      CostMatrix(Matrix::from_rows({{0, 1}, {1, 0}})),
      Histogram({0.5, 0.5}), Histogram({0.5, 0.5}));
  stage(canonical, "canonical");
  if (ok) {
    stage(random_transport_instance(20, 20, 2024, MarginalKind::uniform),
          "random20");
  }
  fs::remove_all(dir);
  report("CLI determinism and round-trip", ok, detail, t0);
}

}  // namespace

int main() {
  std::printf("acceptance suite (oracle cap %zu variables)\n",
              default_oracle_cap());
  auto t0 = Clock::now();

  criterion_eps_optimality();
  criterion_packing_contract();
  criterion_lp_rounding_identity();
  criterion_polytope_rounding_bound();
  criterion_truncation_composition();
  criterion_potential_radius();
  criterion_sinkhorn_monotonicity();
  std::vector<MatchCorpus> corpus = matching_corpus();
  criterion_matching_equivalence(corpus);
  criterion_matching_value_identity(corpus);
  criterion_oracle_consistency();
  criterion_cli_roundtrip();

  double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  std::printf("%s: %d criterion(s) failed (total %.1fs)\n",
              failures == 0 ? "OK" : "FAILED", failures, secs);
  return failures;
}
