// Batch front end: solve / match / certify / bench over CSV and edge-list
// files. Exit codes: 0 success, 1 internal error, 2 input or validation
// error, 3 solver did not converge (partial report still written), 4
// certification or verification failure.

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "ot/gen.hpp"
#include "ot/io.hpp"
#include "ot/matching.hpp"
#include "ot/oracle.hpp"
#include "ot/packing.hpp"
#include "ot/rounding.hpp"
#include "ot/scaling.hpp"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitInput = 2;
constexpr int kExitNotConverged = 3;
constexpr int kExitCertification = 4;

ot::SolveMethod parse_method(const std::string& name) {
  if (name == "packing") return ot::SolveMethod::packing;
  if (name == "scaling") return ot::SolveMethod::scaling;
  throw ot::Error(ot::ErrorCode::IoError,
                  "unknown method '" + name + "' (expected packing|scaling)");
}

ot::TransportInstance load_instance(const std::string& cost_path,
                                    const std::string& row_path,
                                    const std::string& col_path) {
  ot::Matrix cost = ot::read_matrix_csv(cost_path);
  ot::Histogram r(ot::read_vector_csv(row_path));
  ot::Histogram c(ot::read_vector_csv(col_path));
  return ot::validate_instance(ot::CostMatrix(std::move(cost)), std::move(r),
                               std::move(c));
}

json report_to_json(const ot::SolveReport& report) {
  json j;
  j["schema"] = 1;
  j["method"] = ot::method_name(report.method);
  j["epsilon"] = report.epsilon;
  j["cost"] = report.cost;
  j["residual_l1"] = report.residual_l1;
  j["iterations"] = report.iterations;
  j["wall_time_ms"] = report.wall_time_ms;
  if (report.certified_gap) j["certified_gap"] = *report.certified_gap;
  return j;
}

void write_report(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) {
    throw ot::Error(ot::ErrorCode::IoError, "cannot write " + path);
  }
  out << j.dump(2) << '\n';
}

struct SolveArgs {
  std::string cost_path, row_path, col_path;
  double eps = 0.0;
  std::string method = "packing";
  std::string out_path, report_path;
  std::uint64_t seed = 0;
  long max_iters = 0;
};

int run_solve(const SolveArgs& args) {
  ot::TransportInstance inst =
      load_instance(args.cost_path, args.row_path, args.col_path);
  ot::SolveMethod method = parse_method(args.method);
  if (!(args.eps > 0.0)) {
    throw ot::Error(ot::ErrorCode::InvalidEpsilon, "--eps must be positive");
  }
  ot::Coupling plan;
  ot::SolveReport report;
  try {
    if (method == ot::SolveMethod::packing) {
      std::tie(plan, report) = ot::solve_ot_via_packing(inst, args.eps);
    } else {
      ot::ScalingPipelineOptions opts;
      opts.max_half_iterations = args.max_iters;
      std::tie(plan, report) =
          ot::solve_ot_via_scaling(inst, args.eps, nullptr, opts);
    }
  } catch (const ot::NotConvergedError& e) {
    if (!args.report_path.empty()) {
      ot::SolveReport partial;
      partial.method = method;
      partial.epsilon = args.eps;
      partial.residual_l1 = e.best_residual();
      partial.iterations = e.iterations();
      json j = report_to_json(partial);
      j["error"] = "NotConverged";
      write_report(args.report_path, j);
    }
    throw;
  }
  if (!args.out_path.empty()) ot::write_matrix_csv(args.out_path, plan.plan);
  if (!args.report_path.empty()) {
    write_report(args.report_path, report_to_json(report));
  }
  std::cout << "cost " << ot::format_double(report.cost) << " residual "
            << ot::format_double(report.residual_l1) << " iterations "
            << report.iterations << " wall_time_ms " << report.wall_time_ms
            << '\n';
  return kExitOk;
}

struct MatchArgs {
  std::string graph_path;
  double eps = 0.0;
  std::string method = "packing";
  std::string out_path;
  bool verify = false;
};

int run_match(const MatchArgs& args) {
  ot::BipartiteGraph g = ot::read_graph(args.graph_path);
  ot::MatchResult result =
      ot::max_matching_via_ot(g, args.eps, parse_method(args.method));
  if (!args.out_path.empty()) {
    ot::write_matching(args.out_path, result.matching);
  }
  std::cout << "size " << result.matching.size << " augmentations "
            << result.augmentations << '\n';
  if (args.verify) {
    double expected = ot::hopcroft_karp(g).optimum;
    if (static_cast<double>(result.matching.size) != expected) {
      std::cerr << "verification failed: pipeline " << result.matching.size
                << " vs hopcroft_karp " << expected << '\n';
      return kExitCertification;
    }
    std::cout << "verified against hopcroft_karp\n";
  }
  return kExitOk;
}

struct CertifyArgs {
  std::string cost_path, row_path, col_path, plan_path;
  double eps = 0.0;
};

int run_certify(const CertifyArgs& args) {
  ot::TransportInstance inst =
      load_instance(args.cost_path, args.row_path, args.col_path);
  ot::Coupling plan(ot::read_matrix_csv(args.plan_path));
  if (plan.rows() != inst.rows() || plan.cols() != inst.cols()) {
    throw ot::Error(ot::ErrorCode::DimensionMismatch,
                    "plan shape does not match the instance");
  }
  for (double v : plan.plan.data()) {
    if (v < 0.0) {
      throw ot::Error(ot::ErrorCode::NegativeEntry, "plan has negative mass");
    }
  }
  double residual =
      ot::marginal_residuals(plan, inst.row_marginal, inst.col_marginal)
          .l1_total;
  std::cout << "residual " << ot::format_double(residual) << '\n';
  bool ok = residual <= ot::kFeasibilityTol;
  if (inst.rows() * inst.cols() <= ot::default_oracle_cap()) {
    double gap = ot::transport_cost(inst.cost, plan) -
                 ot::exact_ot(inst).optimum;
    std::cout << "gap " << ot::format_double(gap) << '\n';
    ok = ok && gap <= args.eps + 1e-8;
  } else {
    std::cout << "gap skipped (instance above oracle cap; feasibility-only "
                 "certification)\n";
  }
  if (!ok) {
    std::cerr << "certification failed\n";
    return kExitCertification;
  }
  std::cout << "certified\n";
  return kExitOk;
}

struct BenchArgs {
  std::vector<std::size_t> sizes{10, 20, 50};
  std::vector<double> epsilons{0.5, 0.1, 0.05};
  long seeds = 10;
  std::vector<std::string> methods{"packing", "scaling"};
  std::string csv_path;
};

int run_bench(const BenchArgs& args) {
  if (args.sizes.empty() || args.epsilons.empty() || args.seeds < 1 ||
      args.methods.empty()) {
    throw ot::Error(ot::ErrorCode::IoError, "empty benchmark grid");
  }
  for (std::size_t n : args.sizes) {
    if (n < 1) throw ot::Error(ot::ErrorCode::IoError, "sizes must be >= 1");
  }
  for (double e : args.epsilons) {
    if (!(e > 0.0)) {
      throw ot::Error(ot::ErrorCode::InvalidEpsilon,
                      "epsilons must be positive");
    }
  }
  std::vector<ot::SolveMethod> methods;
  for (const std::string& m : args.methods) methods.push_back(parse_method(m));

  std::ostream* out = &std::cout;
  std::ofstream file;
  if (!args.csv_path.empty()) {
    file.open(args.csv_path);
    if (!file) {
      throw ot::Error(ot::ErrorCode::IoError, "cannot write " + args.csv_path);
    }
    out = &file;
  }
  *out << "method,n,epsilon,seed,generator,cost,gap,iterations,wall_time_ms\n";
  for (std::size_t n : args.sizes) {
    for (double eps : args.epsilons) {
      for (long seed = 0; seed < args.seeds; ++seed) {
        ot::TransportInstance inst = ot::random_transport_instance(
            n, n, static_cast<std::uint64_t>(seed) * 1000003ULL + n,
            ot::MarginalKind::uniform);
        std::string gap_str;
        bool in_cap = n * n <= ot::default_oracle_cap();
        double exact = in_cap ? ot::exact_ot(inst).optimum : 0.0;
        for (ot::SolveMethod method : methods) {
          ot::Coupling plan;
          ot::SolveReport report;
          if (method == ot::SolveMethod::packing) {
            std::tie(plan, report) = ot::solve_ot_via_packing(inst, eps);
          } else {
            std::tie(plan, report) = ot::solve_ot_via_scaling(inst, eps);
          }
          gap_str = in_cap ? ot::format_double(report.cost - exact) : "";
          *out << ot::method_name(method) << ',' << n << ','
               << ot::format_double(eps) << ',' << seed << ','
               << ot::kGeneratorName << ','
               << ot::format_double(report.cost) << ',' << gap_str << ','
               << report.iterations << ',' << report.wall_time_ms << '\n';
        }
      }
    }
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Additive eps-approximate optimal transport via packing-LP "
               "and matrix-scaling reductions, with a bipartite-matching "
               "harness"};
  app.require_subcommand(1);

  SolveArgs solve_args;
  CLI::App* solve = app.add_subcommand(
      "solve", "Compute an eps-optimal transport plan");
  solve->add_option("--cost", solve_args.cost_path, "cost matrix CSV")
      ->required();
  solve->add_option("--row", solve_args.row_path, "row marginal file")
      ->required();
  solve->add_option("--col", solve_args.col_path, "column marginal file")
      ->required();
  solve->add_option("--eps", solve_args.eps, "additive tolerance")->required();
  solve->add_option("--method", solve_args.method, "packing|scaling");
  solve->add_option("--out", solve_args.out_path, "plan CSV output");
  solve->add_option("--report", solve_args.report_path, "JSON report output");
  solve->add_option("--seed", solve_args.seed, "recorded seed (solvers are "
                    "deterministic)");
  solve->add_option("--max-iters", solve_args.max_iters,
                    "scaling half-iteration cap override");

  MatchArgs match_args;
  CLI::App* match = app.add_subcommand(
      "match", "Maximum-cardinality bipartite matching through OT");
  match->add_option("--graph", match_args.graph_path, "edge-list file")
      ->required();
  match->add_option("--eps", match_args.eps, "OT solve tolerance")->required();
  match->add_option("--method", match_args.method, "packing|scaling");
  match->add_option("--out", match_args.out_path, "matching output file");
  match->add_flag("--verify", match_args.verify,
                  "cross-check against Hopcroft-Karp");

  CertifyArgs certify_args;
  CLI::App* certify = app.add_subcommand(
      "certify", "Check feasibility and eps-optimality of a plan");
  certify->add_option("--cost", certify_args.cost_path, "cost matrix CSV")
      ->required();
  certify->add_option("--row", certify_args.row_path, "row marginal file")
      ->required();
  certify->add_option("--col", certify_args.col_path, "column marginal file")
      ->required();
  certify->add_option("--plan", certify_args.plan_path, "plan CSV")
      ->required();
  certify->add_option("--eps", certify_args.eps, "claimed tolerance")
      ->required();

  BenchArgs bench_args;
  CLI::App* bench = app.add_subcommand(
      "bench", "Random-instance benchmark grid");
  bench->add_option("--sizes", bench_args.sizes, "instance sizes")
      ->delimiter(',');
  bench->add_option("--epsilons", bench_args.epsilons, "tolerances")
      ->delimiter(',');
  bench->add_option("--seeds", bench_args.seeds, "seeds per cell");
  bench->add_option("--methods", bench_args.methods, "solver methods")
      ->delimiter(',');
  bench->add_option("--csv", bench_args.csv_path, "CSV output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << '\n';
    return kExitInput;
  }

  try {
    if (solve->parsed()) return run_solve(solve_args);
    if (match->parsed()) return run_match(match_args);
    if (certify->parsed()) return run_certify(certify_args);
    if (bench->parsed()) return run_bench(bench_args);
    return kExitInput;
  } catch (const ot::NotConvergedError& e) {
    std::cerr << e.what() << '\n';
    return kExitNotConverged;
  } catch (const ot::Error& e) {
    std::cerr << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
}
