#pragma once

#include <cstddef>
#include <optional>

#include "ot/core.hpp"
#include "ot/matching_types.hpp"
#include "ot/packing.hpp"

namespace ot {

// Exact solvers for desk-scale instances. These back the test suites and
// the certify command; the approximate pipelines never call them.

enum class ExactMethod { network_simplex, vertex_enumeration, hopcroft_karp };

struct ExactSolution {
  double optimum = 0.0;
  std::optional<Coupling> argmin_plan;
  ExactMethod method = ExactMethod::network_simplex;
};

// Cap on n*m for the exact transport solvers; overridable through the
// OT_MAX_ORACLE_VARS environment variable.
std::size_t default_oracle_cap();

// Exact optimum of the transport LP via network simplex on the bipartite
// flow formulation (Bland's rule, 1e-11 pivot tolerance).
ExactSolution exact_ot(const TransportInstance& inst,
                       std::size_t max_vars = default_oracle_cap());

// Brute-force cross-check: enumerate the basic feasible solutions of the
// transportation polytope (spanning trees of the complete bipartite
// support) and take the cheapest. Only for tiny instances.
ExactSolution exact_ot_vertex_enumeration(const TransportInstance& inst,
                                          std::size_t max_vars = 16);

// Exact V_* of a packing LP. OT-shaped instances use the objective
// identity V_* = |C|_max - OPT; degenerate b = 0 or d = 0 instances are 0;
// anything else falls back to a dense simplex under the cap.
ExactSolution exact_packing_value(const PackingLP& lp,
                                  std::size_t max_vars = default_oracle_cap());

// Dense-tableau simplex for max d.x s.t. Ax <= b, x >= 0 on the explicit
// (2n) x (nm) form. Independent route used to cross-check the identity.
double packing_value_dense_lp(const PackingLP& lp, std::size_t max_vars = 512);

ExactSolution hopcroft_karp(const BipartiteGraph& graph);

}  // namespace ot
