#pragma once

#include <utility>

#include "ot/core.hpp"
#include "ot/matching_types.hpp"
#include "ot/report.hpp"

namespace ot {

struct MatchResult {
  Matching matching;
  SolveReport ot_report;
  long augmentations = 0;
  double fractional_value = 0.0;
  std::size_t rounded_size = 0;
};

// Matching instance as a transport problem: cost 0 on edges, 1 elsewhere,
// uniform marginals. Unequal sides are padded with isolated vertices up to
// the larger one, which cannot change the maximum matching.
TransportInstance matching_to_ot(const BipartiteGraph& graph);

// Z = n X with all mass on non-edges removed, then rows and columns scaled
// down to load at most 1. When X is eps-optimal the retained value is at
// least OPT_M - n eps - n * 1e-8.
FractionalMatching extract_fractional_matching(const Coupling& x,
                                               const BipartiteGraph& graph);

// Cancels cycles and maximal paths in the fractional support, shifting
// mass by the minimum alternating weight without ever decreasing the total,
// until the support is a partial permutation; entries >= 1/2 become edges.
// The result has at least ceil(value - 1e-9) edges.
Matching round_fractional_matching(const FractionalMatching& z,
                                   const BipartiteGraph& graph);

// BFS augmenting-path search from unmatched left vertices until none
// succeeds; the result is maximum by Berge's criterion.
Matching augment_to_maximum(const Matching& m, const BipartiteGraph& graph);

// Same, reporting how many augmentations were applied.
std::pair<Matching, long> augment_to_maximum_counted(
    const Matching& m, const BipartiteGraph& graph);

// Full pipeline: matching_to_ot, OT solve at eps, extract, round, augment.
// The returned matching is maximum; the report notes how much work the
// augmenting finisher had to do.
MatchResult max_matching_via_ot(const BipartiteGraph& graph, double eps,
                                SolveMethod method);

}  // namespace ot
