#pragma once

#include <cstdint>
#include <random>

#include "ot/core.hpp"
#include "ot/matching_types.hpp"

namespace ot {

// Seeded instance generators shared by the bench command and the test
// suites. Uniform deviates are taken from the raw mt19937_64 stream (not
// std::uniform_real_distribution, which is implementation-defined), so
// outputs are byte-identical across standard libraries.
inline constexpr const char* kGeneratorName = "mt19937_64";

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0, 1), 53-bit resolution.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  std::uint64_t bits() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

enum class MarginalKind { uniform, random_positive };

// Costs i.i.d. uniform [0, 1); marginals either exactly uniform or random
// strictly positive (entries in [0.2, 1.2), normalized).
TransportInstance random_transport_instance(std::size_t n, std::size_t m,
                                            std::uint64_t seed,
                                            MarginalKind marginals);

// Each of the n_left * n_right possible edges present independently with
// the given density.
BipartiteGraph random_bipartite_graph(std::size_t n_left, std::size_t n_right,
                                      double density, std::uint64_t seed);

// A subfeasible plan: a random feasible coupling scaled down by a random
// factor per entry, so X1 <= r and X^T 1 <= c strictly.
Coupling random_subfeasible(const Histogram& r, const Histogram& c,
                            std::uint64_t seed);

// A random element of U(r, c): mixture of product couplings conditioned on
// random subsets, normalized through rank-one completion.
Coupling random_coupling(const Histogram& r, const Histogram& c,
                         std::uint64_t seed);

}  // namespace ot
