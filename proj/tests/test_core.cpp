#include <cmath>

#include "doctest.h"
#include "ot/core.hpp"
#include "ot/gen.hpp"
#include "test_util.hpp"

using namespace ot;
using namespace ot::test;

TEST_CASE("validate_instance accepts the canonical 2x2") {
  TransportInstance inst = canonical_2x2();
  CHECK(inst.rows() == 2);
  CHECK(inst.cols() == 2);
  CHECK(!inst.has_zero_marginal);
  CHECK(inst.cost.max_entry() == 1.0);
}

TEST_CASE("validate_instance rejects unnormalized marginals") {
  CHECK_THROWS_WITH_AS(
      validate_instance(cost({{0, 1}, {1, 0}}), hist({0.6, 0.5}),
                        hist({0.5, 0.5})),
      doctest::Contains("NotNormalized"), Error);
}

TEST_CASE("validate_instance rejects dimension mismatches") {
  try {
    validate_instance(cost({{0, 1}, {1, 0}}), hist({0.3, 0.3, 0.4}),
                      hist({0.5, 0.5}));
    FAIL("expected a throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DimensionMismatch);
  }
}

TEST_CASE("validate_instance flags non-finite and negative data") {
  CHECK_THROWS_AS(hist({0.5, -0.5}), Error);
  CHECK_THROWS_AS(cost({{0.0, std::nan("")}}), Error);
  TransportInstance with_zero = validate_instance(
      cost({{0, 1}, {1, 0}}), hist({1.0, 0.0}), hist({0.5, 0.5}));
  CHECK(with_zero.has_zero_marginal);
}

TEST_CASE("transport_cost evaluates the inner product") {
  CHECK(transport_cost(cost({{0, 1}, {1, 0}}),
                       plan({{0.5, 0}, {0, 0.5}})) == 0.0);
  CHECK(transport_cost(cost({{1, 1}, {1, 1}}),
                       plan({{0.3, 0.2}, {0.1, 0.4}})) == doctest::Approx(1.0));
  CHECK(transport_cost(cost({{0, 2}, {1, 0}}),
                       plan({{0.25, 0.25}, {0.25, 0.25}})) ==
        doctest::Approx(0.75));
  CHECK_THROWS_AS(transport_cost(cost({{0, 1}, {1, 0}}), plan({{1.0}})),
                  Error);
}

TEST_CASE("entropy follows the matrix-entropy convention") {
  CHECK(entropy(plan({{0.25, 0.25}, {0.25, 0.25}})) ==
        doctest::Approx(1.0 + std::log(4.0)).epsilon(1e-12));
  CHECK(entropy(plan({{1, 0}, {0, 0}})) == doctest::Approx(1.0));
  CHECK(entropy(plan({{0.5, 0}, {0, 0.5}})) ==
        doctest::Approx(1.0 + std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("marginal_residuals reports signed residuals") {
  Histogram half({0.5, 0.5});
  CHECK(marginal_residuals(plan({{0.5, 0}, {0, 0.5}}), half, half).l1_total ==
        0.0);
  MarginalResiduals r =
      marginal_residuals(plan({{0.2, 0}, {0, 0.2}}), half, half);
  CHECK(r.row_residual[0] == doctest::Approx(0.3));
  CHECK(r.col_residual[1] == doctest::Approx(0.3));
  CHECK(r.l1_total == doctest::Approx(1.2));
  CHECK(marginal_residuals(plan({{0, 0}, {0, 0}}), half, half).l1_total ==
        doctest::Approx(2.0));
}

TEST_CASE("entropy of mass-1 couplings stays within [1, 2 log n + 1]") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    std::size_t n = 2 + seed % 6;
    Histogram r = Histogram::uniform(n);
    Coupling x = random_coupling(r, r, seed);
    double h = entropy(x);
    CHECK(h >= 1.0 - 1e-9);
    CHECK(h <= 2.0 * std::log(static_cast<double>(n)) + 1.0 + 1e-9);
  }
  std::size_t n = 4;
  Coupling uniform(Matrix(n, n, 1.0 / static_cast<double>(n * n)));
  CHECK(entropy(uniform) ==
        doctest::Approx(2.0 * std::log(4.0) + 1.0).epsilon(1e-12));
}

TEST_CASE("transport_cost is linear in the plan") {
  Rng rng(7);
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    Histogram r = Histogram::uniform(3);
    Histogram c = Histogram::uniform(4);
    TransportInstance inst =
        random_transport_instance(3, 4, seed, MarginalKind::random_positive);
    Coupling x = random_coupling(r, c, 2 * seed);
    Coupling y = random_coupling(r, c, 2 * seed + 1);
    double a = rng.uniform(), b = rng.uniform();
    Matrix mix(3, 4);
    for (std::size_t k = 0; k < mix.size(); ++k) {
      mix.data()[k] = a * x.plan.data()[k] + b * y.plan.data()[k];
    }
    double lhs = transport_cost(inst.cost, Coupling(std::move(mix)));
    double rhs = a * transport_cost(inst.cost, x) +
                 b * transport_cost(inst.cost, y);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
  }
}

TEST_CASE("zero residual characterizes membership in U(r, c)") {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    Histogram r = Histogram::uniform(4);
    Coupling x = random_coupling(r, r, seed);
    CHECK(marginal_residuals(x, r, r).l1_total < 1e-10);
    // Perturb one entry: the residual must move away from zero.
    x.plan(1, 2) += 0.05;
    CHECK(marginal_residuals(x, r, r).l1_total > 1e-3);
  }
}

TEST_CASE("product coupling matches both marginals") {
  Histogram r({0.7, 0.3});
  Histogram c({0.2, 0.5, 0.3});
  Coupling p = product_coupling(r, c);
  CHECK(marginal_residuals(p, r, c).l1_total < 1e-15);
  CHECK(p.total_mass == doctest::Approx(1.0));
}
