#include <cmath>

#include "doctest.h"
#include "ot/gen.hpp"
#include "ot/oracle.hpp"
#include "ot/rounding.hpp"
#include "test_util.hpp"

using namespace ot;
using namespace ot::test;

TEST_CASE("complete_subfeasible adds the rank-one correction") {
  Histogram half({0.5, 0.5});
  Coupling y = complete_subfeasible(plan({{0.2, 0}, {0, 0.2}}), half, half);
  CHECK(y.plan(0, 0) == doctest::Approx(0.35));
  CHECK(y.plan(0, 1) == doctest::Approx(0.15));
  CHECK(y.plan(1, 0) == doctest::Approx(0.15));
  CHECK(y.plan(1, 1) == doctest::Approx(0.35));
  CHECK(marginal_residuals(y, half, half).l1_total < 1e-10);
}

TEST_CASE("complete_subfeasible keeps already-feasible plans") {
  Histogram half({0.5, 0.5});
  Coupling x = plan({{0.25, 0.25}, {0.25, 0.25}});
  Coupling y = complete_subfeasible(x, half, half);
  for (std::size_t k = 0; k < 4; ++k) {
    CHECK(y.plan.data()[k] == doctest::Approx(x.plan.data()[k]));
  }
}

TEST_CASE("complete_subfeasible of the zero plan is the product coupling") {
  Histogram half({0.5, 0.5});
  Coupling y = complete_subfeasible(plan({{0, 0}, {0, 0}}), half, half);
  for (std::size_t k = 0; k < 4; ++k) {
    CHECK(y.plan.data()[k] == doctest::Approx(0.25));
  }
}

TEST_CASE("complete_subfeasible rejects infeasible inputs") {
  Histogram half({0.5, 0.5});
  CHECK_THROWS_AS(
      complete_subfeasible(plan({{0.7, 0}, {0, 0.2}}), half, half), Error);
}

TEST_CASE("the completion identity |e_r| = |e_c| holds on random inputs") {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    std::size_t n = 2 + seed % 5, m = 2 + (seed / 5) % 5;
    TransportInstance inst =
        random_transport_instance(n, m, seed, MarginalKind::random_positive);
    Coupling x =
        random_subfeasible(inst.row_marginal, inst.col_marginal, seed + 1);
    MarginalResiduals res =
        marginal_residuals(x, inst.row_marginal, inst.col_marginal);
    CHECK(std::fabs(l1_norm(res.row_residual) - l1_norm(res.col_residual)) <
          1e-10);
    Coupling y = complete_subfeasible(x, inst.row_marginal, inst.col_marginal);
    CHECK(marginal_residuals(y, inst.row_marginal, inst.col_marginal)
              .l1_total < 1e-10);
    for (std::size_t k = 0; k < y.plan.size(); ++k) {
      CHECK(y.plan.data()[k] >= x.plan.data()[k] - 1e-15);
    }
  }
}

TEST_CASE("round_to_polytope is the identity on U(r, c)") {
  Histogram half({0.5, 0.5});
  CostMatrix c = cost({{0, 1}, {1, 0}});
  Coupling b = plan({{0.25, 0.25}, {0.25, 0.25}});
  Coupling x = round_to_polytope(b, half, half, c);
  for (std::size_t k = 0; k < 4; ++k) {
    CHECK(x.plan.data()[k] == doctest::Approx(0.25));
  }
  Coupling prod = product_coupling(half, half);
  Coupling x2 = round_to_polytope(prod, half, half, c);
  CHECK(marginal_residuals(x2, half, half).l1_total < 1e-12);
}

TEST_CASE("round_to_polytope hand-executed example") {
  Histogram half({0.5, 0.5});
  Coupling x = round_to_polytope(plan({{0.6, 0}, {0, 0.4}}), half, half,
                                 cost({{0, 1}, {1, 0}}));
  CHECK(x.plan(0, 0) == doctest::Approx(0.5));
  CHECK(x.plan(0, 1) == doctest::Approx(0.0));
  CHECK(x.plan(1, 0) == doctest::Approx(0.0));
  CHECK(x.plan(1, 1) == doctest::Approx(0.5));
}

TEST_CASE("round_to_polytope rejects the zero plan") {
  Histogram half({0.5, 0.5});
  CHECK_THROWS_AS(round_to_polytope(plan({{0, 0}, {0, 0}}), half, half,
                                    cost({{0, 1}, {1, 0}})),
                  Error);
}

TEST_CASE("round_to_polytope cost bound on random near-feasible inputs") {
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    std::size_t n = 2 + seed % 4, m = 2 + (seed / 4) % 4;
    TransportInstance inst =
        random_transport_instance(n, m, seed, MarginalKind::random_positive);
    Coupling b = random_coupling(inst.row_marginal, inst.col_marginal, seed);
    // Multiplicative noise makes the marginals nearly but not exactly right.
    Rng rng(seed * 31 + 7);
    for (double& v : b.plan.data()) v *= 0.9 + 0.2 * rng.uniform();
    b = Coupling(std::move(b.plan));
    double resid_before =
        marginal_residuals(b, inst.row_marginal, inst.col_marginal).l1_total;
    Coupling x =
        round_to_polytope(b, inst.row_marginal, inst.col_marginal, inst.cost);
    MarginalResiduals after =
        marginal_residuals(x, inst.row_marginal, inst.col_marginal);
    CHECK(after.l1_total < 1e-9);
    for (double v : x.plan.data()) CHECK(v >= 0.0);
    double lhs = transport_cost(inst.cost, x);
    double rhs = transport_cost(inst.cost, b) +
                 2.0 * inst.cost.max_entry() * resid_before;
    CHECK(lhs <= rhs + 1e-8);
  }
}

TEST_CASE("truncate_marginals drops sub-threshold entries") {
  TruncationMap map =
      truncate_marginals(hist({0.99, 0.01}), hist({0.5, 0.5}), 0.1, 1.0);
  CHECK(map.row_threshold == doctest::Approx(0.025));
  REQUIRE(map.row_support.size() == 1);
  CHECK(map.row_support[0] == 0);
  CHECK(map.col_support.size() == 2);
  CHECK(map.truncated_row[0] == doctest::Approx(1.0));
  CHECK(map.truncated_col[0] == doctest::Approx(0.5));
  CHECK(map.mass_factor == doctest::Approx(0.99));
}

TEST_CASE("truncate_marginals is the identity when all entries clear it") {
  Histogram r({0.4, 0.6});
  TruncationMap map = truncate_marginals(r, r, 0.1, 1.0);
  CHECK(map.is_identity());
  CHECK(map.mass_factor == 1.0);
  CHECK(map.truncated_row[0] == 0.4);

  // Uniform marginals always survive once eps <= |C|_max.
  for (std::size_t n : {2UL, 5UL, 17UL}) {
    Histogram u = Histogram::uniform(n);
    CHECK(truncate_marginals(u, u, 1.0, 1.0).is_identity());
  }
}

TEST_CASE("extend_coupling restores the original marginals") {
  Histogram r({0.99, 0.01}), c({0.5, 0.5});
  TruncationMap map = truncate_marginals(r, c, 0.1, 1.0);
  Coupling sub = plan({{0.5, 0.5}});
  Coupling ext = extend_coupling(sub, map, r, c);
  CHECK(ext.plan(0, 0) == doctest::Approx(0.495));
  CHECK(ext.plan(0, 1) == doctest::Approx(0.495));
  CHECK(ext.plan(1, 0) == doctest::Approx(0.005));
  CHECK(ext.plan(1, 1) == doctest::Approx(0.005));
  CHECK(marginal_residuals(ext, r, c).l1_total < 1e-12);

  // Rows outside the support carry the product form exactly.
  CHECK(ext.plan(1, 0) == r[1] * c[0]);
  CHECK(ext.plan(1, 1) == r[1] * c[1]);
}

TEST_CASE("extend_coupling is the identity under identity truncation") {
  Histogram r({0.4, 0.6});
  TruncationMap map = truncate_marginals(r, r, 0.1, 1.0);
  Coupling sub = plan({{0.4, 0.0}, {0.0, 0.6}});
  Coupling ext = extend_coupling(sub, map, r, r);
  for (std::size_t k = 0; k < 4; ++k) {
    CHECK(ext.plan.data()[k] == sub.plan.data()[k]);
  }
}

TEST_CASE("extend_coupling rejects plans infeasible for the truncation") {
  Histogram r({0.99, 0.01}), c({0.5, 0.5});
  TruncationMap map = truncate_marginals(r, c, 0.1, 1.0);
  CHECK_THROWS_AS(extend_coupling(plan({{0.9, 0.0}}), map, r, c), Error);
}

TEST_CASE("truncate_marginals guards the degenerate corners") {
  Histogram u = Histogram::uniform(2);
  // eps beyond 2 |C|_max empties both supports; callers clamp eps upstream.
  try {
    truncate_marginals(u, u, 10.0, 1.0);
    FAIL("expected EmptySupport");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptySupport);
  }
  CHECK_THROWS_AS(truncate_marginals(u, u, 0.0, 1.0), Error);
  CHECK_THROWS_AS(truncate_marginals(u, u, 0.1, 0.0), Error);
}

TEST_CASE("truncation composition: exact solve of the truncated instance stays eps-close") {
  long checked = 0;
  for (std::uint64_t seed = 0; seed < 400 && checked < 60; ++seed) {
    std::size_t n = 3 + seed % 3;
    TransportInstance inst =
        random_transport_instance(n, n, seed, MarginalKind::random_positive);
    // Push one marginal entry below the threshold.
    std::vector<double> rv = inst.row_marginal.values();
    double eps = 0.3;
    rv[0] = eps / (2.0 * inst.cost.max_entry() * n) * 0.5;
    double rest = 0.0;
    for (std::size_t i = 1; i < n; ++i) rest += rv[i];
    for (std::size_t i = 1; i < n; ++i) rv[i] *= (1.0 - rv[0]) / rest;
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) s += rv[i];
    rv[n - 1] = 1.0 - s;
    TransportInstance mod = validate_instance(
        inst.cost, Histogram(rv), inst.col_marginal);

    TruncationMap map = truncate_marginals(mod.row_marginal, mod.col_marginal,
                                           eps, mod.cost.max_entry());
    if (map.is_identity()) continue;
    ++checked;
    CostMatrix sub_cost = map.restrict_cost(mod.cost);
    TransportInstance trunc = validate_instance(sub_cost, map.truncated_row,
                                                map.truncated_col);
    ExactSolution inner = exact_ot(trunc);
    Coupling ext = extend_coupling(*inner.argmin_plan, map, mod.row_marginal,
                                   mod.col_marginal);
    CHECK(marginal_residuals(ext, mod.row_marginal, mod.col_marginal)
              .l1_total < 1e-9);
    double extended_cost = transport_cost(mod.cost, ext);
    CHECK(extended_cost <=
          map.mass_factor * inner.optimum + eps + 1e-9);
    ExactSolution outer = exact_ot(mod);
    CHECK(extended_cost <= outer.optimum + eps + 1e-8);
  }
  CHECK(checked >= 50);
}
