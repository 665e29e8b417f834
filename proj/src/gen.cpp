#include "ot/gen.hpp"

#include "ot/rounding.hpp"

namespace ot {

namespace {

Histogram random_positive_histogram(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  double sum = 0.0;
  for (double& x : v) {
    x = 0.2 + rng.uniform();
    sum += x;
  }
  for (double& x : v) x /= sum;
  // Nudge the last entry so the total is 1 to full precision.
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) s += v[i];
  v[n - 1] = 1.0 - s;
  return Histogram(std::move(v));
}

}  // namespace

TransportInstance random_transport_instance(std::size_t n, std::size_t m,
                                            std::uint64_t seed,
                                            MarginalKind marginals) {
  Rng rng(seed);
  Matrix cost(n, m);
  for (double& v : cost.data()) v = rng.uniform();
  Histogram r = marginals == MarginalKind::uniform
                    ? Histogram::uniform(n)
                    : random_positive_histogram(n, rng);
  Histogram c = marginals == MarginalKind::uniform
                    ? Histogram::uniform(m)
                    : random_positive_histogram(m, rng);
  return validate_instance(CostMatrix(std::move(cost)), std::move(r),
                           std::move(c));
}

BipartiteGraph random_bipartite_graph(std::size_t n_left, std::size_t n_right,
                                      double density, std::uint64_t seed) {
  Rng rng(seed);
  BipartiteGraph g(n_left, n_right);
  for (std::size_t i = 0; i < n_left; ++i) {
    for (std::size_t j = 0; j < n_right; ++j) {
      if (rng.uniform() < density) g.add_edge(i, j);
    }
  }
  return g;
}

Coupling random_coupling(const Histogram& r, const Histogram& c,
                         std::uint64_t seed) {
  Rng rng(seed);
  // Random nonnegative mass, scaled into subfeasibility, then completed.
  Matrix m(r.size(), c.size());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      m(i, j) = rng.uniform() * r[i] * c[j];
    }
  }
  Coupling x(std::move(m));
  std::vector<double> rs = x.plan.row_sums();
  for (std::size_t i = 0; i < x.rows(); ++i) {
    if (rs[i] > r[i]) {
      double f = r[i] / rs[i];
      for (std::size_t j = 0; j < x.cols(); ++j) x.plan(i, j) *= f;
    }
  }
  std::vector<double> cs = x.plan.col_sums();
  for (std::size_t j = 0; j < x.cols(); ++j) {
    if (cs[j] > c[j]) {
      double f = c[j] / cs[j];
      for (std::size_t i = 0; i < x.rows(); ++i) x.plan(i, j) *= f;
    }
  }
  return complete_subfeasible(Coupling(std::move(x.plan)), r, c);
}

Coupling random_subfeasible(const Histogram& r, const Histogram& c,
                            std::uint64_t seed) {
  Coupling x = random_coupling(r, c, seed);
  Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
  for (double& v : x.plan.data()) v *= rng.uniform();
  return Coupling(std::move(x.plan));
}

}  // namespace ot
