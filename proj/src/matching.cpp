#include "ot/matching.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <queue>
#include <set>
#include <string>

#include "ot/packing.hpp"
#include "ot/scaling.hpp"

namespace ot {

std::size_t BipartiteGraph::edge_count() const {
  std::size_t count = 0;
  for (const auto& row : adj) {
    for (bool b : row) count += b ? 1 : 0;
  }
  return count;
}

std::vector<std::pair<std::size_t, std::size_t>> Matching::edges() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < left_match.size(); ++i) {
    if (left_match[i] >= 0) {
      out.emplace_back(i, static_cast<std::size_t>(left_match[i]));
    }
  }
  return out;
}

TransportInstance matching_to_ot(const BipartiteGraph& graph) {
  const std::size_t n = std::max(graph.n_left, graph.n_right);
  if (n == 0) {
    throw Error(ErrorCode::InvalidDimension, "graph has no vertices");
  }
  Matrix cost(n, n, 1.0);
  for (std::size_t i = 0; i < graph.n_left; ++i) {
    for (std::size_t j = 0; j < graph.n_right; ++j) {
      if (graph.adj[i][j]) cost(i, j) = 0.0;
    }
  }
  return validate_instance(CostMatrix(std::move(cost)), Histogram::uniform(n),
                           Histogram::uniform(n));
}

FractionalMatching extract_fractional_matching(const Coupling& x,
                                               const BipartiteGraph& graph) {
  const std::size_t n = std::max(graph.n_left, graph.n_right);
  if (x.rows() != n || x.cols() != n) {
    throw Error(ErrorCode::NotACoupling,
                "plan shape does not match the padded graph");
  }
  Histogram uniform = Histogram::uniform(n);
  MarginalResiduals res = marginal_residuals(x, uniform, uniform);
  if (res.l1_total > kFeasibilityTol) {
    throw Error(ErrorCode::NotACoupling,
                "plan is not a coupling of uniform marginals (residual " +
                    std::to_string(res.l1_total) + ")");
  }
  FractionalMatching z;
  z.weights = Matrix(graph.n_left, graph.n_right);
  const double scale = static_cast<double>(n);
  for (std::size_t i = 0; i < graph.n_left; ++i) {
    for (std::size_t j = 0; j < graph.n_right; ++j) {
      if (graph.adj[i][j]) z.weights(i, j) = scale * x.plan(i, j);
    }
  }
  // The coupling's residual slack can leave vertex loads slightly above 1;
  // scale them back so the fractional-matching invariant holds exactly.
  std::vector<double> loads = z.weights.row_sums();
  for (std::size_t i = 0; i < z.weights.rows(); ++i) {
    if (loads[i] > 1.0) {
      double f = 1.0 / loads[i];
      double* row = z.weights.row(i);
      for (std::size_t j = 0; j < z.weights.cols(); ++j) row[j] *= f;
    }
  }
  loads = z.weights.col_sums();
  for (std::size_t j = 0; j < z.weights.cols(); ++j) {
    if (loads[j] > 1.0) {
      double f = 1.0 / loads[j];
      for (std::size_t i = 0; i < z.weights.rows(); ++i) {
        z.weights(i, j) *= f;
      }
    }
  }
  z.value = z.weights.sum();
  return z;
}

namespace {

// Cycle/path canceling over the strictly fractional support graph. Walks
// start from a fractional-degree-1 vertex when one exists, so dead-end
// walks are maximal (leaf-to-leaf) paths; with no leaves every walk closes
// into a cycle. Each shift drives at least one edge to exactly 0 or 1.
class FractionalRounder {
 public:
  explicit FractionalRounder(Matrix weights)
      : w_(std::move(weights)),
        nl_(w_.rows()),
        nr_(w_.cols()),
        left_adj_(nl_),
        right_adj_(nr_) {
    for (std::size_t i = 0; i < nl_; ++i) {
      for (std::size_t j = 0; j < nr_; ++j) {
        if (fractional(w_(i, j))) {
          left_adj_[i].insert(j);
          right_adj_[j].insert(i);
        }
      }
    }
  }

  Matrix run() {
    while (true) {
      auto seed = pick_seed();
      if (!seed) break;
      cancel_walk(seed->first, seed->second);
    }
    return std::move(w_);
  }

 private:
  // Vertex handle: (is_left, index).
  using Vertex = std::pair<bool, std::size_t>;

  static bool fractional(double v) { return v > 0.0 && v < 1.0; }

  std::size_t degree(Vertex v) const {
    return v.first ? left_adj_[v.second].size() : right_adj_[v.second].size();
  }

  // Prefers a leaf so dead-end walks are maximal paths.
  std::optional<Vertex> pick_seed() const {
    std::optional<Vertex> any;
    for (std::size_t i = 0; i < nl_; ++i) {
      if (left_adj_[i].size() == 1) return Vertex{true, i};
      if (!any && !left_adj_[i].empty()) any = Vertex{true, i};
    }
    for (std::size_t j = 0; j < nr_; ++j) {
      if (right_adj_[j].size() == 1) return Vertex{false, j};
    }
    return any;
  }

  // Snap near-integral values exactly so canceled edges leave the support.
  void set_weight(std::size_t i, std::size_t j, double v) {
    if (v < 1e-12) v = 0.0;
    if (v > 1.0 - 1e-12) v = 1.0;
    bool was = fractional(w_(i, j));
    w_(i, j) = v;
    if (was && !fractional(v)) {
      left_adj_[i].erase(j);
      right_adj_[j].erase(i);
    }
  }

  void cancel_walk(bool seed_is_left, std::size_t seed) {
    std::vector<Vertex> verts{{seed_is_left, seed}};
    std::vector<std::pair<std::size_t, std::size_t>> edges;  // (left, right)
    std::vector<int> pos_left(nl_, -1), pos_right(nr_, -1);
    (seed_is_left ? pos_left : pos_right)[seed] = 0;

    while (true) {
      Vertex cur = verts.back();
      const auto& adj =
          cur.first ? left_adj_[cur.second] : right_adj_[cur.second];
      // Next fractional edge that is not the one we arrived by.
      std::optional<std::size_t> next;
      for (std::size_t cand : adj) {
        if (!edges.empty()) {
          const auto& prev = edges.back();
          std::size_t came_from = cur.first ? prev.second : prev.first;
          if (cand == came_from) continue;
        }
        next = cand;
        break;
      }
      if (!next) {
        // Dead end: the walk is a maximal path (seeding prefers leaves).
        shift(edges.begin(), edges.end());
        return;
      }
      if (cur.first) {
        edges.emplace_back(cur.second, *next);
      } else {
        edges.emplace_back(*next, cur.second);
      }
      Vertex nxt{!cur.first, *next};
      int& seen = (nxt.first ? pos_left : pos_right)[nxt.second];
      if (seen >= 0) {
        // Cycle: edges from the first visit of nxt to the walk's end.
        shift(edges.begin() + seen, edges.end());
        return;
      }
      seen = static_cast<int>(verts.size());
      verts.push_back(nxt);
    }
  }

  // Alternating mass shift over [first, last). Signs are chosen so the
  // total weight never decreases: an odd-length path gains on both ends,
  // everything else is neutral.
  template <typename It>
  void shift(It first, It last) {
    const std::size_t k = static_cast<std::size_t>(last - first);
    if (k == 0) return;
    const int first_sign = (k % 2 == 1) ? +1 : -1;
    double delta = std::numeric_limits<double>::infinity();
    int sign = first_sign;
    for (It it = first; it != last; ++it, sign = -sign) {
      double wv = w_(it->first, it->second);
      delta = std::min(delta, sign > 0 ? 1.0 - wv : wv);
    }
    if (!(delta > 0.0)) delta = 0.0;
    sign = first_sign;
    for (It it = first; it != last; ++it, sign = -sign) {
      set_weight(it->first, it->second,
                 w_(it->first, it->second) + (sign > 0 ? delta : -delta));
    }
  }

  Matrix w_;
  std::size_t nl_, nr_;
  std::vector<std::set<std::size_t>> left_adj_;
  std::vector<std::set<std::size_t>> right_adj_;
};

}  // namespace

Matching round_fractional_matching(const FractionalMatching& z,
                                   const BipartiteGraph& graph) {
  if (z.weights.rows() != graph.n_left || z.weights.cols() != graph.n_right) {
    throw Error(ErrorCode::DimensionMismatch,
                "weights shape does not match the graph");
  }
  FractionalRounder rounder(z.weights);
  Matrix settled = rounder.run();
  Matching m(graph.n_left, graph.n_right);
  for (std::size_t i = 0; i < graph.n_left; ++i) {
    for (std::size_t j = 0; j < graph.n_right; ++j) {
      if (settled(i, j) >= 0.5 && m.left_match[i] < 0 && m.right_match[j] < 0) {
        m.add(i, j);
      }
    }
  }
  return m;
}

namespace {

// One BFS round: find an augmenting path from free left vertex start, flip
// it, return true on success.
bool bfs_augment(Matching& m, const BipartiteGraph& g, std::size_t start) {
  std::vector<int> parent_right(g.n_right, -1);  // left vertex we came from
  std::vector<bool> left_seen(g.n_left, false);
  std::queue<std::size_t> queue;
  queue.push(start);
  left_seen[start] = true;
  while (!queue.empty()) {
    std::size_t i = queue.front();
    queue.pop();
    for (std::size_t j = 0; j < g.n_right; ++j) {
      if (!g.adj[i][j] || parent_right[j] >= 0) continue;
      parent_right[j] = static_cast<int>(i);
      int k = m.right_match[j];
      if (k < 0) {
        // Flip the alternating path ending at free right vertex j.
        std::size_t jj = j;
        while (true) {
          std::size_t ii = static_cast<std::size_t>(parent_right[jj]);
          int next = m.left_match[ii];
          m.left_match[ii] = static_cast<int>(jj);
          m.right_match[jj] = static_cast<int>(ii);
          if (next < 0) break;
          jj = static_cast<std::size_t>(next);
        }
        ++m.size;
        return true;
      }
      if (!left_seen[static_cast<std::size_t>(k)]) {
        left_seen[static_cast<std::size_t>(k)] = true;
        queue.push(static_cast<std::size_t>(k));
      }
    }
  }
  return false;
}

}  // namespace

std::pair<Matching, long> augment_to_maximum_counted(
    const Matching& m, const BipartiteGraph& graph) {
  Matching out = m;
  long augmentations = 0;
  bool progressed = true;
  while (progressed) {
    progressed = false;
    for (std::size_t i = 0; i < graph.n_left; ++i) {
      if (out.left_match[i] < 0 && bfs_augment(out, graph, i)) {
        ++augmentations;
        progressed = true;
      }
    }
  }
  return {std::move(out), augmentations};
}

Matching augment_to_maximum(const Matching& m, const BipartiteGraph& graph) {
  return augment_to_maximum_counted(m, graph).first;
}

MatchResult max_matching_via_ot(const BipartiteGraph& graph, double eps,
                                SolveMethod method) {
  if (!(eps > 0.0) || eps >= 1.0) {
    throw Error(ErrorCode::InvalidEpsilon,
                "matching pipeline needs 0 < eps < 1");
  }
  MatchResult result;
  if (graph.n_left == 0 || graph.n_right == 0 || graph.edge_count() == 0) {
    result.matching = Matching(graph.n_left, graph.n_right);
    return result;
  }
  TransportInstance inst = matching_to_ot(graph);
  Coupling plan;
  if (method == SolveMethod::packing) {
    std::tie(plan, result.ot_report) = solve_ot_via_packing(inst, eps);
  } else {
    std::tie(plan, result.ot_report) = solve_ot_via_scaling(inst, eps);
  }
  FractionalMatching z = extract_fractional_matching(plan, graph);
  result.fractional_value = z.value;
  Matching rounded = round_fractional_matching(z, graph);
  result.rounded_size = rounded.size;
  std::tie(result.matching, result.augmentations) =
      augment_to_maximum_counted(rounded, graph);
  return result;
}

}  // namespace ot
