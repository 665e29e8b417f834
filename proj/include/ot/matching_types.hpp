#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "ot/matrix.hpp"

namespace ot {

// Undirected bipartite graph with dense adjacency rows. Left vertices are
// 0..n_left-1, right vertices 0..n_right-1 in their own index space.
struct BipartiteGraph {
  std::size_t n_left = 0;
  std::size_t n_right = 0;
  std::vector<std::vector<bool>> adj;  // adj[i][j] == true iff edge (i, j)

  BipartiteGraph() = default;
  BipartiteGraph(std::size_t nl, std::size_t nr)
      : n_left(nl), n_right(nr), adj(nl, std::vector<bool>(nr, false)) {}

  void add_edge(std::size_t i, std::size_t j) { adj[i][j] = true; }
  bool has_edge(std::size_t i, std::size_t j) const { return adj[i][j]; }
  std::size_t edge_count() const;
};

// Integral matching: left vertex i is matched to left_match[i], or -1.
struct Matching {
  std::vector<int> left_match;
  std::vector<int> right_match;
  std::size_t size = 0;

  Matching() = default;
  Matching(std::size_t nl, std::size_t nr)
      : left_match(nl, -1), right_match(nr, -1) {}

  void add(std::size_t i, std::size_t j) {
    left_match[i] = static_cast<int>(j);
    right_match[j] = static_cast<int>(i);
    ++size;
  }
  std::vector<std::pair<std::size_t, std::size_t>> edges() const;
};

// Edge weights with all vertex loads <= 1, supported on graph edges.
struct FractionalMatching {
  Matrix weights;
  double value = 0.0;
};

}  // namespace ot
