#include "ot/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <queue>
#include <string>

namespace ot {

std::size_t default_oracle_cap() {
  if (const char* env = std::getenv("OT_MAX_ORACLE_VARS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return static_cast<std::size_t>(v);
  }
  return 10000;
}

namespace {

constexpr double kPivotTol = 1e-11;

// Transportation network simplex. Nodes 0..n-1 are rows, n..n+m-1 are
// columns; the basis is a spanning tree of n+m-1 cells.
class TransportSimplex {
 public:
  TransportSimplex(const Matrix& cost, const std::vector<double>& supply,
                   const std::vector<double>& demand)
      : cost_(cost),
        n_(supply.size()),
        m_(demand.size()),
        supply_(supply),
        demand_(demand),
        value_(n_ * m_, 0.0),
        in_basis_(n_ * m_, false),
        row_cells_(n_),
        col_cells_(m_),
        u_(n_),
        v_(m_) {}

  Matrix solve() {
    northwest_corner();
    const long max_pivots = 2000 + 200L * static_cast<long>(n_ * m_);
    for (long pivot = 0; pivot < max_pivots; ++pivot) {
      compute_duals();
      auto entering = find_entering();
      if (!entering) break;
      pivot_on(*entering);
      if (pivot + 1 == max_pivots) {
        throw Error(ErrorCode::NotConverged,
                    "network simplex exceeded its pivot budget");
      }
    }
    Matrix plan(n_, m_);
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = 0; j < m_; ++j) {
        double x = value_[i * m_ + j];
        plan(i, j) = x > 0.0 ? x : 0.0;
      }
    }
    return plan;
  }

 private:
  void add_basic(std::size_t i, std::size_t j, double x) {
    in_basis_[i * m_ + j] = true;
    value_[i * m_ + j] = x;
    row_cells_[i].push_back(j);
    col_cells_[j].push_back(i);
  }

  void drop_basic(std::size_t i, std::size_t j) {
    in_basis_[i * m_ + j] = false;
    value_[i * m_ + j] = 0.0;
    auto& rc = row_cells_[i];
    rc.erase(std::find(rc.begin(), rc.end(), j));
    auto& cc = col_cells_[j];
    cc.erase(std::find(cc.begin(), cc.end(), i));
  }

  // Deterministic initial spanning tree; ties deplete the row so exactly
  // n + m - 1 cells enter (degenerate zeros included).
  void northwest_corner() {
    std::size_t i = 0, j = 0;
    double a = supply_[0], b = demand_[0];
    while (true) {
      double x = std::min(a, b);
      add_basic(i, j, x);
      if (i + 1 == n_ && j + 1 == m_) break;
      if ((a <= b && i + 1 < n_) || j + 1 == m_) {
        b -= x;
        ++i;
        a = supply_[i];
      } else {
        a -= x;
        ++j;
        b = demand_[j];
      }
    }
  }

  void compute_duals() {
    std::vector<bool> row_done(n_, false), col_done(m_, false);
    std::queue<std::size_t> queue;  // node ids, rows then columns
    u_[0] = 0.0;
    row_done[0] = true;
    queue.push(0);
    while (!queue.empty()) {
      std::size_t node = queue.front();
      queue.pop();
      if (node < n_) {
        for (std::size_t j : row_cells_[node]) {
          if (!col_done[j]) {
            v_[j] = cost_(node, j) - u_[node];
            col_done[j] = true;
            queue.push(n_ + j);
          }
        }
      } else {
        std::size_t j = node - n_;
        for (std::size_t i : col_cells_[j]) {
          if (!row_done[i]) {
            u_[i] = cost_(i, j) - v_[j];
            row_done[i] = true;
            queue.push(i);
          }
        }
      }
    }
  }

  // Bland: the first (row-major) nonbasic cell with negative reduced cost.
  std::optional<std::pair<std::size_t, std::size_t>> find_entering() const {
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = 0; j < m_; ++j) {
        if (in_basis_[i * m_ + j]) continue;
        if (cost_(i, j) - u_[i] - v_[j] < -kPivotTol) return {{i, j}};
      }
    }
    return std::nullopt;
  }

  void pivot_on(std::pair<std::size_t, std::size_t> entering) {
    auto [p, q] = entering;
    // Unique tree path from row node p to column node q.
    std::vector<int> parent(n_ + m_, -1);
    std::vector<bool> seen(n_ + m_, false);
    std::queue<std::size_t> queue;
    seen[p] = true;
    queue.push(p);
    while (!queue.empty() && !seen[n_ + q]) {
      std::size_t node = queue.front();
      queue.pop();
      if (node < n_) {
        for (std::size_t j : row_cells_[node]) {
          if (!seen[n_ + j]) {
            seen[n_ + j] = true;
            parent[n_ + j] = static_cast<int>(node);
            queue.push(n_ + j);
          }
        }
      } else {
        for (std::size_t i : col_cells_[node - n_]) {
          if (!seen[i]) {
            seen[i] = true;
            parent[i] = static_cast<int>(node);
            queue.push(i);
          }
        }
      }
    }
    // Path cells from the entering row end; odd positions lose mass.
    std::vector<std::pair<std::size_t, std::size_t>> path;
    for (std::size_t node = n_ + q; node != p;) {
      std::size_t prev = static_cast<std::size_t>(parent[node]);
      if (node >= n_) {
        path.emplace_back(prev, node - n_);
      } else {
        path.emplace_back(node, prev - n_);
      }
      node = prev;
    }
    std::reverse(path.begin(), path.end());

    double theta = std::numeric_limits<double>::infinity();
    std::size_t leave_pos = 0;
    for (std::size_t t = 0; t < path.size(); t += 2) {
      double val = value_[path[t].first * m_ + path[t].second];
      std::size_t idx = path[t].first * m_ + path[t].second;
      std::size_t best_idx = path[leave_pos].first * m_ + path[leave_pos].second;
      if (val < theta - kPivotTol ||
          (val < theta + kPivotTol && idx < best_idx)) {
        theta = val;
        leave_pos = t;
      }
    }
    theta = std::max(theta, 0.0);
    for (std::size_t t = 0; t < path.size(); ++t) {
      double& val = value_[path[t].first * m_ + path[t].second];
      val += (t % 2 == 0) ? -theta : theta;
      if (val < 0.0) val = 0.0;
    }
    drop_basic(path[leave_pos].first, path[leave_pos].second);
    add_basic(p, q, theta);
  }

  const Matrix& cost_;
  std::size_t n_, m_;
  std::vector<double> supply_, demand_;
  std::vector<double> value_;
  std::vector<bool> in_basis_;
  std::vector<std::vector<std::size_t>> row_cells_;
  std::vector<std::vector<std::size_t>> col_cells_;
  std::vector<double> u_, v_;
};

}  // namespace

ExactSolution exact_ot(const TransportInstance& inst, std::size_t max_vars) {
  if (inst.rows() * inst.cols() > max_vars) {
    throw Error(ErrorCode::TooLarge,
                "instance has " + std::to_string(inst.rows() * inst.cols()) +
                    " variables, oracle cap is " + std::to_string(max_vars));
  }
  TransportSimplex simplex(inst.cost.entries(), inst.row_marginal.values(),
                           inst.col_marginal.values());
  Coupling plan(simplex.solve());
  ExactSolution sol;
  sol.optimum = transport_cost(inst.cost, plan);
  sol.argmin_plan = std::move(plan);
  sol.method = ExactMethod::network_simplex;
  return sol;
}

namespace {

// Flows of the basic solution for a given spanning tree of cells, by leaf
// elimination. Returns false if any flow is negative beyond tolerance.
bool tree_flows(const std::vector<std::pair<std::size_t, std::size_t>>& cells,
                std::vector<double> supply, std::vector<double> demand,
                std::vector<double>& out) {
  std::size_t n = supply.size(), m = demand.size();
  std::vector<int> degree(n + m, 0);
  for (auto [i, j] : cells) {
    ++degree[i];
    ++degree[n + j];
  }
  std::vector<bool> used(cells.size(), false);
  out.assign(cells.size(), 0.0);
  for (std::size_t round = 0; round < cells.size(); ++round) {
    bool progressed = false;
    for (std::size_t e = 0; e < cells.size(); ++e) {
      if (used[e]) continue;
      auto [i, j] = cells[e];
      bool row_leaf = degree[i] == 1;
      bool col_leaf = degree[n + j] == 1;
      if (!row_leaf && !col_leaf) continue;
      double f = row_leaf ? supply[i] : demand[j];
      if (f < -1e-12) return false;
      f = std::max(f, 0.0);
      out[e] = f;
      supply[i] -= f;
      demand[j] -= f;
      --degree[i];
      --degree[n + j];
      used[e] = true;
      progressed = true;
      break;
    }
    if (!progressed) return false;  // not a tree
  }
  return true;
}

}  // namespace

ExactSolution exact_ot_vertex_enumeration(const TransportInstance& inst,
                                          std::size_t max_vars) {
  std::size_t n = inst.rows(), m = inst.cols();
  if (n * m > max_vars) {
    throw Error(ErrorCode::TooLarge,
                "vertex enumeration is capped at " + std::to_string(max_vars) +
                    " variables");
  }
  std::size_t cells = n * m;
  std::size_t basis_size = n + m - 1;
  std::vector<std::size_t> pick(basis_size);
  std::iota(pick.begin(), pick.end(), 0);

  double best = std::numeric_limits<double>::infinity();
  Matrix best_plan(n, m);
  std::vector<std::pair<std::size_t, std::size_t>> chosen(basis_size);
  std::vector<double> flows;

  while (true) {
    for (std::size_t t = 0; t < basis_size; ++t) {
      chosen[t] = {pick[t] / m, pick[t] % m};
    }
    if (tree_flows(chosen, inst.row_marginal.values(),
                   inst.col_marginal.values(), flows)) {
      double cost = 0.0;
      for (std::size_t t = 0; t < basis_size; ++t) {
        cost += inst.cost(chosen[t].first, chosen[t].second) * flows[t];
      }
      if (cost < best) {
        best = cost;
        best_plan = Matrix(n, m);
        for (std::size_t t = 0; t < basis_size; ++t) {
          best_plan(chosen[t].first, chosen[t].second) += flows[t];
        }
      }
    }
    // next combination
    std::size_t k = basis_size;
    while (k > 0 && pick[k - 1] == cells - basis_size + k - 1) --k;
    if (k == 0) break;
    ++pick[k - 1];
    for (std::size_t t = k; t < basis_size; ++t) pick[t] = pick[t - 1] + 1;
  }
  ExactSolution sol;
  sol.optimum = best;
  sol.argmin_plan = Coupling(std::move(best_plan));
  sol.method = ExactMethod::vertex_enumeration;
  return sol;
}

double packing_value_dense_lp(const PackingLP& lp, std::size_t max_vars) {
  std::size_t l = lp.num_variables();
  std::size_t m2 = lp.num_constraints();
  if (l > max_vars) {
    throw Error(ErrorCode::TooLarge,
                "dense LP fallback is capped at " + std::to_string(max_vars) +
                    " variables");
  }
  // Standard max-tableau simplex; x = 0 is feasible because b >= 0.
  const double eps = 1e-9;
  std::size_t n = lp.rows(), m = lp.cols();
  std::vector<std::vector<double>> tab(m2 + 1, std::vector<double>(l + 1, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) tab[i][i * m + j] = 1.0;
    tab[i][l] = lp.row_capacity[i];
  }
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t i = 0; i < n; ++i) tab[n + j][i * m + j] = 1.0;
    tab[n + j][l] = lp.col_capacity[j];
  }
  for (std::size_t k = 0; k < l; ++k) tab[m2][k] = -lp.objective.data()[k];

  std::vector<long> basis(m2);
  // Slack variables occupy indices l..l+m2-1.
  for (std::size_t r = 0; r < m2; ++r) basis[r] = static_cast<long>(l + r);

  for (long guard = 0; guard < 200000; ++guard) {
    // Bland: lowest-index improving column.
    std::size_t col = l;
    for (std::size_t k = 0; k < l; ++k) {
      if (tab[m2][k] < -eps) {
        col = k;
        break;
      }
    }
    if (col == l) break;
    std::size_t row = m2;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < m2; ++r) {
      if (tab[r][col] > eps) {
        double ratio = tab[r][l] / tab[r][col];
        if (ratio < best_ratio - eps ||
            (ratio < best_ratio + eps &&
             (row == m2 || basis[r] < basis[row]))) {
          best_ratio = ratio;
          row = r;
        }
      }
    }
    if (row == m2) {
      throw Error(ErrorCode::NotConverged, "packing LP is unbounded");
    }
    double piv = tab[row][col];
    for (std::size_t k = 0; k <= l; ++k) tab[row][k] /= piv;
    for (std::size_t r = 0; r <= m2; ++r) {
      if (r == row) continue;
      double f = tab[r][col];
      if (f == 0.0) continue;
      for (std::size_t k = 0; k <= l; ++k) tab[r][k] -= f * tab[row][k];
    }
    basis[row] = static_cast<long>(col);
  }
  return tab[m2][l];
}

ExactSolution exact_packing_value(const PackingLP& lp, std::size_t max_vars) {
  ExactSolution sol;
  bool d_zero = true;
  for (double v : lp.objective.data()) {
    if (v != 0.0) {
      d_zero = false;
      break;
    }
  }
  double row_sum = 0.0, col_sum = 0.0;
  for (double v : lp.row_capacity) row_sum += v;
  for (double v : lp.col_capacity) col_sum += v;
  if (d_zero || (row_sum == 0.0 && col_sum == 0.0)) {
    sol.optimum = 0.0;
    sol.method = ExactMethod::network_simplex;
    return sol;
  }
  if (lp.cost_shift > 0.0 && std::fabs(row_sum - 1.0) < 1e-9 &&
      std::fabs(col_sum - 1.0) < 1e-9) {
    // Objective identity: V_* = |C|_max - OPT for the recovered cost
    // C = |C|_max 11^T - B.
    Matrix cost(lp.rows(), lp.cols());
    for (std::size_t k = 0; k < cost.size(); ++k) {
      cost.data()[k] = std::max(lp.cost_shift - lp.objective.data()[k], 0.0);
    }
    TransportInstance inst =
        validate_instance(CostMatrix(std::move(cost)),
                          Histogram(lp.row_capacity), Histogram(lp.col_capacity));
    ExactSolution ot = exact_ot(inst, max_vars);
    sol.optimum = std::max(lp.cost_shift - ot.optimum, 0.0);
    sol.method = ExactMethod::network_simplex;
    return sol;
  }
  sol.optimum = packing_value_dense_lp(lp);
  sol.method = ExactMethod::vertex_enumeration;
  return sol;
}

namespace {

constexpr int kInfDist = std::numeric_limits<int>::max();

struct HopcroftKarp {
  const BipartiteGraph& g;
  std::vector<int> match_l, match_r, dist;

  explicit HopcroftKarp(const BipartiteGraph& graph)
      : g(graph),
        match_l(graph.n_left, -1),
        match_r(graph.n_right, -1),
        dist(graph.n_left, 0) {}

  bool bfs() {
    std::queue<std::size_t> queue;
    bool reachable_free = false;
    for (std::size_t i = 0; i < g.n_left; ++i) {
      if (match_l[i] < 0) {
        dist[i] = 0;
        queue.push(i);
      } else {
        dist[i] = kInfDist;
      }
    }
    while (!queue.empty()) {
      std::size_t i = queue.front();
      queue.pop();
      for (std::size_t j = 0; j < g.n_right; ++j) {
        if (!g.adj[i][j]) continue;
        int k = match_r[j];
        if (k < 0) {
          reachable_free = true;
        } else if (dist[k] == kInfDist) {
          dist[k] = dist[i] + 1;
          queue.push(static_cast<std::size_t>(k));
        }
      }
    }
    return reachable_free;
  }

  bool dfs(std::size_t i) {
    for (std::size_t j = 0; j < g.n_right; ++j) {
      if (!g.adj[i][j]) continue;
      int k = match_r[j];
      if (k < 0 || (dist[k] == dist[i] + 1 &&
                    dfs(static_cast<std::size_t>(k)))) {
        match_l[i] = static_cast<int>(j);
        match_r[j] = static_cast<int>(i);
        return true;
      }
    }
    dist[i] = kInfDist;
    return false;
  }

  std::size_t run() {
    std::size_t size = 0;
    while (bfs()) {
      for (std::size_t i = 0; i < g.n_left; ++i) {
        if (match_l[i] < 0 && dfs(i)) ++size;
      }
    }
    return size;
  }
};

}  // namespace

ExactSolution hopcroft_karp(const BipartiteGraph& graph) {
  HopcroftKarp hk(graph);
  ExactSolution sol;
  sol.optimum = static_cast<double>(hk.run());
  sol.method = ExactMethod::hopcroft_karp;
  return sol;
}

}  // namespace ot
