#include "gridot/lpsolver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <queue>
#include <stdexcept>

#include "gridot/errors.hpp"
#include "gridot/io.hpp"

namespace gridot {

SparsityPattern::SparsityPattern(std::size_t rows, std::size_t cols, std::vector<CellPair> pairs)
    : rows_(rows), cols_(cols), pairs_(std::move(pairs)) {
  std::sort(pairs_.begin(), pairs_.end());
  pairs_.erase(std::unique(pairs_.begin(), pairs_.end()), pairs_.end());
  row_start_.assign(rows_ + 1, 0);
  col_start_.assign(cols_ + 1, 0);
  for (const auto& p : pairs_) {
    if (p.source >= rows_ || p.target >= cols_) throw DomainError("pattern pair out of range");
    ++row_start_[p.source + 1];
    ++col_start_[p.target + 1];
  }
  std::partial_sum(row_start_.begin(), row_start_.end(), row_start_.begin());
  std::partial_sum(col_start_.begin(), col_start_.end(), col_start_.begin());
  row_index_.resize(pairs_.size());
  std::iota(row_index_.begin(), row_index_.end(), std::size_t{0});
  col_index_.resize(pairs_.size());
  auto fill = col_start_;
  for (std::size_t k = 0; k < pairs_.size(); ++k) col_index_[fill[pairs_[k].target]++] = k;
}

SparsityPattern SparsityPattern::dense(std::size_t rows, std::size_t cols) {
  std::vector<CellPair> pairs;
  pairs.reserve(rows * cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) pairs.push_back({i, j});
  }
  return SparsityPattern(rows, cols, std::move(pairs));
}

std::span<const std::size_t> SparsityPattern::row_pairs(std::size_t i) const {
  // Pairs are sorted by source, so a row's positions are a contiguous range.
  return {row_index_.data() + row_start_[i], row_start_[i + 1] - row_start_[i]};
}

std::span<const std::size_t> SparsityPattern::col_pairs(std::size_t j) const {
  return {col_index_.data() + col_start_[j], col_start_[j + 1] - col_start_[j]};
}

std::optional<std::size_t> SparsityPattern::find(CellPair pair) const {
  const auto it = std::lower_bound(pairs_.begin(), pairs_.end(), pair);
  if (it == pairs_.end() || *it != pair) return std::nullopt;
  return static_cast<std::size_t>(it - pairs_.begin());
}

double max_marginal_violation(std::span<const double> p, std::span<const double> q,
                              const SparsityPattern& pattern, std::span<const double> values) {
  std::vector<double> rows(p.size(), 0.0);
  std::vector<double> cols(q.size(), 0.0);
  for (std::size_t k = 0; k < pattern.size(); ++k) {
    rows[pattern[k].source] += values[k];
    cols[pattern[k].target] += values[k];
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) worst = std::max(worst, std::abs(rows[i] - p[i]));
  for (std::size_t j = 0; j < q.size(); ++j) worst = std::max(worst, std::abs(cols[j] - q[j]));
  return worst;
}

double coupling_objective(std::span<const double> costs, std::span<const double> values) {
  double sum = 0.0;
  for (std::size_t k = 0; k < costs.size(); ++k) sum += costs[k] * values[k];
  return sum;
}

CouplingSolution product_feasible(std::span<const double> p, std::span<const double> q) {
  const double total = std::accumulate(p.begin(), p.end(), 0.0);
  if (!(total > 0.0)) throw DomainError("product coupling needs positive total mass");
  CouplingSolution sol;
  sol.values.reserve(p.size() * q.size());
  for (const double pi : p) {
    for (const double qj : q) sol.values.push_back(pi * qj / total);
  }
  sol.status = SolveStatus::feasible;
  return sol;
}

namespace {

constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

// Primal network simplex on rows -> columns with an artificial root. Nodes
// 0..m-1 are rows, m..m+n-1 columns, m+n the root. Arcs 0..A-1 mirror the
// pattern; arc A+v is node v's artificial arc (row -> root, root -> column).
// The basis is rebuilt from scratch after every pivot: potentials and flows
// are recomputed from the tree, so no error accumulates across pivots.
class NetworkSimplex {
 public:
  NetworkSimplex(const TransportationProblem& problem, const SparsityPattern& pattern,
                 const SimplexOptions& options)
      : options_(options),
        rows_(pattern.rows()),
        nodes_(pattern.rows() + pattern.cols()),
        root_(nodes_),
        real_arcs_(pattern.size()) {
    const std::size_t arcs = real_arcs_ + nodes_;
    tail_.resize(arcs);
    head_.resize(arcs);
    cost_.resize(arcs);
    double max_cost = 0.0;
    for (std::size_t k = 0; k < real_arcs_; ++k) {
      tail_[k] = pattern[k].source;
      head_[k] = rows_ + pattern[k].target;
      cost_[k] = problem.costs[k];
      max_cost = std::max(max_cost, std::abs(cost_[k]));
    }
    const double big = (max_cost + 1.0) * static_cast<double>(nodes_ + 1);
    for (std::size_t v = 0; v < nodes_; ++v) {
      const std::size_t a = real_arcs_ + v;
      tail_[a] = v < rows_ ? v : root_;
      head_[a] = v < rows_ ? root_ : v;
      cost_[a] = big;
    }

    exact_supply_.assign(nodes_ + 1, 0.0);
    for (std::size_t i = 0; i < rows_; ++i) exact_supply_[i] = problem.row_weights[i];
    for (std::size_t j = 0; j < pattern.cols(); ++j) exact_supply_[rows_ + j] = -problem.col_weights[j];
    perturbed_supply_ = exact_supply_;
    if (pattern.cols() > 0) {
      for (std::size_t i = 0; i < rows_; ++i) perturbed_supply_[i] += options_.perturbation;
      perturbed_supply_[nodes_ - 1] -= options_.perturbation * static_cast<double>(rows_);
    }
    balance_root(exact_supply_);
    balance_root(perturbed_supply_);

    in_tree_.assign(arcs, 0);
    slot_.assign(arcs, kNone);
    flow_.assign(arcs, 0.0);
    parent_.resize(nodes_ + 1);
    parent_arc_.resize(nodes_ + 1);
    depth_.resize(nodes_ + 1);
    pi_.resize(nodes_ + 1);
  }

  void cold_start() {
    std::fill(in_tree_.begin(), in_tree_.end(), 0);
    std::fill(slot_.begin(), slot_.end(), kNone);
    tree_.clear();
    for (std::size_t v = 0; v < nodes_; ++v) add_tree_arc(real_arcs_ + v);
    rebuild();
    compute_flows(perturbed_supply_);
  }

  // Cycle-cancels the support of `values` down to a forest without raising
  // its cost, then closes the forest into a basis with artificial arcs.
  bool warm_start(std::span<const double> values) {
    std::vector<double> x(values.begin(), values.end());
    std::vector<std::vector<std::size_t>> adj(nodes_);
    std::vector<char> in_forest(real_arcs_, 0);
    std::vector<std::size_t> pred_arc(nodes_, kNone);
    std::vector<std::size_t> seen(nodes_, kNone);
    std::vector<std::size_t> queue;

    auto erase_adj = [&](std::size_t a) {
      for (const std::size_t v : {tail_[a], head_[a]}) {
        auto& list = adj[v];
        list.erase(std::find(list.begin(), list.end(), a));
      }
      in_forest[a] = 0;
    };

    for (std::size_t a = 0; a < real_arcs_; ++a) {
      if (!(x[a] > 0.0)) {
        x[a] = 0.0;
        continue;
      }
      const std::size_t u = tail_[a];
      const std::size_t w = head_[a];
      // Forest path from w to u, if any.
      queue.assign(1, w);
      seen[w] = a;
      pred_arc[w] = kNone;
      bool found = false;
      for (std::size_t qi = 0; qi < queue.size() && !found; ++qi) {
        const std::size_t v = queue[qi];
        for (const std::size_t b : adj[v]) {
          const std::size_t o = tail_[b] == v ? head_[b] : tail_[b];
          if (seen[o] == a) continue;
          seen[o] = a;
          pred_arc[o] = b;
          if (o == u) {
            found = true;
            break;
          }
          queue.push_back(o);
        }
      }
      if (!found) {
        adj[u].push_back(a);
        adj[w].push_back(a);
        in_forest[a] = 1;
        continue;
      }
      // Walk u back to w; orientation of the cycle is a (u -> w) then w ~> u.
      std::vector<std::pair<std::size_t, bool>> path;  // (arc, forward along the cycle)
      double cycle_cost = cost_[a];
      for (std::size_t v = u; v != w;) {
        const std::size_t b = pred_arc[v];
        const std::size_t prev = tail_[b] == v ? head_[b] : tail_[b];
        const bool forward = head_[b] == v;  // traversed prev -> v
        path.emplace_back(b, forward);
        cycle_cost += forward ? cost_[b] : -cost_[b];
        v = prev;
      }
      const bool push_forward = cycle_cost <= 0.0;
      double theta = push_forward ? std::numeric_limits<double>::infinity() : x[a];
      for (const auto& [b, forward] : path) {
        if (forward != push_forward) theta = std::min(theta, x[b]);
      }
      x[a] += push_forward ? theta : -theta;
      for (const auto& [b, forward] : path) {
        x[b] += forward == push_forward ? theta : -theta;
        if (x[b] <= 0.0) {
          x[b] = 0.0;
          erase_adj(b);
        }
      }
      if (x[a] > 0.0) {
        // The cycle lost at least one arc, so adding a keeps the forest acyclic.
        adj[u].push_back(a);
        adj[w].push_back(a);
        in_forest[a] = 1;
      } else {
        x[a] = 0.0;
      }
    }

    std::fill(in_tree_.begin(), in_tree_.end(), 0);
    std::fill(slot_.begin(), slot_.end(), kNone);
    tree_.clear();
    for (std::size_t a = 0; a < real_arcs_; ++a) {
      if (in_forest[a]) add_tree_arc(a);
    }
    // One artificial arc per forest component, oriented by its net supply.
    std::vector<std::size_t> component(nodes_, kNone);
    for (std::size_t s = 0; s < nodes_; ++s) {
      if (component[s] != kNone) continue;
      queue.assign(1, s);
      component[s] = s;
      double net = 0.0;
      std::size_t first_row = kNone;
      std::size_t first_col = kNone;
      for (std::size_t qi = 0; qi < queue.size(); ++qi) {
        const std::size_t v = queue[qi];
        net += perturbed_supply_[v];
        if (v < rows_) first_row = std::min(first_row, v);
        else first_col = std::min(first_col, v);
        for (const std::size_t b : adj[v]) {
          const std::size_t o = tail_[b] == v ? head_[b] : tail_[b];
          if (component[o] == kNone) {
            component[o] = s;
            queue.push_back(o);
          }
        }
      }
      std::size_t rep = net >= 0.0 ? first_row : first_col;
      if (rep == kNone) rep = net >= 0.0 ? first_col : first_row;
      add_tree_arc(real_arcs_ + rep);
    }
    if (tree_.size() != nodes_) return false;
    rebuild();
    compute_flows(perturbed_supply_);
    for (const std::size_t a : tree_) {
      if (flow_[a] < 0.0) return false;
    }
    return true;
  }

  void run() {
    const std::size_t limit =
        options_.max_pivots ? options_.max_pivots : 50 * (tail_.size() + nodes_) + 1000;
    std::vector<std::size_t> up_u;
    std::vector<std::size_t> up_w;
    while (true) {
      // Dantzig pricing: most negative reduced cost, lowest index on ties.
      double best = -options_.optimality_tol;
      std::size_t enter = kNone;
      for (std::size_t a = 0; a < tail_.size(); ++a) {
        if (in_tree_[a]) continue;
        const double rc = cost_[a] + pi_[tail_[a]] - pi_[head_[a]];
        if (rc < best) {
          best = rc;
          enter = a;
        }
      }
      if (enter == kNone) break;
      if (++pivots_ > limit) throw std::runtime_error("transportation simplex exceeded pivot limit");

      std::size_t x = tail_[enter];
      std::size_t y = head_[enter];
      up_u.clear();
      up_w.clear();
      while (depth_[x] > depth_[y]) {
        up_u.push_back(x);
        x = parent_[x];
      }
      while (depth_[y] > depth_[x]) {
        up_w.push_back(y);
        y = parent_[y];
      }
      while (x != y) {
        up_u.push_back(x);
        up_w.push_back(y);
        x = parent_[x];
        y = parent_[y];
      }
      // Cycle order from the apex: down to the tail, the entering arc, up from
      // the head. The last blocking arc in that order leaves.
      double theta = std::numeric_limits<double>::infinity();
      std::size_t leave = kNone;
      auto consider = [&](std::size_t arc) {
        const double f = std::max(0.0, flow_[arc]);
        if (f <= theta) {
          theta = f;
          leave = arc;
        }
      };
      for (std::size_t k = up_u.size(); k-- > 0;) {
        const std::size_t a = parent_arc_[up_u[k]];
        if (tail_[a] == up_u[k]) consider(a);
      }
      for (const std::size_t z : up_w) {
        const std::size_t a = parent_arc_[z];
        if (head_[a] == z) consider(a);
      }
      if (leave == kNone) throw std::logic_error("unbounded transportation problem");

      const std::size_t s = slot_[leave];
      tree_[s] = enter;
      slot_[enter] = s;
      slot_[leave] = kNone;
      in_tree_[leave] = 0;
      in_tree_[enter] = 1;
      flow_[leave] = 0.0;
      rebuild();
      compute_flows(perturbed_supply_);
    }
  }

  CouplingSolution result(const TransportationProblem& problem, bool warm) {
    compute_flows(exact_supply_);
    CouplingSolution sol;
    sol.pivots = pivots_;
    sol.warm_started = warm;
    double artificial = 0.0;
    for (std::size_t v = 0; v < nodes_; ++v) {
      const std::size_t a = real_arcs_ + v;
      if (in_tree_[a]) artificial += std::max(0.0, flow_[a]);
    }
    sol.values.assign(real_arcs_, 0.0);
    for (std::size_t a = 0; a < real_arcs_; ++a) {
      if (in_tree_[a]) sol.values[a] = std::max(0.0, flow_[a]);
    }
    sol.objective = coupling_objective(problem.costs, sol.values);
    sol.status = artificial > options_.artificial_tol ? SolveStatus::infeasible : SolveStatus::optimal;
    if (options_.basis_dump) dump(*options_.basis_dump);
    return sol;
  }

 private:
  void balance_root(std::vector<double>& supply) const {
    double sum = 0.0;
    for (std::size_t v = 0; v < nodes_; ++v) sum += supply[v];
    supply[root_] = -sum;
  }

  void add_tree_arc(std::size_t a) {
    in_tree_[a] = 1;
    slot_[a] = tree_.size();
    tree_.push_back(a);
  }

  void rebuild() {
    const std::size_t total = nodes_ + 1;
    adj_start_.assign(total + 1, 0);
    for (const std::size_t a : tree_) {
      ++adj_start_[tail_[a] + 1];
      ++adj_start_[head_[a] + 1];
    }
    std::partial_sum(adj_start_.begin(), adj_start_.end(), adj_start_.begin());
    adj_.resize(2 * tree_.size());
    fill_ = adj_start_;
    for (const std::size_t a : tree_) {
      adj_[fill_[tail_[a]]++] = a;
      adj_[fill_[head_[a]]++] = a;
    }
    order_.clear();
    order_.push_back(root_);
    std::fill(parent_.begin(), parent_.end(), kNone);
    parent_[root_] = root_;
    parent_arc_[root_] = kNone;
    depth_[root_] = 0;
    pi_[root_] = 0.0;
    for (std::size_t k = 0; k < order_.size(); ++k) {
      const std::size_t v = order_[k];
      for (std::size_t e = adj_start_[v]; e < adj_start_[v + 1]; ++e) {
        const std::size_t a = adj_[e];
        const std::size_t o = tail_[a] == v ? head_[a] : tail_[a];
        if (parent_[o] != kNone) continue;
        parent_[o] = v;
        parent_arc_[o] = a;
        depth_[o] = depth_[v] + 1;
        pi_[o] = tail_[a] == v ? pi_[v] + cost_[a] : pi_[v] - cost_[a];
        order_.push_back(o);
      }
    }
    if (order_.size() != total) throw std::logic_error("simplex basis is not a spanning tree");
  }

  void compute_flows(const std::vector<double>& supply) {
    net_ = supply;
    for (std::size_t k = order_.size(); k-- > 1;) {
      const std::size_t v = order_[k];
      const std::size_t a = parent_arc_[v];
      flow_[a] = tail_[a] == v ? net_[v] : -net_[v];
      net_[parent_[v]] += net_[v];
    }
  }

  void dump(std::ostream& out) const {
    out << "# basis tree: arc tail head flow (tail/head: r<i>, c<j>, root)\n";
    auto name = [&](std::size_t v) {
      if (v == root_) return std::string("root");
      return v < rows_ ? "r" + std::to_string(v) : "c" + std::to_string(v - rows_);
    };
    for (const std::size_t a : tree_) {
      out << a << ' ' << name(tail_[a]) << ' ' << name(head_[a]) << ' ' << format_double(flow_[a])
          << '\n';
    }
  }

  SimplexOptions options_;
  std::size_t rows_;
  std::size_t nodes_;
  std::size_t root_;
  std::size_t real_arcs_;
  std::vector<std::size_t> tail_, head_;
  std::vector<double> cost_;
  std::vector<double> exact_supply_, perturbed_supply_;

  std::vector<std::size_t> tree_;
  std::vector<char> in_tree_;
  std::vector<std::size_t> slot_;
  std::vector<double> flow_;
  std::vector<std::size_t> parent_, parent_arc_, depth_, order_;
  std::vector<double> pi_, net_;
  std::vector<std::size_t> adj_start_, adj_, fill_;
  std::size_t pivots_ = 0;
};

}  // namespace

CouplingSolution solve_transportation(const TransportationProblem& problem,
                                      const SparsityPattern& pattern, const SimplexOptions& options,
                                      std::span<const double> warm_start) {
  if (problem.row_weights.size() != pattern.rows() || problem.col_weights.size() != pattern.cols() ||
      problem.costs.size() != pattern.size()) {
    throw DomainError("transportation problem does not match its pattern");
  }
  for (const double c : problem.costs) {
    if (!std::isfinite(c)) throw DomainError("transportation costs must be finite");
  }
  const double p_total = std::accumulate(problem.row_weights.begin(), problem.row_weights.end(), 0.0);
  const double q_total = std::accumulate(problem.col_weights.begin(), problem.col_weights.end(), 0.0);
  if (std::abs(p_total - q_total) > 1e-12 * std::max(1.0, p_total)) {
    throw DomainError("row and column weights are not balanced");
  }

  CouplingSolution infeasible;
  infeasible.values.assign(pattern.size(), 0.0);
  infeasible.status = SolveStatus::infeasible;
  for (std::size_t i = 0; i < pattern.rows(); ++i) {
    if (problem.row_weights[i] > 0.0 && pattern.row_pairs(i).empty()) return infeasible;
  }
  for (std::size_t j = 0; j < pattern.cols(); ++j) {
    if (problem.col_weights[j] > 0.0 && pattern.col_pairs(j).empty()) return infeasible;
  }

  NetworkSimplex simplex(problem, pattern, options);
  bool warm = false;
  if (!warm_start.empty()) {
    if (warm_start.size() != pattern.size()) throw DomainError("warm start does not match the pattern");
    warm = simplex.warm_start(warm_start);
  }
  if (!warm) simplex.cold_start();
  simplex.run();
  return simplex.result(problem, warm);
}

namespace {

// Dinic max-flow with real capacities.
class MaxFlow {
 public:
  explicit MaxFlow(std::size_t nodes) : adj_(nodes), level_(nodes), next_(nodes) {}

  void add_edge(std::size_t u, std::size_t v, double cap) {
    adj_[u].push_back(edges_.size());
    edges_.push_back({v, cap});
    adj_[v].push_back(edges_.size());
    edges_.push_back({u, 0.0});
  }

  double run(std::size_t s, std::size_t t, double eps) {
    double total = 0.0;
    while (bfs(s, t, eps)) {
      std::fill(next_.begin(), next_.end(), 0);
      while (true) {
        const double pushed = dfs(s, t, std::numeric_limits<double>::infinity(), eps);
        if (pushed <= eps) break;
        total += pushed;
      }
    }
    return total;
  }

 private:
  struct Edge {
    std::size_t to;
    double cap;
  };

  bool bfs(std::size_t s, std::size_t t, double eps) {
    std::fill(level_.begin(), level_.end(), -1);
    std::queue<std::size_t> q;
    level_[s] = 0;
    q.push(s);
    while (!q.empty()) {
      const std::size_t v = q.front();
      q.pop();
      for (const std::size_t e : adj_[v]) {
        if (edges_[e].cap > eps && level_[edges_[e].to] < 0) {
          level_[edges_[e].to] = level_[v] + 1;
          q.push(edges_[e].to);
        }
      }
    }
    return level_[t] >= 0;
  }

  double dfs(std::size_t v, std::size_t t, double limit, double eps) {
    if (v == t) return limit;
    for (auto& i = next_[v]; i < adj_[v].size(); ++i) {
      const std::size_t e = adj_[v][i];
      const std::size_t to = edges_[e].to;
      if (edges_[e].cap <= eps || level_[to] != level_[v] + 1) continue;
      const double got = dfs(to, t, std::min(limit, edges_[e].cap), eps);
      if (got > eps) {
        edges_[e].cap -= got;
        edges_[e ^ 1].cap += got;
        return got;
      }
    }
    return 0.0;
  }

  std::vector<std::vector<std::size_t>> adj_;
  std::vector<Edge> edges_;
  std::vector<int> level_;
  std::vector<std::size_t> next_;
};

}  // namespace

bool check_feasible(std::span<const double> p, std::span<const double> q,
                    const SparsityPattern& pattern, double tol) {
  const std::size_t m = p.size();
  const std::size_t n = q.size();
  const std::size_t s = m + n;
  const std::size_t t = s + 1;
  MaxFlow flow(m + n + 2);
  double total = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    flow.add_edge(s, i, p[i]);
    total += p[i];
  }
  for (std::size_t j = 0; j < n; ++j) flow.add_edge(m + j, t, q[j]);
  for (const auto& pr : pattern.pairs()) flow.add_edge(pr.source, m + pr.target, total);
  return flow.run(s, t, 1e-15) >= total - tol;
}

}  // namespace gridot
