#pragma once

// Brute-force references for small transportation problems.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "gridot/lpsolver.hpp"

namespace gridot::testing {

struct DenseInstance {
  std::vector<double> p;
  std::vector<double> q;
  std::vector<double> costs;  // row-major m x n
};

inline std::vector<double> random_simplex(std::mt19937_64& rng, std::size_t k) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  std::vector<double> w(k);
  for (auto& x : w) x = u(rng);
  const double s = std::accumulate(w.begin(), w.end(), 0.0);
  for (auto& x : w) x /= s;
  return w;
}

inline DenseInstance random_instance(std::mt19937_64& rng, std::size_t m, std::size_t n) {
  std::uniform_real_distribution<double> c(0.0, 10.0);
  DenseInstance inst{random_simplex(rng, m), random_simplex(rng, n), std::vector<double>(m * n)};
  for (auto& x : inst.costs) x = c(rng);
  return inst;
}

// Northwest-corner support: always feasible for balanced marginals.
inline std::vector<CellPair> northwest_support(const std::vector<double>& p,
                                               const std::vector<double>& q) {
  std::vector<CellPair> out;
  std::size_t i = 0, j = 0;
  double a = p[0], b = q[0];
  while (i < p.size() && j < q.size()) {
    out.push_back({i, j});
    if (a < b) {
      b -= a;
      if (++i < p.size()) a = p[i];
    } else {
      a -= b;
      if (++j < q.size()) b = q[j];
      else if (++i < p.size()) a = p[i], j = q.size() - 1;
    }
  }
  return out;
}

// Minimum cost over all basic feasible solutions: every spanning tree of the
// complete bipartite graph, with flows solved by leaf elimination.
inline double enumerate_vertices(const std::vector<double>& p, const std::vector<double>& q,
                                 const std::vector<double>& costs, std::size_t m, std::size_t n) {
  const std::size_t arcs = m * n;
  const std::size_t need = m + n - 1;
  double best = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> pick(need);
  std::iota(pick.begin(), pick.end(), 0);
  while (true) {
    // Acyclic with m+n-1 edges means spanning tree.
    std::vector<std::size_t> parent(m + n);
    std::iota(parent.begin(), parent.end(), 0);
    auto root = [&](std::size_t v) {
      while (parent[v] != v) v = parent[v] = parent[parent[v]];
      return v;
    };
    bool tree = true;
    for (const auto a : pick) {
      const auto r1 = root(a / n), r2 = root(m + a % n);
      if (r1 == r2) {
        tree = false;
        break;
      }
      parent[r1] = r2;
    }
    if (tree) {
      std::vector<double> rest(m + n);
      for (std::size_t i = 0; i < m; ++i) rest[i] = p[i];
      for (std::size_t j = 0; j < n; ++j) rest[m + j] = q[j];
      std::vector<int> degree(m + n, 0);
      std::vector<char> used(need, 0);
      for (const auto a : pick) ++degree[a / n], ++degree[m + a % n];
      bool ok = true;
      double cost = 0.0;
      for (std::size_t step = 0; step < need; ++step) {
        // Find an unused arc with a leaf endpoint.
        std::size_t k = 0;
        std::size_t leaf = 0;
        for (; k < need; ++k) {
          if (used[k]) continue;
          const std::size_t u = pick[k] / n, v = m + pick[k] % n;
          if (degree[u] == 1) { leaf = u; break; }
          if (degree[v] == 1) { leaf = v; break; }
        }
        const std::size_t u = pick[k] / n, v = m + pick[k] % n;
        const std::size_t other = leaf == u ? v : u;
        const double f = rest[leaf];
        if (f < -1e-12) ok = false;
        cost += f * costs[pick[k]];
        rest[other] -= f;
        rest[leaf] = 0.0;
        used[k] = 1;
        --degree[u];
        --degree[v];
      }
      if (ok) best = std::min(best, cost);
    }
    // Next combination.
    std::size_t k = need;
    while (k > 0 && pick[k - 1] == arcs - need + k - 1) --k;
    if (k == 0) break;
    ++pick[k - 1];
    for (std::size_t t = k; t < need; ++t) pick[t] = pick[t - 1] + 1;
  }
  return best;
}

}  // namespace gridot::testing
