#pragma once

// Transportation linear programs restricted to a sparse set of admissible
// (source, target) pairs:
//
//   minimise  sum C_ij x_ij   subject to  sum_j x_ij = p_i,  sum_i x_ij = q_j,  x >= 0,
//
// with x_ij forced to zero outside the pattern. Solved by a primal network
// simplex on the bipartite graph plus an artificial root.

#include <compare>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace gridot {

struct CellPair {
  std::size_t source = 0;
  std::size_t target = 0;
  friend auto operator<=>(const CellPair&, const CellPair&) = default;
};

/// Admissible pairs, sorted by (source, target) without duplicates, with
/// per-row and per-column adjacency into that order.
class SparsityPattern {
 public:
  SparsityPattern(std::size_t rows, std::size_t cols, std::vector<CellPair> pairs);
  static SparsityPattern dense(std::size_t rows, std::size_t cols);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return pairs_.size(); }
  const std::vector<CellPair>& pairs() const noexcept { return pairs_; }
  const CellPair& operator[](std::size_t k) const { return pairs_[k]; }

  /// Positions (into pairs()) of the pairs in row i / column j.
  std::span<const std::size_t> row_pairs(std::size_t i) const;
  std::span<const std::size_t> col_pairs(std::size_t j) const;

  std::optional<std::size_t> find(CellPair pair) const;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<CellPair> pairs_;
  std::vector<std::size_t> row_start_;
  std::vector<std::size_t> col_start_;
  std::vector<std::size_t> row_index_;
  std::vector<std::size_t> col_index_;
};

struct TransportationProblem {
  std::vector<double> row_weights;
  std::vector<double> col_weights;
  /// One cost per pattern pair, in pattern order.
  std::vector<double> costs;
};

enum class SolveStatus { optimal, feasible, infeasible };

struct CouplingSolution {
  /// One value per pattern pair, in pattern order.
  std::vector<double> values;
  double objective = 0.0;
  SolveStatus status = SolveStatus::infeasible;
  std::size_t pivots = 0;
  bool warm_started = false;
};

struct SimplexOptions {
  double feasibility_tol = 1e-9;
  double optimality_tol = 1e-10;
  /// Per-row supply perturbation; the last column absorbs rows * perturbation.
  double perturbation = 1e-12;
  /// Artificial flow above this marks the pattern infeasible.
  double artificial_tol = 1e-10;
  /// 0 selects a limit proportional to the problem size.
  std::size_t max_pivots = 0;
  /// When set, the final basis tree is written here.
  std::ostream* basis_dump = nullptr;
};

/// x_ij = p_i q_j / sum(p) on the dense pattern (row-major); status `feasible`.
CouplingSolution product_feasible(std::span<const double> p, std::span<const double> q);

/// Optimal basic solution on the pattern. `warm_start`, when non-empty, is a
/// feasible coupling on the same pattern used to seed the initial basis.
CouplingSolution solve_transportation(const TransportationProblem& problem,
                                      const SparsityPattern& pattern,
                                      const SimplexOptions& options = {},
                                      std::span<const double> warm_start = {});

/// True iff some nonnegative coupling on the pattern has marginals p and q
/// (max-flow, independent of the simplex).
bool check_feasible(std::span<const double> p, std::span<const double> q,
                    const SparsityPattern& pattern, double tol = 1e-10);

/// Largest absolute row/column sum violation of `values` on the pattern.
double max_marginal_violation(std::span<const double> p, std::span<const double> q,
                              const SparsityPattern& pattern, std::span<const double> values);

double coupling_objective(std::span<const double> costs, std::span<const double> values);

}  // namespace gridot
