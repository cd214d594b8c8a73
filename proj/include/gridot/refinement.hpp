#pragma once

// Multilevel solver: weights, per-cell densities and a sparse transportation
// problem on a pair of grids, refined level by level.

#include <cstddef>
#include <string>
#include <vector>

#include "gridot/geometry.hpp"
#include "gridot/localtransport.hpp"
#include "gridot/lpsolver.hpp"

namespace gridot {

enum class DensityModel { uniform, linear };

struct SolveConfig {
  std::size_t max_levels = 5;
  std::size_t n_min = 10;
  RefinePolicy policy = RefinePolicy::standard;
  bool neighbor_expansion = true;
  DensityModel density_model = DensityModel::linear;
  std::size_t quadrature_order = kDefaultQuadratureOrder;
  SimplexOptions simplex;
  /// Threads used for density fitting and cost evaluation.
  std::size_t workers = 1;

  /// Throws DomainError on out-of-range fields.
  void validate() const;
};

/// One marginal at one level: occupied cells and their product densities,
/// aligned position by position.
struct MarginalLevel {
  WeightedPartition partition;
  std::vector<CellDensity> cells;

  std::size_t size() const noexcept { return cells.size(); }
  std::vector<double> weights() const;
};

/// Cells holding a single sample, and every cell under the uniform model, get
/// uniform factors.
MarginalLevel fit_marginal(const SampleSet& samples, WeightedPartition partition,
                           DensityModel model, std::size_t workers = 1);

struct LevelSolution {
  std::size_t level = 0;
  MarginalLevel source;
  MarginalLevel target;
  SparsityPattern pattern;
  /// One cost per pattern pair.
  std::vector<double> costs;
  CouplingSolution coupling;
  double objective = 0.0;
  std::size_t minimal_size = 0;
  double wall_seconds = 0.0;
};

struct ActivePair {
  CellPair pair;
  double lambda = 0.0;
  CellPairMap map;
};

struct TransportSolution {
  std::vector<LevelSolution> levels;
  /// Pairs of the final level with positive mass, in pattern order.
  std::vector<ActivePair> maps;

  const LevelSolution& final_level() const { return levels.back(); }
};

/// Child cell position -> parent cell position, for each side.
struct ParentMaps {
  std::vector<std::size_t> source;
  std::vector<std::size_t> target;
};

std::vector<std::size_t> parent_positions(const WeightedPartition& coarse, const Refinement& refinement,
                                          const WeightedPartition& fine);

/// Child pairs of every parent pair carrying more than 1e-12 mass.
SparsityPattern minimal_pattern(const LevelSolution& previous, const ParentMaps& parents,
                                std::size_t rows, std::size_t cols);

/// λ_ij = p_i q_j / (P_h Q_k) Λ_hk on `pattern`, zero where the parent pair is
/// absent. Status `feasible`.
CouplingSolution scaled_feasible(const LevelSolution& previous, std::span<const double> p,
                                 std::span<const double> q, const ParentMaps& parents,
                                 const SparsityPattern& pattern);

/// Adds, for every pair (i, j), the pairs (i, j') and (i', j) with j' and i'
/// occupied neighbours of j and i.
SparsityPattern expand_pattern(const SparsityPattern& minimal, const WeightedPartition& source,
                               const WeightedPartition& target);

/// Throws InfeasibleError if a level's pattern admits no coupling.
TransportSolution solve(const SampleSet& source, const SampleSet& target, const SolveConfig& config);

/// One JSON object (single line) describing a level.
/// `with_timing` adds the wall time, which makes the record non-reproducible.
std::string level_record(const LevelSolution& level, bool with_timing = true);

}  // namespace gridot
