#include "gridot/refinement.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include "gridot/errors.hpp"
#include "gridot/parallel.hpp"
#include "json.hpp"

namespace gridot {

namespace {

constexpr double kActiveMass = 1e-12;

std::vector<std::size_t> segments_per_axis(const Grid& grid) {
  std::vector<std::size_t> out;
  for (const auto& a : grid.axes()) out.push_back(a.segments());
  return out;
}

// Occupied neighbours of every occupied cell, as positions.
std::vector<std::vector<std::size_t>> occupied_neighbors(const WeightedPartition& part) {
  std::vector<std::vector<std::size_t>> out(part.size());
  for (std::size_t i = 0; i < part.size(); ++i) {
    for (const auto& nb : cell_neighbors(part.grid(), part[i].index)) {
      if (const auto pos = part.find(nb)) out[i].push_back(*pos);
    }
  }
  return out;
}

std::vector<double> pattern_costs(const SparsityPattern& pattern, const MarginalLevel& source,
                                  const MarginalLevel& target, const SolveConfig& config) {
  std::vector<double> costs(pattern.size());
  parallel_for(pattern.size(), config.workers, [&](std::size_t k) {
    const auto& pr = pattern[k];
    costs[k] = cell_pair_cost(source.cells[pr.source], target.cells[pr.target], config.quadrature_order);
  });
  return costs;
}

std::string infeasible_report(const LevelSolution& level) {
  std::ostringstream out;
  out << "level " << level.level << ": restricted transportation problem is infeasible ("
      << level.source.size() << " x " << level.target.size() << " cells, " << level.pattern.size()
      << " admissible pairs";
  std::size_t bare_rows = 0, bare_cols = 0;
  for (std::size_t i = 0; i < level.pattern.rows(); ++i) bare_rows += level.pattern.row_pairs(i).empty();
  for (std::size_t j = 0; j < level.pattern.cols(); ++j) bare_cols += level.pattern.col_pairs(j).empty();
  out << ", " << bare_rows << " source and " << bare_cols << " target cells without pairs)";
  return out.str();
}

}  // namespace

void SolveConfig::validate() const {
  if (max_levels < 1) throw DomainError("max_levels must be at least 1");
  if (n_min < 1) throw DomainError("n_min must be at least 1");
  if (quadrature_order < 1) throw DomainError("quadrature_order must be at least 1");
  if (workers < 1) throw DomainError("workers must be at least 1");
}

std::vector<double> MarginalLevel::weights() const {
  std::vector<double> w;
  w.reserve(cells.size());
  for (const auto& c : cells) w.push_back(c.weight);
  return w;
}

MarginalLevel fit_marginal(const SampleSet& samples, WeightedPartition partition, DensityModel model,
                           std::size_t workers) {
  const Grid& grid = partition.grid();
  std::vector<CellDensity> cells(partition.size());
  parallel_for(partition.size(), workers, [&](std::size_t pos) {
    const auto& occ = partition[pos];
    CellDensity& cell = cells[pos];
    cell.cell = occ.index;
    cell.weight = occ.weight;
    std::vector<double> values(occ.members.size());
    for (std::size_t l = 0; l < grid.dim(); ++l) {
      const auto& axis = grid.axis(l);
      const double left = axis.left(occ.index.coords[l]);
      const double right = axis.right(occ.index.coords[l]);
      if (model == DensityModel::uniform || occ.members.size() < 2) {
        cell.factors.push_back(LinearDensity1D::uniform(left, right));
        continue;
      }
      for (std::size_t k = 0; k < occ.members.size(); ++k) values[k] = samples.coord(occ.members[k], l);
      cell.factors.push_back(fit_linear_density(values, left, right).density);
    }
  });
  return {std::move(partition), std::move(cells)};
}

std::vector<std::size_t> parent_positions(const WeightedPartition& coarse, const Refinement& refinement,
                                          const WeightedPartition& fine) {
  std::vector<std::size_t> out(fine.size());
  for (std::size_t i = 0; i < fine.size(); ++i) {
    const auto pos = coarse.find(refinement.parent_of(fine[i].index));
    if (!pos) throw std::logic_error("occupied child cell has an unoccupied parent");
    out[i] = *pos;
  }
  return out;
}

SparsityPattern minimal_pattern(const LevelSolution& previous, const ParentMaps& parents,
                                std::size_t rows, std::size_t cols) {
  std::vector<std::vector<std::size_t>> src_children(previous.source.size());
  std::vector<std::vector<std::size_t>> tgt_children(previous.target.size());
  for (std::size_t i = 0; i < parents.source.size(); ++i) src_children[parents.source[i]].push_back(i);
  for (std::size_t j = 0; j < parents.target.size(); ++j) tgt_children[parents.target[j]].push_back(j);

  std::vector<CellPair> pairs;
  const auto& values = previous.coupling.values;
  for (std::size_t k = 0; k < previous.pattern.size(); ++k) {
    if (values[k] <= kActiveMass) continue;
    const auto& pr = previous.pattern[k];
    for (const auto i : src_children[pr.source]) {
      for (const auto j : tgt_children[pr.target]) pairs.push_back({i, j});
    }
  }
  return SparsityPattern(rows, cols, std::move(pairs));
}

CouplingSolution scaled_feasible(const LevelSolution& previous, std::span<const double> p,
                                 std::span<const double> q, const ParentMaps& parents,
                                 const SparsityPattern& pattern) {
  const auto big_p = previous.source.weights();
  const auto big_q = previous.target.weights();
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0 && !(big_p[parents.source[i]] > 0.0)) {
      throw std::logic_error("source child carries mass under a parent without mass");
    }
  }
  for (std::size_t j = 0; j < q.size(); ++j) {
    if (q[j] > 0.0 && !(big_q[parents.target[j]] > 0.0)) {
      throw std::logic_error("target child carries mass under a parent without mass");
    }
  }
  CouplingSolution sol;
  sol.values.assign(pattern.size(), 0.0);
  sol.status = SolveStatus::feasible;
  for (std::size_t k = 0; k < pattern.size(); ++k) {
    const auto& pr = pattern[k];
    const std::size_t h = parents.source[pr.source];
    const std::size_t g = parents.target[pr.target];
    const auto pos = previous.pattern.find({h, g});
    if (!pos) continue;
    const double big = previous.coupling.values[*pos];
    if (big <= 0.0) continue;
    sol.values[k] = p[pr.source] * q[pr.target] / (big_p[h] * big_q[g]) * big;
  }
  return sol;
}

SparsityPattern expand_pattern(const SparsityPattern& minimal, const WeightedPartition& source,
                               const WeightedPartition& target) {
  const auto src_nb = occupied_neighbors(source);
  const auto tgt_nb = occupied_neighbors(target);
  std::vector<CellPair> pairs(minimal.pairs());
  for (const auto& pr : minimal.pairs()) {
    for (const auto j : tgt_nb[pr.target]) pairs.push_back({pr.source, j});
    for (const auto i : src_nb[pr.source]) pairs.push_back({i, pr.target});
  }
  return SparsityPattern(minimal.rows(), minimal.cols(), std::move(pairs));
}

TransportSolution solve(const SampleSet& source, const SampleSet& target, const SolveConfig& config) {
  config.validate();
  if (source.dim() != target.dim()) {
    throw DomainError("source has dimension " + std::to_string(source.dim()) + ", target has dimension " +
                      std::to_string(target.dim()));
  }

  Grid src_grid = initial_grid(source);
  Grid tgt_grid = initial_grid(target);
  auto src_part = assign_weights(source, src_grid);
  auto tgt_part = assign_weights(target, tgt_grid);
  auto pattern = SparsityPattern::dense(src_part.size(), tgt_part.size());
  std::size_t minimal_size = pattern.size();
  std::vector<double> warm;

  TransportSolution result;
  for (std::size_t level = 1;; ++level) {
    const auto start = std::chrono::steady_clock::now();
    LevelSolution current{level,
                          fit_marginal(source, std::move(src_part), config.density_model, config.workers),
                          fit_marginal(target, std::move(tgt_part), config.density_model, config.workers),
                          std::move(pattern),
                          {},
                          {},
                          0.0,
                          minimal_size,
                          0.0};
    current.costs = pattern_costs(current.pattern, current.source, current.target, config);
    current.coupling = solve_transportation(
        {current.source.weights(), current.target.weights(), current.costs}, current.pattern,
        config.simplex, warm);
    if (current.coupling.status != SolveStatus::optimal) throw InfeasibleError(infeasible_report(current));
    current.objective = current.coupling.objective;
    current.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.levels.push_back(std::move(current));
    const LevelSolution& prev = result.levels.back();

    if (level >= config.max_levels) break;
    const auto src_ref = refine_grid(src_grid, prev.source.partition, config.policy, config.n_min);
    const auto tgt_ref = refine_grid(tgt_grid, prev.target.partition, config.policy, config.n_min);
    if (src_ref.fixpoint && tgt_ref.fixpoint) break;

    src_grid = src_ref.grid;
    tgt_grid = tgt_ref.grid;
    src_part = assign_weights(source, src_grid);
    tgt_part = assign_weights(target, tgt_grid);
    const ParentMaps parents{parent_positions(prev.source.partition, src_ref, src_part),
                             parent_positions(prev.target.partition, tgt_ref, tgt_part)};
    auto minimal = minimal_pattern(prev, parents, src_part.size(), tgt_part.size());
    minimal_size = minimal.size();
    pattern = config.neighbor_expansion ? expand_pattern(minimal, src_part, tgt_part) : std::move(minimal);

    std::vector<double> p(src_part.size()), q(tgt_part.size());
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = src_part[i].weight;
    for (std::size_t j = 0; j < q.size(); ++j) q[j] = tgt_part[j].weight;
    warm = scaled_feasible(prev, p, q, parents, pattern).values;
  }

  const LevelSolution& last = result.final_level();
  for (std::size_t k = 0; k < last.pattern.size(); ++k) {
    const double lambda = last.coupling.values[k];
    if (lambda <= 0.0) continue;
    const auto& pr = last.pattern[k];
    result.maps.push_back({pr, lambda, cell_pair_map(last.source.cells[pr.source], last.target.cells[pr.target])});
  }
  return result;
}

std::string level_record(const LevelSolution& level, bool with_timing) {
  nlohmann::ordered_json j;
  j["level"] = level.level;
  j["source_cells_per_dim"] = segments_per_axis(level.source.partition.grid());
  j["target_cells_per_dim"] = segments_per_axis(level.target.partition.grid());
  j["source_occupied_cells"] = level.source.size();
  j["target_occupied_cells"] = level.target.size();
  j["pattern_size"] = level.pattern.size();
  j["minimal_pattern_size"] = level.minimal_size;
  j["objective"] = level.objective;
  j["W"] = std::sqrt(2.0 * std::max(0.0, level.objective));
  j["pivots"] = level.coupling.pivots;
  if (with_timing) j["wall_seconds"] = level.wall_seconds;
  return j.dump();
}

}  // namespace gridot
