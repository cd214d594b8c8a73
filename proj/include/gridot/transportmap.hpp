#pragma once

// Recovered transport map and the error measures computed from it.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "gridot/geometry.hpp"
#include "gridot/refinement.hpp"

namespace gridot {

/// y(x) for the final level of a solution: the mass-weighted average of the
/// partner maps of the cell holding x. Within one cell the density factor is
/// common to every term and cancels.
class MapEvaluator {
 public:
  explicit MapEvaluator(const TransportSolution& solution);
  /// Map of an intermediate level.
  explicit MapEvaluator(const LevelSolution& level);

  std::size_t dim() const noexcept { return grid_.dim(); }
  const Grid& grid() const noexcept { return grid_; }

  /// Throws OutOfSupportError outside the grid or in a cell without mass.
  void evaluate(std::span<const double> x, std::span<double> out) const;
  std::vector<double> operator()(std::span<const double> x) const;

  /// Number of partner maps of the source cell at `pos`.
  std::size_t partners(std::size_t pos) const { return start_[pos + 1] - start_[pos]; }

 private:
  MapEvaluator(const MarginalLevel& source, std::vector<ActivePair> terms);

  Grid grid_;
  std::vector<std::uint64_t> linear_;  // occupied source cells, sorted
  std::vector<double> mass_;           // sum of partner lambdas per cell
  std::vector<std::size_t> start_;     // CSR into terms_
  std::vector<ActivePair> terms_;
};

std::vector<double> evaluate_map(const MapEvaluator& evaluator, std::span<const double> x);

/// Images of every sample, in input order. OutOfSupportError lists every
/// offending index.
SampleSet push_samples(const MapEvaluator& evaluator, const SampleSet& samples, std::size_t workers = 1);

using PointMap = std::function<std::vector<double>(std::span<const double>)>;

/// sqrt(mean ||y(x_l) - ref(x_l)||^2).
double map_error_E1(const MapEvaluator& evaluator, const SampleSet& samples, const PointMap& reference);

/// Same measure for precomputed images.
double map_error_E1(const SampleSet& mapped, const SampleSet& reference_images);

/// sqrt(2 * final objective).
double wasserstein_distance(const TransportSolution& solution);

double distance_error_E2(double w_numerical, double w_reference);

}  // namespace gridot
