#pragma once

// Weighted barycenters of sample clouds by repeated pairwise transport and
// averaging of the mapped positions.

#include <cstddef>
#include <optional>
#include <vector>

#include "gridot/geometry.hpp"
#include "gridot/refinement.hpp"

namespace gridot {

struct BarycenterProblem {
  std::vector<SampleSet> marginals;
  /// Nonnegative, summing to 1 within 1e-12.
  std::vector<double> weights;
  /// Starting cloud; the first marginal when empty.
  std::optional<SampleSet> init;
  SolveConfig pairwise;
  std::size_t max_iters = 10;
  /// Stop once the mean displacement is at most tolerance * support diameter.
  double tolerance = 1e-3;
  /// Pairwise solves run concurrently on up to this many threads.
  std::size_t workers = 1;

  /// Throws DomainError when the fields are inconsistent.
  void validate() const;
};

struct BarycenterIteration {
  std::size_t iteration = 0;
  double mean_displacement = 0.0;
  /// sum_i w_i W^2(current, marginal i), from the pairwise solves of this step.
  double objective = 0.0;
  /// Mean final-level source cell diameter over the pairwise solves.
  double mean_cell_diameter = 0.0;
};

struct BarycenterResult {
  SampleSet samples;
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<BarycenterIteration> history;
};

struct BarycenterStep {
  SampleSet samples;
  double objective = 0.0;
  double mean_cell_diameter = 0.0;
};

/// One fixed-point update. Zero-weight marginals are skipped. The average is
/// accumulated in marginal order. A failed pairwise solve is rethrown with the
/// marginal index in the message.
BarycenterStep barycenter_step(const SampleSet& current, const BarycenterProblem& problem);

BarycenterResult barycenter(const BarycenterProblem& problem);

/// Barycenter of (source, target) with weights (1 - t, t). DomainError unless 0 <= t <= 1.
BarycenterResult interpolate(const SampleSet& source, const SampleSet& target, double t,
                             const SolveConfig& config, std::size_t max_iters = 10,
                             double tolerance = 1e-3);

double mean_displacement(const SampleSet& a, const SampleSet& b);

/// Diagonal of the bounding box of all points.
double support_diameter(const std::vector<SampleSet>& clouds);

/// Mean cell diameter of the final-level source cells, weighted by cell mass.
double mean_cell_diameter(const TransportSolution& solution);

}  // namespace gridot
