#include "gridot/barycenter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gridot/errors.hpp"
#include "gridot/parallel.hpp"
#include "gridot/transportmap.hpp"

namespace gridot {

namespace {

struct Pushed {
  std::optional<SampleSet> samples;
  double w2 = 0.0;
  double diameter = 0.0;
};

[[noreturn]] void rethrow_for_marginal(std::size_t k) {
  const std::string where = "marginal " + std::to_string(k) + ": ";
  try {
    throw;
  } catch (const InfeasibleError& e) {
    throw InfeasibleError(where + e.what());
  } catch (const OutOfSupportError& e) {
    throw OutOfSupportError(e.indices(), where + e.what());
  } catch (const DomainError& e) {
    throw DomainError(where + e.what());
  }
}

}  // namespace

void BarycenterProblem::validate() const {
  if (marginals.empty()) throw DomainError("barycenter needs at least one marginal");
  if (weights.size() != marginals.size()) {
    throw DomainError(std::to_string(weights.size()) + " weights for " + std::to_string(marginals.size()) +
                      " marginals");
  }
  const std::size_t d = marginals.front().dim();
  double sum = 0.0;
  for (std::size_t k = 0; k < marginals.size(); ++k) {
    if (marginals[k].dim() != d) throw DomainError("marginal " + std::to_string(k) + " differs in dimension");
    if (!(weights[k] >= 0.0)) throw DomainError("weights must be nonnegative");
    sum += weights[k];
  }
  if (std::abs(sum - 1.0) > 1e-12) throw DomainError("weights must sum to 1");
  if (init && init->dim() != d) throw DomainError("initial cloud differs in dimension");
  if (max_iters < 1) throw DomainError("max_iters must be at least 1");
  if (!(tolerance >= 0.0)) throw DomainError("tolerance must be nonnegative");
  if (workers < 1) throw DomainError("workers must be at least 1");
  pairwise.validate();
}

double mean_displacement(const SampleSet& a, const SampleSet& b) {
  if (a.dim() != b.dim() || a.size() != b.size()) throw DomainError("clouds differ in shape");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double s = 0.0;
    for (std::size_t l = 0; l < a.dim(); ++l) {
      const double g = a.coord(i, l) - b.coord(i, l);
      s += g * g;
    }
    sum += std::sqrt(s);
  }
  return sum / static_cast<double>(a.size());
}

double support_diameter(const std::vector<SampleSet>& clouds) {
  const std::size_t d = clouds.front().dim();
  std::vector<double> lo(d, std::numeric_limits<double>::infinity());
  std::vector<double> hi(d, -std::numeric_limits<double>::infinity());
  for (const auto& c : clouds) {
    for (std::size_t i = 0; i < c.size(); ++i) {
      for (std::size_t l = 0; l < d; ++l) {
        lo[l] = std::min(lo[l], c.coord(i, l));
        hi[l] = std::max(hi[l], c.coord(i, l));
      }
    }
  }
  double s = 0.0;
  for (std::size_t l = 0; l < d; ++l) s += (hi[l] - lo[l]) * (hi[l] - lo[l]);
  return std::sqrt(s);
}

double mean_cell_diameter(const TransportSolution& solution) {
  const auto& src = solution.final_level().source;
  double sum = 0.0;
  for (const auto& c : src.cells) sum += c.weight * src.partition.grid().cell_diameter(c.cell);
  return sum;
}

BarycenterStep barycenter_step(const SampleSet& current, const BarycenterProblem& problem) {
  problem.validate();
  if (current.dim() != problem.marginals.front().dim()) throw DomainError("current cloud differs in dimension");

  std::vector<std::size_t> active;
  for (std::size_t k = 0; k < problem.marginals.size(); ++k) {
    if (problem.weights[k] > 0.0) active.push_back(k);
  }
  std::vector<Pushed> pushed(active.size());
  parallel_for(active.size(), problem.workers, [&](std::size_t a) {
    const std::size_t k = active[a];
    try {
      const auto sol = solve(current, problem.marginals[k], problem.pairwise);
      pushed[a].samples = push_samples(MapEvaluator(sol), current);
      pushed[a].w2 = 2.0 * sol.final_level().objective;
      pushed[a].diameter = mean_cell_diameter(sol);
    } catch (...) {
      rethrow_for_marginal(k);
    }
  });

  std::vector<double> coords(current.coords().size(), 0.0);
  BarycenterStep step{current, 0.0, 0.0};
  for (std::size_t a = 0; a < active.size(); ++a) {
    const double w = problem.weights[active[a]];
    const auto& y = pushed[a].samples->coords();
    for (std::size_t k = 0; k < coords.size(); ++k) coords[k] += w * y[k];
    step.objective += w * pushed[a].w2;
    step.mean_cell_diameter += pushed[a].diameter / static_cast<double>(active.size());
  }
  step.samples = SampleSet(current.dim(), std::move(coords));
  return step;
}

BarycenterResult barycenter(const BarycenterProblem& problem) {
  problem.validate();
  std::vector<SampleSet> clouds = problem.marginals;
  SampleSet current = problem.init ? *problem.init : problem.marginals.front();
  clouds.push_back(current);
  const double threshold = problem.tolerance * support_diameter(clouds);

  BarycenterResult result{current, 0, false, {}};
  for (std::size_t it = 1; it <= problem.max_iters; ++it) {
    auto step = barycenter_step(result.samples, problem);
    const double moved = mean_displacement(step.samples, result.samples);
    result.history.push_back({it, moved, step.objective, step.mean_cell_diameter});
    result.samples = std::move(step.samples);
    result.iterations = it;
    if (moved <= threshold) {
      result.converged = true;
      break;
    }
  }
  return result;
}

BarycenterResult interpolate(const SampleSet& source, const SampleSet& target, double t,
                             const SolveConfig& config, std::size_t max_iters, double tolerance) {
  if (!(t >= 0.0 && t <= 1.0)) throw DomainError("interpolation parameter must lie in [0, 1]");
  BarycenterProblem problem;
  problem.marginals = {source, target};
  problem.weights = {1.0 - t, t};
  problem.pairwise = config;
  problem.max_iters = max_iters;
  problem.tolerance = tolerance;
  return barycenter(problem);
}

}  // namespace gridot
