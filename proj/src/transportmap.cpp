#include "gridot/transportmap.hpp"

#include <algorithm>
#include <cmath>

#include "gridot/errors.hpp"
#include "gridot/parallel.hpp"

namespace gridot {

namespace {

std::vector<ActivePair> active_pairs(const LevelSolution& level) {
  std::vector<ActivePair> out;
  for (std::size_t k = 0; k < level.pattern.size(); ++k) {
    const double lambda = level.coupling.values[k];
    if (lambda <= 0.0) continue;
    const auto& pr = level.pattern[k];
    out.push_back({pr, lambda, cell_pair_map(level.source.cells[pr.source], level.target.cells[pr.target])});
  }
  return out;
}

}  // namespace

MapEvaluator::MapEvaluator(const TransportSolution& solution)
    : MapEvaluator(solution.final_level().source, solution.maps) {}

MapEvaluator::MapEvaluator(const LevelSolution& level) : MapEvaluator(level.source, active_pairs(level)) {}

MapEvaluator::MapEvaluator(const MarginalLevel& source, std::vector<ActivePair> terms)
    : grid_(source.partition.grid()), terms_(std::move(terms)) {
  for (const auto& c : source.partition.cells()) linear_.push_back(c.linear);
  mass_.assign(source.size(), 0.0);
  start_.assign(source.size() + 1, 0);
  // Terms are in pattern order, hence grouped by source position.
  for (const auto& t : terms_) {
    ++start_[t.pair.source + 1];
    mass_[t.pair.source] += t.lambda;
  }
  for (std::size_t i = 0; i < source.size(); ++i) start_[i + 1] += start_[i];
}

void MapEvaluator::evaluate(std::span<const double> x, std::span<double> out) const {
  if (x.size() != dim() || out.size() != dim()) throw DomainError("point dimension does not match the map");
  const auto linear = grid_.linear_index(locate(grid_, x));
  const auto it = std::lower_bound(linear_.begin(), linear_.end(), linear);
  if (it == linear_.end() || *it != linear) throw OutOfSupportError({}, "point lies in a cell without mass");
  const auto pos = static_cast<std::size_t>(it - linear_.begin());
  if (partners(pos) == 0) throw OutOfSupportError({}, "point lies in a cell without mass");
  std::fill(out.begin(), out.end(), 0.0);
  std::vector<double> y(dim());
  for (std::size_t k = start_[pos]; k < start_[pos + 1]; ++k) {
    terms_[k].map.apply(x, y);
    for (std::size_t l = 0; l < dim(); ++l) out[l] += terms_[k].lambda * y[l];
  }
  for (auto& v : out) v /= mass_[pos];
}

std::vector<double> MapEvaluator::operator()(std::span<const double> x) const {
  std::vector<double> out(dim());
  evaluate(x, out);
  return out;
}

std::vector<double> evaluate_map(const MapEvaluator& evaluator, std::span<const double> x) {
  return evaluator(x);
}

SampleSet push_samples(const MapEvaluator& evaluator, const SampleSet& samples, std::size_t workers) {
  if (samples.dim() != evaluator.dim()) throw DomainError("sample dimension does not match the map");
  const std::size_t d = samples.dim();
  std::vector<double> coords(samples.size() * d);
  std::vector<char> bad(samples.size(), 0);
  parallel_for(samples.size(), workers, [&](std::size_t i) {
    try {
      evaluator.evaluate(samples.point(i), std::span<double>(coords.data() + i * d, d));
    } catch (const OutOfSupportError&) {
      bad[i] = 1;
    }
  });
  std::vector<std::size_t> offending;
  for (std::size_t i = 0; i < bad.size(); ++i) {
    if (bad[i]) offending.push_back(i);
  }
  if (!offending.empty()) {
    throw OutOfSupportError(offending, std::to_string(offending.size()) + " samples lie outside the support of the map");
  }
  return SampleSet(d, std::move(coords));
}

double map_error_E1(const MapEvaluator& evaluator, const SampleSet& samples, const PointMap& reference) {
  const auto mapped = push_samples(evaluator, samples);
  std::vector<double> ref;
  ref.reserve(samples.size() * samples.dim());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto r = reference(samples.point(i));
    if (r.size() != samples.dim()) throw DomainError("reference map returned a point of the wrong dimension");
    ref.insert(ref.end(), r.begin(), r.end());
  }
  return map_error_E1(mapped, SampleSet(samples.dim(), std::move(ref)));
}

double map_error_E1(const SampleSet& mapped, const SampleSet& reference_images) {
  if (mapped.dim() != reference_images.dim() || mapped.size() != reference_images.size()) {
    throw DomainError("mapped and reference point sets differ in shape");
  }
  double sum = 0.0;
  const auto& a = mapped.coords();
  const auto& b = reference_images.coords();
  for (std::size_t k = 0; k < a.size(); ++k) sum += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(sum / static_cast<double>(mapped.size()));
}

double wasserstein_distance(const TransportSolution& solution) {
  return std::sqrt(2.0 * std::max(0.0, solution.final_level().objective));
}

double distance_error_E2(double w_numerical, double w_reference) { return w_numerical - w_reference; }

}  // namespace gridot
