#include "gridot/localtransport.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "gridot/errors.hpp"
#include "gridot/quadrature.hpp"

namespace gridot {

void CellPairMap::apply(std::span<const double> x, std::span<double> out) const {
  for (std::size_t l = 0; l < axes_.size(); ++l) out[l] = axes_[l](x[l]);
}

std::vector<double> CellPairMap::operator()(std::span<const double> x) const {
  std::vector<double> out(axes_.size());
  apply(x, out);
  return out;
}

double CellDensity::pdf(std::span<const double> x) const {
  double p = 1.0;
  for (std::size_t l = 0; l < factors.size(); ++l) p *= factors[l].pdf(x[l]);
  return p;
}

Map1D map_1d(const LinearDensity1D& source, const LinearDensity1D& target) {
  return Map1D(source, target);
}

namespace {

// Distance in theta of the quantile's branch point from the end it sits
// beyond (theta = 0 for rising densities, pi for falling ones).
double branch_distance(const LinearDensity1D& d, bool rising) {
  const double aw = d.slope() * d.width();
  if (std::abs(d.slope()) < 1e-14 || (aw > 0.0) != rising) return std::numbers::pi;
  const double b = 1.0 - 0.5 * std::abs(aw);
  const double delta = b * b / (2.0 * std::abs(aw));
  return 2.0 * std::asinh(std::sqrt(delta));
}

// Panel breaks halving toward an end until they are inside the branch distance.
void grade(std::vector<double>& breaks, double r, bool at_zero) {
  double b = 0.5 * std::numbers::pi;
  for (int k = 0; k < 40 && b > r; ++k) {
    b *= 0.5;
    breaks.push_back(at_zero ? b : std::numbers::pi - b);
  }
}

}  // namespace

double cost_1d(const LinearDensity1D& source, const LinearDensity1D& target, std::size_t order) {
  const auto& rule = gauss_legendre(order);
  const auto integrand = [&](double theta) {
    const double u = std::clamp(0.5 * (1.0 - std::cos(theta)), 0.0, 1.0);
    const double gap = quantile(target, u) - quantile(source, u);
    return 0.25 * gap * gap * std::sin(theta);
  };
  const double r0 = std::min(branch_distance(source, true), branch_distance(target, true));
  const double r1 = std::min(branch_distance(source, false), branch_distance(target, false));
  std::vector<double> breaks = {0.0, std::numbers::pi};
  if (r0 < 0.5 * std::numbers::pi || r1 < 0.5 * std::numbers::pi) {
    breaks.push_back(0.5 * std::numbers::pi);
    grade(breaks, r0, true);
    grade(breaks, r1, false);
  }
  std::sort(breaks.begin(), breaks.end());
  double value = 0.0;
  for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
    value += rule.integrate(integrand, breaks[k], breaks[k + 1]);
  }
  return std::max(0.0, value);
}

double cell_pair_cost(const CellDensity& source, const CellDensity& target, std::size_t order) {
  if (source.dim() != target.dim()) throw DomainError("cell densities differ in dimension");
  double total = 0.0;
  for (std::size_t l = 0; l < source.dim(); ++l) {
    total += cost_1d(source.factors[l], target.factors[l], order);
  }
  return total;
}

CellPairMap cell_pair_map(const CellDensity& source, const CellDensity& target) {
  if (source.dim() != target.dim()) throw DomainError("cell densities differ in dimension");
  std::vector<Map1D> axes;
  axes.reserve(source.dim());
  for (std::size_t l = 0; l < source.dim(); ++l) axes.push_back(map_1d(source.factors[l], target.factors[l]));
  return CellPairMap(std::move(axes));
}

}  // namespace gridot
