#pragma once

// Optimal transport between product densities supported on single cells.
// For the cost ½|y - x|² the optimal map of a product density is the product
// of the one-dimensional monotone rearrangements, and the cost is the sum of
// the per-axis costs.

#include <cstddef>
#include <span>
#include <vector>

#include "gridot/density1d.hpp"
#include "gridot/geometry.hpp"

namespace gridot {

inline constexpr std::size_t kDefaultQuadratureOrder = 32;

/// Monotone rearrangement x -> Q_target(P_source(x)).
class Map1D {
 public:
  Map1D(LinearDensity1D source, LinearDensity1D target) : source_(source), target_(target) {}

  double operator()(double x) const { return quantile(target_, cdf(source_, x)); }

  const LinearDensity1D& source() const noexcept { return source_; }
  const LinearDensity1D& target() const noexcept { return target_; }

 private:
  LinearDensity1D source_;
  LinearDensity1D target_;
};

class CellPairMap {
 public:
  explicit CellPairMap(std::vector<Map1D> axes) : axes_(std::move(axes)) {}

  std::size_t dim() const noexcept { return axes_.size(); }
  const Map1D& axis(std::size_t l) const { return axes_[l]; }

  /// Writes the image of `x` into `out` (both of length dim()).
  void apply(std::span<const double> x, std::span<double> out) const;
  std::vector<double> operator()(std::span<const double> x) const;

 private:
  std::vector<Map1D> axes_;
};

struct CellDensity {
  CellIndex cell;
  double weight = 0.0;
  /// One factor per axis, supported on the cell's segment along that axis.
  std::vector<LinearDensity1D> factors;

  std::size_t dim() const noexcept { return factors.size(); }
  /// Product density at x (zero outside the cell).
  double pdf(std::span<const double> x) const;
};

Map1D map_1d(const LinearDensity1D& source, const LinearDensity1D& target);

/// ∫ ½ (m(x) - x)² source(x) dx for the monotone map m. The integral is taken
/// in the probability variable u = P_source(x), where it reads
/// ∫₀¹ ½ (Q_target(u) - Q_source(u))² du, after u = (1 - cos θ)/2; this keeps the
/// integrand smooth when a slope sits at its positivity bound. `order` nodes are
/// used per panel; panels shrink geometrically toward a nearby branch point of
/// the target quantile.
double cost_1d(const LinearDensity1D& source, const LinearDensity1D& target,
               std::size_t order = kDefaultQuadratureOrder);

/// Sum of cost_1d over the axes. Throws DomainError on dimension mismatch.
double cell_pair_cost(const CellDensity& source, const CellDensity& target,
                      std::size_t order = kDefaultQuadratureOrder);

CellPairMap cell_pair_map(const CellDensity& source, const CellDensity& target);

}  // namespace gridot
