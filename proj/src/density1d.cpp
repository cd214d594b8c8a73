#include "gridot/density1d.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gridot/errors.hpp"

namespace gridot {

namespace {
// Below this |slope| the quadratic degenerates to the uniform formulas.
constexpr double kFlatSlope = 1e-14;
}  // namespace

LinearDensity1D::LinearDensity1D(double left, double right, double slope)
    : left_(left), right_(right), slope_(slope) {
  if (!(right > left)) throw DomainError("density support needs right > left");
  const double bound = 2.0 / (right - left);
  if (!std::isfinite(slope) || std::abs(slope) > bound * (1.0 + 1e-12)) {
    throw DomainError("slope " + std::to_string(slope) + " exceeds positivity bound");
  }
  slope_ = std::clamp(slope, -bound, bound);
}

double LinearDensity1D::pdf(double x) const noexcept {
  if (x < left_ || x > right_) return 0.0;
  return std::max(0.0, 1.0 + slope_ * (x - center())) / width();
}

double LinearDensity1D::mean() const noexcept {
  const double w = width();
  return center() + slope_ * w * w / 12.0;
}

DensityFit fit_linear_density(std::span<const double> values, double left, double right) {
  if (!(right > left)) throw DomainError("density support needs right > left");
  if (values.empty()) return {LinearDensity1D::uniform(left, right), true};
  const double center = 0.5 * (left + right);
  const double width = right - left;
  double sum = 0.0;
  for (const double v : values) {
    if (v < left || v > right) throw DomainError("value outside the fitting interval");
    sum += v - center;
  }
  const double a0 = 4.0 * sum / (static_cast<double>(values.size()) * width);
  const double b = 2.0 / width;
  return {LinearDensity1D(left, right, std::clamp(a0, -b, b)), false};
}

double cdf(const LinearDensity1D& density, double x) noexcept {
  const double w = density.width();
  const double s = std::clamp(x - density.left(), 0.0, w);
  // Integral of (1 + a(t - c))/w from left to left + s.
  const double u = s / w * (1.0 + 0.5 * density.slope() * (s - w));
  return std::clamp(u, 0.0, 1.0);
}

double quantile(const LinearDensity1D& density, double u) {
  if (!(u >= 0.0 && u <= 1.0)) throw DomainError("quantile level outside [0, 1]");
  const double w = density.width();
  const double a = density.slope();
  if (u == 0.0) return density.left();
  if (u == 1.0) return density.right();
  double s;
  if (std::abs(a) < kFlatSlope) {
    s = u * w;
  } else {
    // Root of (a/2) s^2 + (1 - a w/2) s - u w = 0 lying in [0, w]; B >= 0 by the
    // slope bound, so the rationalised form avoids cancellation.
    const double b = 1.0 - 0.5 * a * w;
    const double disc = std::max(0.0, b * b + 2.0 * a * u * w);
    s = 2.0 * u * w / (b + std::sqrt(disc));
  }
  return density.left() + std::clamp(s, 0.0, w);
}

}  // namespace gridot
