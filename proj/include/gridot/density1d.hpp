#pragma once

#include <span>

namespace gridot {

/// rho(x) = (1 + slope * (x - center)) / width on [left, right], zero elsewhere.
/// |slope| <= 2 / width keeps the density nonnegative at both ends.
class LinearDensity1D {
 public:
  /// Throws DomainError when right <= left or the slope would make the density negative.
  LinearDensity1D(double left, double right, double slope = 0.0);

  static LinearDensity1D uniform(double left, double right) { return {left, right, 0.0}; }

  double left() const noexcept { return left_; }
  double right() const noexcept { return right_; }
  double slope() const noexcept { return slope_; }
  double width() const noexcept { return right_ - left_; }
  double center() const noexcept { return 0.5 * (left_ + right_); }
  double max_slope() const noexcept { return 2.0 / width(); }

  double pdf(double x) const noexcept;
  double mean() const noexcept;

  LinearDensity1D shifted(double offset) const { return {left_ + offset, right_ + offset, slope_}; }

 private:
  double left_;
  double right_;
  double slope_;
};

struct DensityFit {
  LinearDensity1D density;
  /// No values were supplied and the uniform density was returned.
  bool fallback = false;
};

/// slope = clamp(4 * sum(v - center) / (n * width), -2/width, 2/width).
/// Values outside [left, right] are a DomainError.
DensityFit fit_linear_density(std::span<const double> values, double left, double right);

/// Cumulative distribution; x is clamped to the support.
double cdf(const LinearDensity1D& density, double x) noexcept;

/// Inverse of cdf on [0, 1]. Throws DomainError outside that range.
double quantile(const LinearDensity1D& density, double u);

}  // namespace gridot
