#pragma once

// Closed-form reference maps and distances used to score numerical solutions.

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "gridot/geometry.hpp"

namespace gridot {

/// Mean and row-major covariance. Construction checks symmetry and positive
/// definiteness (DomainError otherwise).
struct Gaussian {
  Gaussian(std::vector<double> mean, std::vector<double> cov);

  std::size_t dim() const noexcept { return mean.size(); }

  std::vector<double> mean;
  std::vector<double> cov;
};

/// y = A (x - m1) + m2.
class AffineMap {
 public:
  AffineMap(std::vector<double> matrix, std::vector<double> from, std::vector<double> to);

  std::size_t dim() const noexcept { return from_.size(); }
  const std::vector<double>& matrix() const noexcept { return a_; }
  std::vector<double> operator()(std::span<const double> x) const;

 private:
  std::vector<double> a_;
  std::vector<double> from_;
  std::vector<double> to_;
};

/// A = S2^{1/2} (S2^{1/2} S1 S2^{1/2})^{-1/2} S2^{1/2}.
AffineMap gaussian_affine_map(const Gaussian& source, const Gaussian& target);

/// W_2 between two Gaussians:
/// sqrt(|m1 - m2|^2 + tr(S1 + S2 - 2 (S2^{1/2} S1 S2^{1/2})^{1/2})).
double gaussian_wasserstein(const Gaussian& source, const Gaussian& target);

/// Coordinatewise real cube root.
std::vector<double> cube_root_map(std::span<const double> x);

/// Paired rows (x, ybar(x)) with 2d columns.
struct ReferenceTable {
  SampleSet points;
  SampleSet images;
};

ReferenceTable load_reference_table(const std::filesystem::path& path, bool has_header = false);
void write_reference_table(const std::filesystem::path& path, const ReferenceTable& table);

}  // namespace gridot
