#include "gridot/sampling.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <random>

#include "gridot/errors.hpp"

namespace gridot {

namespace {

void require_count(std::size_t n) {
  if (n == 0) throw DomainError("sample count must be positive");
}

// Standard normals by Box-Muller, so output does not depend on the standard
// library's distribution implementation.
class Normal {
 public:
  explicit Normal(std::uint64_t seed) : rng_(seed) {}
  double operator()() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
    has_spare_ = true;
    return r * std::cos(2.0 * std::numbers::pi * u2);
  }
  double uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 rng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace

SampleSet sample_gaussian(const Gaussian& g, std::size_t n, std::uint64_t seed) {
  require_count(n);
  const std::size_t d = g.dim();
  Eigen::MatrixXd cov(d, d);
  for (std::size_t r = 0; r < d; ++r) {
    for (std::size_t c = 0; c < d; ++c) cov(r, c) = g.cov[r * d + c];
  }
  const Eigen::MatrixXd chol = cov.llt().matrixL();
  Normal normal(seed);
  std::vector<double> coords(n * d);
  Eigen::VectorXd z(d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t l = 0; l < d; ++l) z(l) = normal();
    const Eigen::VectorXd x = chol * z;
    for (std::size_t l = 0; l < d; ++l) coords[i * d + l] = g.mean[l] + x(l);
  }
  return SampleSet(d, std::move(coords));
}

SampleSet sample_uniform_square(std::size_t n, std::uint64_t seed) {
  require_count(n);
  Normal rng(seed);
  std::vector<double> coords(2 * n);
  for (auto& c : coords) c = rng.uniform();
  return SampleSet(2, std::move(coords));
}

SampleSet sample_uniform_cross(std::size_t n, std::uint64_t seed) {
  require_count(n);
  Normal rng(seed);
  std::vector<double> coords;
  coords.reserve(2 * n);
  while (coords.size() < 2 * n) {
    const double x = rng.uniform();
    const double y = rng.uniform();
    const bool bar_x = y >= 1.0 / 3.0 && y <= 2.0 / 3.0;
    const bool bar_y = x >= 1.0 / 3.0 && x <= 2.0 / 3.0;
    if (bar_x || bar_y) {
      coords.push_back(x);
      coords.push_back(y);
    }
  }
  return SampleSet(2, std::move(coords));
}

SampleSet sample_cuberoot_target(std::size_t n, std::size_t dim, std::uint64_t seed) {
  require_count(n);
  if (dim == 0) throw DomainError("dimension must be positive");
  Normal normal(seed);
  std::vector<double> coords(n * dim);
  for (auto& c : coords) c = std::cbrt(normal());
  return SampleSet(dim, std::move(coords));
}

}  // namespace gridot
