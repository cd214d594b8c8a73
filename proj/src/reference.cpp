#include "gridot/reference.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <fstream>

#include "gridot/errors.hpp"
#include "gridot/io.hpp"

namespace gridot {

namespace {

using Matrix = Eigen::MatrixXd;

Matrix to_matrix(const std::vector<double>& flat, std::size_t d) {
  Matrix m(d, d);
  for (std::size_t r = 0; r < d; ++r) {
    for (std::size_t c = 0; c < d; ++c) m(r, c) = flat[r * d + c];
  }
  return m;
}

std::vector<double> to_flat(const Matrix& m) {
  std::vector<double> out;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) out.push_back(m(r, c));
  }
  return out;
}

// Symmetric positive semidefinite power via eigendecomposition.
Matrix spd_power(const Matrix& m, double power) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(m);
  Eigen::VectorXd values = eig.eigenvalues().cwiseMax(0.0);
  for (Eigen::Index k = 0; k < values.size(); ++k) values(k) = std::pow(values(k), power);
  return eig.eigenvectors() * values.asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace

Gaussian::Gaussian(std::vector<double> m, std::vector<double> c) : mean(std::move(m)), cov(std::move(c)) {
  const std::size_t d = mean.size();
  if (d == 0) throw DomainError("Gaussian needs at least one dimension");
  if (cov.size() != d * d) {
    throw DomainError("covariance has " + std::to_string(cov.size()) + " entries, expected " +
                      std::to_string(d * d));
  }
  const Matrix s = to_matrix(cov, d);
  if (!s.isApprox(s.transpose(), 1e-12)) throw DomainError("covariance is not symmetric");
  Eigen::LLT<Matrix> llt(s);
  if (llt.info() != Eigen::Success) throw DomainError("covariance is not positive definite");
}

AffineMap::AffineMap(std::vector<double> matrix, std::vector<double> from, std::vector<double> to)
    : a_(std::move(matrix)), from_(std::move(from)), to_(std::move(to)) {
  if (to_.size() != from_.size() || a_.size() != from_.size() * from_.size()) {
    throw DomainError("affine map shapes do not match");
  }
}

std::vector<double> AffineMap::operator()(std::span<const double> x) const {
  const std::size_t d = dim();
  if (x.size() != d) throw DomainError("point dimension does not match the map");
  std::vector<double> y(to_);
  for (std::size_t r = 0; r < d; ++r) {
    for (std::size_t c = 0; c < d; ++c) y[r] += a_[r * d + c] * (x[c] - from_[c]);
  }
  return y;
}

AffineMap gaussian_affine_map(const Gaussian& source, const Gaussian& target) {
  if (source.dim() != target.dim()) throw DomainError("Gaussians differ in dimension");
  const std::size_t d = source.dim();
  const Matrix s1 = to_matrix(source.cov, d);
  const Matrix r2 = spd_power(to_matrix(target.cov, d), 0.5);
  const Matrix a = r2 * spd_power(r2 * s1 * r2, -0.5) * r2;
  return AffineMap(to_flat(a), source.mean, target.mean);
}

double gaussian_wasserstein(const Gaussian& source, const Gaussian& target) {
  if (source.dim() != target.dim()) throw DomainError("Gaussians differ in dimension");
  const std::size_t d = source.dim();
  const Matrix s1 = to_matrix(source.cov, d);
  const Matrix s2 = to_matrix(target.cov, d);
  const Matrix r2 = spd_power(s2, 0.5);
  double w2 = (s1 + s2 - 2.0 * spd_power(r2 * s1 * r2, 0.5)).trace();
  for (std::size_t l = 0; l < d; ++l) {
    const double gap = source.mean[l] - target.mean[l];
    w2 += gap * gap;
  }
  return std::sqrt(std::max(0.0, w2));
}

std::vector<double> cube_root_map(std::span<const double> x) {
  std::vector<double> y(x.size());
  for (std::size_t l = 0; l < x.size(); ++l) y[l] = std::cbrt(x[l]);
  return y;
}

ReferenceTable load_reference_table(const std::filesystem::path& path, bool has_header) {
  const auto rows = load_samples(path, has_header);
  if (rows.dim() % 2 != 0) {
    throw ParseError(0, "reference table needs an even number of columns, got " + std::to_string(rows.dim()));
  }
  const std::size_t d = rows.dim() / 2;
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto p = rows.point(i);
    xs.insert(xs.end(), p.begin(), p.begin() + static_cast<std::ptrdiff_t>(d));
    ys.insert(ys.end(), p.begin() + static_cast<std::ptrdiff_t>(d), p.end());
  }
  return {SampleSet(d, std::move(xs)), SampleSet(d, std::move(ys))};
}

void write_reference_table(const std::filesystem::path& path, const ReferenceTable& table) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  const std::size_t d = table.points.dim();
  for (std::size_t i = 0; i < table.points.size(); ++i) {
    for (std::size_t l = 0; l < d; ++l) out << (l ? "," : "") << format_double(table.points.coord(i, l));
    for (std::size_t l = 0; l < d; ++l) out << ',' << format_double(table.images.coord(i, l));
    out << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace gridot
