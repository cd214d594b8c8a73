#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "gridot/errors.hpp"
#include "gridot/localtransport.hpp"
#include "gridot/quadrature.hpp"

using namespace gridot;

namespace {

LinearDensity1D random_density(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double left = -3.0 + 6.0 * u(rng);
  const double width = 0.05 + 3.0 * u(rng);
  const double slope = (2.0 * u(rng) - 1.0) * 2.0 / width;
  return {left, left + width, slope};
}

// Midpoint-rule oracle in x with many cells, for smooth cases.
double brute_cost(const LinearDensity1D& s, const LinearDensity1D& t, int cells) {
  const Map1D m(s, t);
  double sum = 0.0;
  const double h = s.width() / cells;
  for (int k = 0; k < cells; ++k) {
    const double x = s.left() + (k + 0.5) * h;
    const double gap = m(x) - x;
    sum += 0.5 * gap * gap * s.pdf(x) * h;
  }
  return sum;
}

CellDensity cell(std::vector<LinearDensity1D> f) { return {CellIndex{std::vector<std::size_t>(f.size(), 0)}, 1.0, std::move(f)}; }

}  // namespace

TEST_CASE("Gauss-Legendre rules integrate polynomials exactly") {
  for (const std::size_t n : {1, 2, 5, 32, 64}) {
    const auto& rule = gauss_legendre(n);
    double wsum = 0.0;
    for (const double w : rule.weights) wsum += w;
    CHECK(wsum == doctest::Approx(2.0).epsilon(1e-14));
    const int degree = static_cast<int>(2 * n - 1);
    const double got = rule.integrate([&](double x) { return std::pow(x, degree - (degree % 2)); }, 0.0, 1.0);
    CHECK(got == doctest::Approx(1.0 / (degree - (degree % 2) + 1)).epsilon(1e-13));
  }
}

TEST_CASE("map_1d examples") {
  const auto u01 = LinearDensity1D::uniform(0.0, 1.0);
  const auto m = map_1d(u01, LinearDensity1D::uniform(2.0, 4.0));
  for (const double x : {0.0, 0.25, 0.5, 1.0}) CHECK(m(x) == doctest::Approx(2.0 + 2.0 * x));

  const auto root = map_1d(u01, LinearDensity1D(0.0, 1.0, 2.0));
  for (const double x : {0.01, 0.2, 0.5, 0.9}) {
    // Oracle: invert Q(y) = y^2 by bisection.
    double lo = 0.0, hi = 1.0;
    for (int k = 0; k < 100; ++k) {
      const double mid = 0.5 * (lo + hi);
      (mid * mid < x ? lo : hi) = mid;
    }
    CHECK(root(x) == doctest::Approx(lo).epsilon(1e-13));
  }

  const LinearDensity1D d(1.0, 3.0, 0.4);
  const auto id = map_1d(d, d);
  for (const double x : {1.0, 1.7, 2.9}) CHECK(id(x) == doctest::Approx(x).epsilon(1e-14));
  CHECK(id(1.0) == 1.0);
  CHECK(id(3.0) == 3.0);
}

TEST_CASE("cost_1d examples") {
  const auto u01 = LinearDensity1D::uniform(0.0, 1.0);
  CHECK(cost_1d(u01, LinearDensity1D::uniform(2.0, 3.0)) == doctest::Approx(2.0).epsilon(1e-14));
  // Frozen from the analytic integral of x^2/2 on [0,1].
  CHECK(cost_1d(u01, LinearDensity1D::uniform(0.0, 2.0)) == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
  const LinearDensity1D d(-1.0, 0.5, 1.1);
  CHECK(cost_1d(d, d) <= 1e-12);
}

TEST_CASE("cell_pair_cost and cell_pair_map compose per axis") {
  const auto a = cell({LinearDensity1D::uniform(0, 1), LinearDensity1D::uniform(0, 1)});
  const auto b = cell({LinearDensity1D::uniform(2, 3), LinearDensity1D::uniform(0, 2)});
  CHECK(cell_pair_cost(a, b) == doctest::Approx(2.0 + 1.0 / 6.0).epsilon(1e-14));
  CHECK(cell_pair_cost(a, a) <= 1e-12);

  const auto line_a = cell({LinearDensity1D::uniform(0, 1)});
  const auto line_b = cell({LinearDensity1D::uniform(0, 2)});
  CHECK(cell_pair_cost(line_a, line_b) == cost_1d(line_a.factors[0], line_b.factors[0]));
  CHECK_THROWS_AS(cell_pair_cost(a, line_b), DomainError);
  CHECK_THROWS_AS(cell_pair_map(a, line_b), DomainError);

  const auto c = cell({LinearDensity1D::uniform(2, 4), LinearDensity1D::uniform(0, 1)});
  const auto m = cell_pair_map(a, c);
  const std::vector<double> x = {0.3, 0.8};
  const auto y = m(x);
  CHECK(y[0] == doctest::Approx(2.6));
  CHECK(y[1] == doctest::Approx(0.8));

  // Mixed factors: each coordinate uses its own 1D map.
  const auto mixed_s = cell({LinearDensity1D(0, 1, 1.5), LinearDensity1D::uniform(5, 6)});
  const auto mixed_t = cell({LinearDensity1D::uniform(1, 2), LinearDensity1D(4, 7, -0.5)});
  const auto mm = cell_pair_map(mixed_s, mixed_t);
  const std::vector<double> center = {0.5, 5.5};
  const auto yc = mm(center);
  CHECK(yc[0] == map_1d(mixed_s.factors[0], mixed_t.factors[0])(0.5));
  CHECK(yc[1] == map_1d(mixed_s.factors[1], mixed_t.factors[1])(5.5));
}

TEST_CASE("property: cost_1d agrees with a brute-force x-space integral") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 40; ++trial) {
    // Interior slopes keep the x-space integrand smooth enough for the midpoint oracle.
    auto s = random_density(rng);
    auto t = random_density(rng);
    s = LinearDensity1D(s.left(), s.right(), 0.8 * s.slope());
    t = LinearDensity1D(t.left(), t.right(), 0.8 * t.slope());
    CHECK(cost_1d(s, t) == doctest::Approx(brute_cost(s, t, 200000)).epsilon(1e-7));
  }
}

TEST_CASE("property: quadrature order doubling is stable") {
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 300; ++trial) {
    const auto s = random_density(rng);
    const auto t = random_density(rng);
    CHECK(std::abs(cost_1d(s, t, 32) - cost_1d(s, t, 64)) <= 1e-10);
  }
  // Slopes exactly at the positivity bound.
  const LinearDensity1D up(0.0, 1.0, 2.0), down(0.3, 1.8, -2.0 / 1.5);
  CHECK(std::abs(cost_1d(up, down, 32) - cost_1d(up, down, 64)) <= 1e-10);
  CHECK(std::abs(cost_1d(down, up, 32) - cost_1d(down, up, 64)) <= 1e-10);
}

TEST_CASE("property: cost_1d is translation invariant") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> shift(-50.0, 50.0);
  for (int trial = 0; trial < 200; ++trial) {
    const auto s = random_density(rng);
    const auto t = random_density(rng);
    const double h = shift(rng);
    CHECK(std::abs(cost_1d(s, t) - cost_1d(s.shifted(h), t.shifted(h))) <= 1e-12);
  }
}
