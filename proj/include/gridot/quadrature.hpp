#pragma once

#include <cstddef>
#include <vector>

namespace gridot {

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendreRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t order() const noexcept { return nodes.size(); }

  /// Integral of f over [a, b].
  template <class F>
  double integrate(F&& f, double a, double b) const {
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    double sum = 0.0;
    for (std::size_t k = 0; k < nodes.size(); ++k) sum += weights[k] * f(mid + half * nodes[k]);
    return half * sum;
  }
};

/// Rules are computed once per order and shared; the reference stays valid
/// for the life of the program.
const GaussLegendreRule& gauss_legendre(std::size_t order);

}  // namespace gridot
