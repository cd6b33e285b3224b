#pragma once

#include <vector>

namespace fracopt {

/// Gauss-Legendre rule on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Cached per order; computed by Newton iteration on P_order.
const GaussRule& gauss_legendre(int order);

/// Integrate f over [a, b] with the given Gauss-Legendre order.
template <typename F>
double integrate_gauss(F&& f, double a, double b, int order) {
  const GaussRule& rule = gauss_legendre(order);
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  double sum = 0.0;
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) sum += rule.weights[k] * f(mid + half * rule.nodes[k]);
  return half * sum;
}

}  // namespace fracopt
