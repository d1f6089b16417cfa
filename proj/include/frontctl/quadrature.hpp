#pragma once

#include <boost/math/quadrature/gauss.hpp>

#include <stdexcept>
#include <vector>

namespace frontctl {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

namespace detail {

template <unsigned P>
QuadratureRule gauss_rule_on_unit() {
  using G = boost::math::quadrature::gauss<double, P>;
  QuadratureRule rule;
  const auto& x = G::abscissa();
  const auto& w = G::weights();
  // boost stores the nonnegative half; 0 comes first for odd P.
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (x[k] == 0.0) {
      rule.nodes.push_back(0.0);
      rule.weights.push_back(w[k]);
    } else {
      rule.nodes.push_back(-x[k]);
      rule.weights.push_back(w[k]);
      rule.nodes.push_back(x[k]);
      rule.weights.push_back(w[k]);
    }
  }
  return rule;
}

}  // namespace detail

/// Gauss-Legendre rule on [-1, 1].
inline QuadratureRule gauss_legendre(int points) {
  switch (points) {
    case 2: return detail::gauss_rule_on_unit<2>();
    case 3: return detail::gauss_rule_on_unit<3>();
    case 4: return detail::gauss_rule_on_unit<4>();
    case 5: return detail::gauss_rule_on_unit<5>();
    case 8: return detail::gauss_rule_on_unit<8>();
    case 10: return detail::gauss_rule_on_unit<10>();
    default: throw std::invalid_argument("gauss_legendre: supported point counts are 2, 3, 4, 5, 8, 10");
  }
}

/// Composite rule over consecutive panels [edges[k], edges[k+1]].
inline QuadratureRule composite_gauss_legendre(const std::vector<double>& edges, int points_per_panel) {
  if (edges.size() < 2) throw std::invalid_argument("composite_gauss_legendre: need at least one panel");
  const QuadratureRule unit = gauss_legendre(points_per_panel);
  QuadratureRule rule;
  rule.nodes.reserve((edges.size() - 1) * unit.nodes.size());
  rule.weights.reserve(rule.nodes.capacity());
  for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
    const double mid = 0.5 * (edges[p] + edges[p + 1]);
    const double half = 0.5 * (edges[p + 1] - edges[p]);
    for (std::size_t q = 0; q < unit.nodes.size(); ++q) {
      rule.nodes.push_back(mid + half * unit.nodes[q]);
      rule.weights.push_back(half * unit.weights[q]);
    }
  }
  return rule;
}

}  // namespace frontctl
