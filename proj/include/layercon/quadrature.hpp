#pragma once

#include <vector>

namespace layercon {

struct QuadratureRule {
  std::vector<double> nodes;    // on (-1, 1), ascending
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule, exact for polynomials of degree 2n - 1.
QuadratureRule gauss_legendre(int n);

/// Gauss-Lobatto-Legendre points (endpoints included) for Lagrange elements.
std::vector<double> gauss_lobatto_points(int order);

}  // namespace layercon
