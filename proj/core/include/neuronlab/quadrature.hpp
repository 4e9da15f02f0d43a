#pragma once

#include <vector>

namespace neuronlab {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// n-point Gauss-Legendre rule on [lo, hi]. Nodes by Newton iteration on the
// Legendre recurrence; exact for polynomials of degree 2n - 1.
QuadratureRule gauss_legendre(int n, double lo = -1.0, double hi = 1.0);

}  // namespace neuronlab
