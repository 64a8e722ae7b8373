#pragma once

#include <functional>
#include <vector>

namespace mcot {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Legendre rule with `order` nodes on [a, b].
QuadratureRule gauss_legendre(int order, double a = -1.0, double b = 1.0);

/// Composite Gauss-Legendre: `panels` equal sub-intervals of [a, b], `order` nodes each.
QuadratureRule composite_gauss_legendre(int order, int panels, double a, double b);

/// Gauss-Hermite rule for the standard normal weight exp(-x^2/2)/sqrt(2 pi).
/// Exact for polynomials of degree <= 2*order - 1.
QuadratureRule gauss_hermite_probabilists(int order);

/// Adaptive Gauss-Kronrod (15 points) integral of f over [a, b].
/// Throws NumericalError when the error estimate stays above `abs_tol`.
double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double abs_tol = 1e-10, int max_depth = 20,
                          double* error_estimate = nullptr);

}  // namespace mcot
