#include "mcot/quadrature.hpp"

#include <Eigen/Eigenvalues>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>

#include "mcot/error.hpp"

namespace mcot {

QuadratureRule gauss_legendre(int order, double a, double b) {
  if (order < 1) throw InvalidArgument("gauss_legendre: order must be >= 1");
  QuadratureRule rule;
  rule.nodes.resize(order);
  rule.weights.resize(order);
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (b + a);
  for (int i = 0; i < (order + 1) / 2; ++i) {
    // Chebyshev-like initial guess, then Newton on P_order.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= order; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = order * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= order; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = order * (x * p1 - p0) / (x * x - 1.0);
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = mid - half * x;
    rule.nodes[order - 1 - i] = mid + half * x;
    rule.weights[i] = half * w;
    rule.weights[order - 1 - i] = half * w;
  }
  if (order % 2 == 1) rule.nodes[order / 2] = mid;
  return rule;
}

QuadratureRule composite_gauss_legendre(int order, int panels, double a, double b) {
  if (panels < 1) throw InvalidArgument("composite_gauss_legendre: panels must be >= 1");
  QuadratureRule out;
  out.nodes.reserve(static_cast<size_t>(order) * panels);
  out.weights.reserve(static_cast<size_t>(order) * panels);
  const double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const auto rule = gauss_legendre(order, a + p * h, a + (p + 1) * h);
    out.nodes.insert(out.nodes.end(), rule.nodes.begin(), rule.nodes.end());
    out.weights.insert(out.weights.end(), rule.weights.begin(), rule.weights.end());
  }
  return out;
}

QuadratureRule gauss_hermite_probabilists(int order) {
  if (order < 1) throw InvalidArgument("gauss_hermite: order must be >= 1");
  // Golub-Welsch on the Jacobi matrix of the monic He_n recurrence.
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(order, order);
  for (int k = 1; k < order; ++k) {
    jacobi(k, k - 1) = std::sqrt(static_cast<double>(k));
    jacobi(k - 1, k) = jacobi(k, k - 1);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
  QuadratureRule rule;
  rule.nodes.resize(order);
  rule.weights.resize(order);
  for (int i = 0; i < order; ++i) {
    rule.nodes[i] = eig.eigenvalues()(i);
    const double v0 = eig.eigenvectors()(0, i);
    rule.weights[i] = v0 * v0;
  }
  return rule;
}

double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double abs_tol, int max_depth, double* error_estimate) {
  double err = 0.0;
  double l1 = 0.0;
  const double value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
      f, a, b, static_cast<unsigned>(max_depth), abs_tol, &err, &l1);
  if (error_estimate) *error_estimate = err;
  if (!std::isfinite(value) || err > abs_tol * std::max(1.0, l1)) {
    throw NumericalError("integrate_adaptive: quadrature did not converge (error estimate " +
                         std::to_string(err) + ")");
  }
  return value;
}

}  // namespace mcot
