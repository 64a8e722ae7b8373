#include "mcot/oracle1d.hpp"

#include <algorithm>
#include <cmath>

#include "mcot/error.hpp"
#include "mcot/quadrature.hpp"

namespace mcot {

OptimalMap1D::OptimalMap1D(MarginalLaw law, int M) : law_(std::move(law)), M_(M) {
  if (!law_.is_density1d()) throw InvalidArgument("OptimalMap1D: law must be a 1D density");
  if (M < 1) throw InvalidArgument("OptimalMap1D: M must be >= 1");
  const auto& p = std::get<Density1D>(law_.parameters());
  quantiles_.resize(M + 1);
  quantiles_.front() = p.lower;
  quantiles_.back() = p.upper;
  for (int i = 1; i < M; ++i) quantiles_[i] = quantile(law_, static_cast<double>(i) / M);
}

double OptimalMap1D::T(double x) const {
  double u = cdf(law_, x) + 1.0 / M_;
  if (u >= 1.0) u -= 1.0;
  return quantile(law_, std::clamp(u, 0.0, 1.0));
}

double OptimalMap1D::iterate(double x, int i) const {
  if (i < 0) throw InvalidArgument("OptimalMap1D::iterate: i must be >= 0");
  // Work in the quantile variable so round-off does not accumulate through F and F^{-1}.
  if (i % M_ == 0) return x;
  double u = cdf(law_, x) + static_cast<double>(i % M_) / M_;
  if (u >= 1.0) u -= 1.0;
  return quantile(law_, std::clamp(u, 0.0, 1.0));
}

OptimalMap1D build_map(const MarginalLaw& law, int M) { return OptimalMap1D(law, M); }

double optimal_cost(const OptimalMap1D& map, double epsilon, double abs_tol) {
  if (!(epsilon >= 0.0)) throw InvalidArgument("optimal_cost: epsilon must be >= 0");
  const int M = map.marginals();
  if (M == 1) return 0.0;
  std::vector<double> x(M);
  auto integrand = [&](double u) {
    for (int i = 0; i < M; ++i) x[i] = quantile(map.law(), std::clamp(u + static_cast<double>(i) / M, 0.0, 1.0));
    double c = 0.0;
    for (int i = 0; i < M; ++i)
      for (int j = i + 1; j < M; ++j) c += 2.0 / (epsilon + std::abs(x[i] - x[j]));
    return c;
  };
  // By cyclic symmetry every slice [i/M, (i+1)/M] of the quantile axis contributes equally.
  return M * integrate_adaptive(integrand, 0.0, 1.0 / M, abs_tol / M);
}

Eigen::MatrixXd plan_support(const OptimalMap1D& map, int grid) {
  if (grid < 2) throw InvalidArgument("plan_support: grid must be >= 2");
  const double a = map.quantiles().front(), b = map.quantiles().back();
  Eigen::MatrixXd out(grid, map.marginals());
  for (int g = 0; g < grid; ++g) {
    const double x = a + (b - a) * g / (grid - 1);
    out(g, 0) = x;
    for (int i = 1; i < map.marginals(); ++i) out(g, i) = map.iterate(x, i);
  }
  return out;
}

}  // namespace mcot
