#pragma once

#include <Eigen/Dense>
#include <vector>

#include "mcot/measures.hpp"

namespace mcot {

/// Cyclic optimal map for symmetric M-marginal transport on the line with a repulsive
/// cost: T(x) = F^{-1}(F(x) + 1/M), wrapping around at the top quantile.
class OptimalMap1D {
 public:
  OptimalMap1D(MarginalLaw law, int M);

  const MarginalLaw& law() const noexcept { return law_; }
  int marginals() const noexcept { return M_; }
  /// d_0 < d_1 < ... < d_M with d_0, d_M the support endpoints.
  const std::vector<double>& quantiles() const noexcept { return quantiles_; }

  double T(double x) const;
  /// T applied i times (i >= 0).
  double iterate(double x, int i) const;

 private:
  MarginalLaw law_;
  int M_;
  std::vector<double> quantiles_;
};

OptimalMap1D build_map(const MarginalLaw& law, int M);

/// integral of c(x, T x, ..., T^{M-1} x) d mu(x) for the ordered-pair regularized Coulomb cost.
/// Computed in the quantile variable u = F(x), where the integrand is smooth.
double optimal_cost(const OptimalMap1D& map, double epsilon, double abs_tol = 1e-10);

/// grid x M matrix: column 0 is a uniform grid over the support, column i holds T^i(x).
Eigen::MatrixXd plan_support(const OptimalMap1D& map, int grid);

}  // namespace mcot
