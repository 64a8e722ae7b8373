#pragma once

#include <Eigen/Dense>
#include <array>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "mcot/measures.hpp"
#include "mcot/polynomial.hpp"

namespace mcot {

enum class BasisKind { Legendre1D, HyperbolicCross3D, MeanCovariance3D };

std::string to_string(BasisKind kind);

/// How the 1D orthogonal polynomials are scaled.
enum class Normalization {
  DegreeWeighted,  ///< int P_l P_l' dmu = delta_{l,l'} / (l+1)^2
  Plain,           ///< int P_l P_l' dmu = delta_{l,l'}
};

/// phi(x) = scale * prod_j family_j[factor_j](x_j)
struct TensorTerm {
  std::vector<int> factors;
  double scale = 1.0;
};

/// Ordered family of polynomial test functions on R^d with their target moments.
/// Every function is a scaled tensor product of members of per-coordinate families,
/// so values and gradients are exact. Immutable; evaluation is thread-safe.
class TestBasis {
 public:
  TestBasis(BasisKind kind, std::vector<PolynomialFamily1D> families, std::vector<TensorTerm> terms,
            Eigen::VectorXd target_moments);

  BasisKind kind() const noexcept { return kind_; }
  int size() const noexcept { return static_cast<int>(terms_.size()); }
  int dimension() const noexcept { return static_cast<int>(families_.size()); }
  const Eigen::VectorXd& target_moments() const noexcept { return targets_; }
  const std::vector<PolynomialFamily1D>& families() const noexcept { return families_; }
  const std::vector<TensorTerm>& terms() const noexcept { return terms_; }
  std::string label(int n) const;

  /// values[n] = phi_n(x).
  void evaluate(std::span<const double> x, std::span<double> values) const;
  /// Adds `weight * phi_n(x)` to accum[n].
  void accumulate(std::span<const double> x, double weight, std::span<double> accum) const;
  /// values[n] = phi_n(x); gradients[n * d + i] = d phi_n / d x_i.
  void evaluate_with_gradient(std::span<const double> x, std::span<double> values,
                              std::span<double> gradients) const;

  /// E_law[phi_n] for all n, by the exact moment routines of `measures`.
  Eigen::VectorXd integrate(const MarginalLaw& law) const;

 private:
  BasisKind kind_;
  std::vector<PolynomialFamily1D> families_;
  std::vector<TensorTerm> terms_;
  Eigen::VectorXd targets_;
  int max_family_size_ = 0;
};

/// phi_n = sqrt(2n + 1/2) / (n + 1) * P_n, n = 1..N, against a 1D law.
TestBasis legendre_basis(const MarginalLaw& law, int N);

/// Polynomials P_0..P_max_degree orthogonal w.r.t. the j-th coordinate marginal of `law`,
/// in the standardized variable t = (x_j - mean_j) / sd_j. Modified Gram-Schmidt with
/// re-orthogonalization on the exact Hankel moment inner product.
PolynomialFamily1D orthonormal_marginal_polynomials(const MarginalLaw& law, int coordinate, int max_degree,
                                                    Normalization normalization = Normalization::DegreeWeighted);

/// All (l1, l2, l3) with (l1+1)(l2+1)(l3+1) <= threshold, (0,0,0) excluded, sorted by
/// product then lexicographically.
std::vector<std::array<int, 3>> hyperbolic_cross_indices(int threshold);

/// Number of test functions N (without the constant) for the threshold, i.e. the index count.
int hyperbolic_cross_size(int threshold);

/// Threshold L with hyperbolic_cross_size(L) == N; throws if no such L exists.
int hyperbolic_cross_threshold(int N);

TestBasis hyperbolic_cross_basis(const MarginalLaw& law, int N,
                                 Normalization normalization = Normalization::DegreeWeighted);

/// x_1, x_2, x_3, x_1^2, x_2^2, x_3^2, x_1 x_2, x_1 x_3, x_2 x_3.
TestBasis mean_covariance_basis(const MarginalLaw& law);

}  // namespace mcot
