#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace mcot {

/// Density c0 + amplitude * cos(frequency * x) on [lower, upper], zero elsewhere.
/// Covers the uniform law (amplitude = 0) and the cosine-perturbed 1D test laws.
struct Density1D {
  double c0 = 0.5;
  double amplitude = 0.0;
  double frequency = 0.0;
  double lower = -1.0;
  double upper = 1.0;
};

struct GaussianComponent {
  double weight = 1.0;
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
};

struct GaussianMixture {
  std::vector<GaussianComponent> components;
};

struct UniformBall {
  Eigen::VectorXd center;
  double radius = 1.0;
};

using MultiIndex = std::vector<int>;

/// A probability law on R^d with closed-form polynomial moments.
/// Immutable after construction; the constructor validates the invariants.
class MarginalLaw {
 public:
  using Parameters = std::variant<Density1D, GaussianMixture, UniformBall>;

  explicit MarginalLaw(Density1D density);
  explicit MarginalLaw(GaussianMixture mixture);
  explicit MarginalLaw(UniformBall ball);

  int dimension() const noexcept { return dimension_; }
  const Parameters& parameters() const noexcept { return params_; }
  bool is_density1d() const noexcept { return std::holds_alternative<Density1D>(params_); }
  std::string kind_name() const;

  /// Mean and covariance (exact).
  Eigen::VectorXd mean() const;
  Eigen::MatrixXd covariance() const;

 private:
  Parameters params_;
  int dimension_ = 1;
};

/// Named laws used by the experiments: mu1_1d, mu2_1d, mu3_1d (densities on [-1, 1]),
/// mu1_3d (standard Gaussian), mu2_3d, mu3_3d (Gaussian mixtures), mu4_3d (unit ball).
MarginalLaw preset_law(const std::string& name);
std::vector<std::string> preset_law_names();

/// E[x^alpha] in closed form.
double monomial_moment(const MarginalLaw& law, const MultiIndex& alpha);

/// E[prod_i ((x_i - center_i) / scale_i)^alpha_i], exact for every law kind.
double standardized_monomial_moment(const MarginalLaw& law, const MultiIndex& alpha,
                                    std::span<const double> center,
                                    std::span<const double> scale);

/// Table of E[t^alpha] for all alpha in the box [0, max_degree]^d, where
/// t = (x - center) / scale coordinatewise.
class MonomialMomentTable {
 public:
  MonomialMomentTable(const MarginalLaw& law, int max_degree, std::span<const double> center,
                      std::span<const double> scale);
  MonomialMomentTable(const MarginalLaw& law, int max_degree);

  int dimension() const noexcept { return dimension_; }
  int max_degree() const noexcept { return max_degree_; }
  double operator()(const MultiIndex& alpha) const;

 private:
  std::size_t flat_index(const MultiIndex& alpha) const;
  int dimension_;
  int max_degree_;
  std::vector<double> values_;
};

/// CDF of a Density1D law (analytic antiderivative).
double cdf(const MarginalLaw& law, double x);
/// Density value of a Density1D law.
double density(const MarginalLaw& law, double x);
/// Inverse CDF: bisection to width 1e-8, then Newton polish; leftmost root on flat parts.
double quantile(const MarginalLaw& law, double p);

/// Deterministic sampling; returns count x d matrix (one sample per row).
Eigen::MatrixXd sample(const MarginalLaw& law, int count, std::uint64_t seed);

}  // namespace mcot
