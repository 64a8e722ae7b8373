#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>

#include "mcot/basis.hpp"

namespace mcot {

struct Shape {
  int K = 1;  ///< particles
  int M = 1;  ///< marginals (points per particle)
  int d = 1;  ///< space dimension

  int position_count() const noexcept { return K * M * d; }
  int point_offset(int k, int m) const noexcept { return (k * M + m) * d; }
};

/// Maps an unconstrained parameter a to a nonnegative weight factor f(a).
class WeightFunction {
 public:
  enum class Kind { Squared, Exponential };

  explicit WeightFunction(Kind kind) : kind_(kind) {}
  Kind kind() const noexcept { return kind_; }
  std::string name() const;

  double value(double a) const noexcept;
  double derivative(double a) const noexcept;
  /// Some a with f(a) = w (w > 0 for Exponential, w >= 0 for Squared).
  double preimage(double w) const;

 private:
  Kind kind_;
};

/// K weighted points of (R^d)^M. Coordinates are stored flat: positions first
/// (index ((k*M)+m)*d + i), then the K weight parameters in adaptive mode.
/// Fixed-weight particles carry weight 1/K; adaptive ones carry f(a_k)/K.
class ParticleSystem {
 public:
  ParticleSystem(Shape shape, Eigen::VectorXd positions);
  ParticleSystem(Shape shape, Eigen::VectorXd positions, WeightFunction weight_function,
                 Eigen::VectorXd weight_params);

  const Shape& shape() const noexcept { return shape_; }
  bool adaptive() const noexcept { return weight_function_.has_value(); }
  const std::optional<WeightFunction>& weight_function() const noexcept { return weight_function_; }

  int coordinate_count() const noexcept { return static_cast<int>(coords_.size()); }
  const Eigen::VectorXd& coordinates() const noexcept { return coords_; }
  /// Replaces all coordinates; the size must not change.
  void set_coordinates(const Eigen::VectorXd& coords);

  auto positions() const { return coords_.head(shape_.position_count()); }
  double weight_param(int k) const { return coords_(shape_.position_count() + k); }
  double weight(int k) const noexcept;
  std::span<const double> point(int k, int m) const noexcept {
    return {coords_.data() + shape_.point_offset(k, m), static_cast<std::size_t>(shape_.d)};
  }
  std::span<const double> particle(int k) const noexcept {
    return {coords_.data() + shape_.point_offset(k, 0), static_cast<std::size_t>(shape_.M * shape_.d)};
  }

 private:
  Shape shape_;
  std::optional<WeightFunction> weight_function_;
  Eigen::VectorXd coords_;
};

/// c(X) = sum over ordered pairs m != m' of 1 / (epsilon + |x_m - x_m'|).
class CoulombCost {
 public:
  explicit CoulombCost(double epsilon);
  double epsilon() const noexcept { return epsilon_; }

  /// Cost of one particle X given as M*d contiguous coordinates; +infinity for
  /// coincident points when epsilon = 0.
  double particle_cost(std::span<const double> X, int M, int d) const;
  /// Adds scale * grad c(X) into grad (M*d entries).
  void add_particle_gradient(std::span<const double> X, int M, int d, double scale, std::span<double> grad) const;

 private:
  double epsilon_;
};

/// sum_k w_k c(X^k)
double cost(const CoulombCost& c, const ParticleSystem& sys);
/// Gradient w.r.t. all coordinates (positions, then weight parameters in adaptive mode).
Eigen::VectorXd cost_gradient(const CoulombCost& c, const ParticleSystem& sys);

/// The averaged moment constraints Gamma^K of a particle system against a test basis;
/// adaptive systems get one extra mass row sum_k f(a_k)/K - 1 appended last.
class ConstraintSystem {
 public:
  explicit ConstraintSystem(std::shared_ptr<const TestBasis> basis);

  const TestBasis& basis() const noexcept { return *basis_; }
  std::shared_ptr<const TestBasis> basis_ptr() const noexcept { return basis_; }
  int rows(const ParticleSystem& sys) const noexcept { return basis_->size() + (sys.adaptive() ? 1 : 0); }

  Eigen::VectorXd constraints(const ParticleSystem& sys) const;
  /// Dense Jacobian, rows = constraints, columns = coordinates.
  Eigen::MatrixXd jacobian(const ParticleSystem& sys) const;
  /// Computes both in one pass over the points.
  void evaluate(const ParticleSystem& sys, Eigen::VectorXd& gamma, Eigen::MatrixXd& jac) const;
  /// jacobian(at) * jacobian(prev)^T
  Eigen::MatrixXd gram(const ParticleSystem& prev, const ParticleSystem& at) const;

  /// (1/M) sum_m phi_n(x_m) for one particle.
  Eigen::VectorXd particle_average(std::span<const double> X, int M) const;

 private:
  std::shared_ptr<const TestBasis> basis_;
};

/// sum_k w_k (1/M) sum_m theta(|x^k_m|), default theta(r) = r^2.
double theta_functional(const ParticleSystem& sys,
                        const std::function<double(double)>& theta = [](double r) { return r * r; });

}  // namespace mcot
