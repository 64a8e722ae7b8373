#include "mcot/model.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "mcot/error.hpp"

namespace mcot {

std::string WeightFunction::name() const { return kind_ == Kind::Squared ? "squared" : "exponential"; }

double WeightFunction::value(double a) const noexcept { return kind_ == Kind::Squared ? a * a : std::exp(-a); }

double WeightFunction::derivative(double a) const noexcept {
  return kind_ == Kind::Squared ? 2.0 * a : -std::exp(-a);
}

double WeightFunction::preimage(double w) const {
  if (kind_ == Kind::Squared) {
    if (w < 0.0) throw InvalidArgument("squared weight function: negative weight has no preimage");
    return std::sqrt(w);
  }
  if (!(w > 0.0)) throw InvalidArgument("exponential weight function: weight must be > 0");
  return -std::log(w);
}

ParticleSystem::ParticleSystem(Shape shape, Eigen::VectorXd positions) : shape_(shape), coords_(std::move(positions)) {
  if (shape.K < 1 || shape.M < 1 || shape.d < 1) throw InvalidArgument("ParticleSystem: K, M, d must be >= 1");
  if (coords_.size() != shape.position_count()) throw InvalidArgument("ParticleSystem: position count mismatch");
}

ParticleSystem::ParticleSystem(Shape shape, Eigen::VectorXd positions, WeightFunction weight_function,
                               Eigen::VectorXd weight_params)
    : shape_(shape), weight_function_(weight_function) {
  if (shape.K < 1 || shape.M < 1 || shape.d < 1) throw InvalidArgument("ParticleSystem: K, M, d must be >= 1");
  if (positions.size() != shape.position_count()) throw InvalidArgument("ParticleSystem: position count mismatch");
  if (weight_params.size() != shape.K) throw InvalidArgument("ParticleSystem: need one weight parameter per particle");
  coords_.resize(positions.size() + weight_params.size());
  coords_ << positions, weight_params;
}

void ParticleSystem::set_coordinates(const Eigen::VectorXd& coords) {
  if (coords.size() != coords_.size()) throw InvalidArgument("ParticleSystem: coordinate count mismatch");
  coords_ = coords;
}

double ParticleSystem::weight(int k) const noexcept {
  if (!weight_function_) return 1.0 / shape_.K;
  return weight_function_->value(weight_param(k)) / shape_.K;
}

CoulombCost::CoulombCost(double epsilon) : epsilon_(epsilon) {
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw InvalidArgument("CoulombCost: epsilon must be >= 0");
}

double CoulombCost::particle_cost(std::span<const double> X, int M, int d) const {
  double total = 0.0;
  for (int m = 0; m < M; ++m) {
    for (int mp = m + 1; mp < M; ++mp) {
      double r2 = 0.0;
      for (int i = 0; i < d; ++i) {
        const double diff = X[m * d + i] - X[mp * d + i];
        r2 += diff * diff;
      }
      const double denom = epsilon_ + std::sqrt(r2);
      if (denom == 0.0) return std::numeric_limits<double>::infinity();
      total += 2.0 / denom;
    }
  }
  return total;
}

void CoulombCost::add_particle_gradient(std::span<const double> X, int M, int d, double scale,
                                        std::span<double> grad) const {
  for (int m = 0; m < M; ++m) {
    for (int mp = m + 1; mp < M; ++mp) {
      double r2 = 0.0;
      for (int i = 0; i < d; ++i) {
        const double diff = X[m * d + i] - X[mp * d + i];
        r2 += diff * diff;
      }
      const double r = std::sqrt(r2);
      if (r == 0.0) {
        if (epsilon_ == 0.0) throw NonFiniteError("cost_gradient: coincident points with epsilon = 0");
        continue;  // the pair term is flat along every direction at r = 0 up to a kink
      }
      const double denom = epsilon_ + r;
      // d/dx_m of 2/(eps + r) = -2 (x_m - x_m') / (r (eps + r)^2)
      const double f = -2.0 * scale / (r * denom * denom);
      for (int i = 0; i < d; ++i) {
        const double g = f * (X[m * d + i] - X[mp * d + i]);
        grad[m * d + i] += g;
        grad[mp * d + i] -= g;
      }
    }
  }
}

double cost(const CoulombCost& c, const ParticleSystem& sys) {
  const auto& s = sys.shape();
  double total = 0.0;
  for (int k = 0; k < s.K; ++k) {
    const double w = sys.weight(k);
    if (w == 0.0) continue;
    total += w * c.particle_cost(sys.particle(k), s.M, s.d);
  }
  return total;
}

Eigen::VectorXd cost_gradient(const CoulombCost& c, const ParticleSystem& sys) {
  const auto& s = sys.shape();
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(sys.coordinate_count());
  for (int k = 0; k < s.K; ++k) {
    const double w = sys.weight(k);
    std::span<double> g(grad.data() + s.point_offset(k, 0), static_cast<std::size_t>(s.M * s.d));
    if (w != 0.0) c.add_particle_gradient(sys.particle(k), s.M, s.d, w, g);
    if (sys.adaptive()) {
      const double fp = sys.weight_function()->derivative(sys.weight_param(k));
      grad(s.position_count() + k) = fp * c.particle_cost(sys.particle(k), s.M, s.d) / s.K;
    }
  }
  return grad;
}

ConstraintSystem::ConstraintSystem(std::shared_ptr<const TestBasis> basis) : basis_(std::move(basis)) {
  if (!basis_) throw InvalidArgument("ConstraintSystem: null basis");
}

Eigen::VectorXd ConstraintSystem::particle_average(std::span<const double> X, int M) const {
  const int d = basis_->dimension();
  Eigen::VectorXd avg = Eigen::VectorXd::Zero(basis_->size());
  for (int m = 0; m < M; ++m) {
    basis_->accumulate(X.subspan(static_cast<std::size_t>(m) * d, d), 1.0 / M,
                       std::span<double>(avg.data(), avg.size()));
  }
  return avg;
}

Eigen::VectorXd ConstraintSystem::constraints(const ParticleSystem& sys) const {
  const auto& s = sys.shape();
  if (s.d != basis_->dimension()) throw InvalidArgument("constraints: basis dimension does not match particles");
  const int N = basis_->size();
  Eigen::VectorXd gamma = Eigen::VectorXd::Zero(rows(sys));
  std::span<double> acc(gamma.data(), N);
  double mass = 0.0;
  for (int k = 0; k < s.K; ++k) {
    const double wk = sys.weight(k);
    mass += wk;
    if (wk == 0.0) continue;
    for (int m = 0; m < s.M; ++m) basis_->accumulate(sys.point(k, m), wk / s.M, acc);
  }
  gamma.head(N) -= basis_->target_moments();
  if (sys.adaptive()) gamma(N) = mass - 1.0;
  return gamma;
}

void ConstraintSystem::evaluate(const ParticleSystem& sys, Eigen::VectorXd& gamma, Eigen::MatrixXd& jac) const {
  const auto& s = sys.shape();
  if (s.d != basis_->dimension()) throw InvalidArgument("constraints: basis dimension does not match particles");
  const int N = basis_->size();
  const int R = rows(sys);
  gamma.setZero(R);
  jac.setZero(R, sys.coordinate_count());
  std::vector<double> vals(N), grads(static_cast<std::size_t>(N) * s.d);
  Eigen::VectorXd avg(N);
  double mass = 0.0;
  for (int k = 0; k < s.K; ++k) {
    const double wk = sys.weight(k);
    mass += wk;
    avg.setZero();
    for (int m = 0; m < s.M; ++m) {
      basis_->evaluate_with_gradient(sys.point(k, m), vals, grads);
      const int off = s.point_offset(k, m);
      const double scale = wk / s.M;
      for (int n = 0; n < N; ++n) avg(n) += vals[n];
      if (scale != 0.0) {
        for (int i = 0; i < s.d; ++i) {
          double* col = jac.col(off + i).data();
          for (int n = 0; n < N; ++n) col[n] = scale * grads[n * s.d + i];
        }
      }
    }
    avg /= s.M;
    gamma.head(N) += wk * avg;
    if (sys.adaptive()) {
      const double fp = sys.weight_function()->derivative(sys.weight_param(k)) / s.K;
      auto col = jac.col(s.position_count() + k);
      col.head(N) = fp * avg;
      col(N) = fp;
    }
  }
  gamma.head(N) -= basis_->target_moments();
  if (sys.adaptive()) gamma(N) = mass - 1.0;
}

Eigen::MatrixXd ConstraintSystem::jacobian(const ParticleSystem& sys) const {
  Eigen::VectorXd gamma;
  Eigen::MatrixXd jac;
  evaluate(sys, gamma, jac);
  return jac;
}

Eigen::MatrixXd ConstraintSystem::gram(const ParticleSystem& prev, const ParticleSystem& at) const {
  return jacobian(at) * jacobian(prev).transpose();
}

double theta_functional(const ParticleSystem& sys, const std::function<double(double)>& theta) {
  const auto& s = sys.shape();
  double total = 0.0;
  for (int k = 0; k < s.K; ++k) {
    double acc = 0.0;
    for (int m = 0; m < s.M; ++m) {
      const auto x = sys.point(k, m);
      double r2 = 0.0;
      for (double v : x) r2 += v * v;
      acc += theta(std::sqrt(r2));
    }
    total += sys.weight(k) * acc / s.M;
  }
  return total;
}

}  // namespace mcot
