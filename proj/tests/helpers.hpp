// Shared oracles for the unit and acceptance tests.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <random>

#include "mcot/basis.hpp"
#include "mcot/model.hpp"

namespace mcot::testing {

inline Eigen::VectorXd central_difference(const std::function<double(const Eigen::VectorXd&)>& f,
                                          const Eigen::VectorXd& x, double h = 1e-6) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd y = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    y(i) = x(i) + h;
    const double fp = f(y);
    y(i) = x(i) - h;
    const double fm = f(y);
    y(i) = x(i);
    g(i) = (fp - fm) / (2 * h);
  }
  return g;
}

/// max_i |a_i - b_i| / max(|a|_inf, 1) (relative to the overall scale of the exact vector)
inline double relative_error(const Eigen::VectorXd& exact, const Eigen::VectorXd& approx) {
  const double scale = std::max(1.0, exact.cwiseAbs().maxCoeff());
  return (exact - approx).cwiseAbs().maxCoeff() / scale;
}

inline std::shared_ptr<const TestBasis> basis_for_dimension(int d, int N = 10) {
  if (d == 1) return std::make_shared<const TestBasis>(legendre_basis(preset_law("mu2_1d"), N));
  return std::make_shared<const TestBasis>(hyperbolic_cross_basis(preset_law("mu2_3d"), 27));
}

/// Random system with points spread at unit scale; adaptive parameters around 1.
inline ParticleSystem random_system(Shape s, bool adaptive, std::mt19937_64& rng,
                                    WeightFunction::Kind kind = WeightFunction::Kind::Squared) {
  std::normal_distribution<double> z(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.5, 1.5);
  Eigen::VectorXd pos(s.position_count());
  for (auto& v : pos) v = (s.d == 1 ? 0.4 : 1.0) * z(rng);
  if (!adaptive) return ParticleSystem(s, pos);
  Eigen::VectorXd a(s.K);
  for (auto& v : a) v = u(rng);
  return ParticleSystem(s, pos, WeightFunction(kind), a);
}

}  // namespace mcot::testing

namespace mcot::testing {
inline double inf_norm_of(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }
}  // namespace mcot::testing
