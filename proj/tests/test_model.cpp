#include <doctest.h>

#include <algorithm>
#include <array>
#include <numeric>
#include <random>

#include "helpers.hpp"
#include "mcot/error.hpp"
#include "mcot/model.hpp"

using namespace mcot;
using namespace mcot::testing;

namespace {

ParticleSystem line_system(std::initializer_list<double> xs, int K = 1) {
  const int M = static_cast<int>(xs.size());
  Eigen::VectorXd pos(K * M);
  for (int k = 0; k < K; ++k) std::copy(xs.begin(), xs.end(), pos.data() + k * M);
  return ParticleSystem(Shape{K, M, 1}, pos);
}

}  // namespace

TEST_CASE("cost of small configurations") {
  CHECK(cost(CoulombCost(0.1), line_system({0.0, 1.0})) == doctest::Approx(2.0 / 1.1).epsilon(1e-15));
  CHECK(cost(CoulombCost(0.0), line_system({0.0, 1.0, 2.0})) == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(cost(CoulombCost(0.1), line_system({0.0, 1.0}, 2)) == doctest::Approx(2.0 / 1.1).epsilon(1e-15));
  CHECK(std::isinf(cost(CoulombCost(0.0), line_system({0.5, 0.5}))));
  CHECK(std::isfinite(cost(CoulombCost(0.1), line_system({0.5, 0.5}))));
  CHECK_THROWS_AS(cost_gradient(CoulombCost(0.0), line_system({0.5, 0.5})), NonFiniteError);
  CHECK_THROWS_AS(CoulombCost(-1.0), InvalidArgument);
}

TEST_CASE("cost gradient") {
  const Eigen::VectorXd g = cost_gradient(CoulombCost(0.1), line_system({0.0, 1.0}));
  CHECK(g(0) == doctest::Approx(2.0 / 1.21).epsilon(1e-14));
  CHECK(g(1) == doctest::Approx(-2.0 / 1.21).epsilon(1e-14));

  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const int d = trial % 2 ? 3 : 1;
    const int M = std::array{2, 5, 10}[trial % 3];
    const bool adaptive = trial % 4 >= 2;
    ParticleSystem sys = random_system({3, M, d}, adaptive, rng,
                                       trial % 8 >= 4 ? WeightFunction::Kind::Exponential : WeightFunction::Kind::Squared);
    const CoulombCost c(trial % 5 == 0 ? 0.0 : 0.1);
    const Eigen::VectorXd exact = cost_gradient(c, sys);
    ParticleSystem probe = sys;
    const Eigen::VectorXd fd = central_difference([&](const Eigen::VectorXd& y) {
      probe.set_coordinates(y);
      return cost(c, probe);
    }, sys.coordinates());
    CAPTURE(trial);
    CHECK(relative_error(exact, fd) <= 1e-6);
    // Translation invariance inside each particle.
    for (int k = 0; k < 3; ++k)
      for (int i = 0; i < d; ++i) {
        double s = 0.0;
        for (int m = 0; m < M; ++m) s += exact(sys.shape().point_offset(k, m) + i);
        CHECK(std::abs(s) <= 1e-12 * std::max(1.0, exact.cwiseAbs().maxCoeff()));
      }
  }
}

TEST_CASE("cost symmetries") {
  std::mt19937_64 rng(5);
  ParticleSystem sys = random_system({4, 6, 3}, true, rng);
  const CoulombCost c(1e-3);
  const double base = cost(c, sys);
  const Shape s = sys.shape();
  for (int t = 0; t < 50; ++t) {
    std::vector<int> perm(s.M);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    const int k = t % s.K;
    Eigen::VectorXd y = sys.coordinates();
    for (int m = 0; m < s.M; ++m)
      for (int i = 0; i < s.d; ++i) y(s.point_offset(k, m) + i) = sys.coordinates()(s.point_offset(k, perm[m]) + i);
    ParticleSystem p = sys;
    p.set_coordinates(y);
    CHECK(cost(c, p) == doctest::Approx(base).epsilon(1e-13));
  }
  // Relabel particles together with their weights.
  const auto basis = basis_for_dimension(3);
  const ConstraintSystem cs(basis);
  Eigen::VectorXd y = sys.coordinates();
  const int block = s.M * s.d;
  for (int k = 0; k < s.K; ++k) {
    const int src = s.K - 1 - k;
    y.segment(k * block, block) = sys.coordinates().segment(src * block, block);
    y(s.position_count() + k) = sys.weight_param(src);
  }
  ParticleSystem r = sys;
  r.set_coordinates(y);
  CHECK(cost(c, r) == doctest::Approx(base).epsilon(1e-13));
  CHECK((cs.constraints(r) - cs.constraints(sys)).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("constraints and Jacobian") {
  {
    const auto b = std::make_shared<const TestBasis>(legendre_basis(preset_law("mu1_1d"), 1));
    const ConstraintSystem cs(b);
    const ParticleSystem sys(Shape{1, 1, 1}, Eigen::VectorXd::Zero(1));
    CHECK(cs.constraints(sys).size() == 1);
    CHECK(std::abs(cs.constraints(sys)(0)) < 1e-16);
  }
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const int d = trial % 2 ? 3 : 1;
    const int M = std::array{2, 5, 10}[trial % 3];
    const bool adaptive = trial % 4 >= 2;
    const auto basis = basis_for_dimension(d);
    const ConstraintSystem cs(basis);
    ParticleSystem sys = random_system({4, M, d}, adaptive, rng);
    const int N = basis->size();
    CHECK(cs.rows(sys) == N + (adaptive ? 1 : 0));

    // Naive re-summation.
    Eigen::VectorXd naive = -basis->target_moments();
    std::vector<double> v(N);
    double mass = 0.0;
    for (int k = 0; k < 4; ++k) {
      mass += sys.weight(k);
      for (int m = 0; m < M; ++m) {
        basis->evaluate(sys.point(k, m), v);
        for (int n = 0; n < N; ++n) naive(n) += sys.weight(k) / M * v[n];
      }
    }
    const Eigen::VectorXd gamma = cs.constraints(sys);
    CHECK((gamma.head(N) - naive).cwiseAbs().maxCoeff() <= 1e-14 * std::max(1.0, naive.cwiseAbs().maxCoeff()));
    if (adaptive) CHECK(gamma(N) == doctest::Approx(mass - 1.0).epsilon(1e-14));

    const Eigen::MatrixXd J = cs.jacobian(sys);
    CHECK(J.rows() == cs.rows(sys));
    CHECK(J.cols() == sys.coordinate_count());
    ParticleSystem probe = sys;
    for (int r = 0; r < J.rows(); ++r) {
      const Eigen::VectorXd fd = central_difference([&](const Eigen::VectorXd& y) {
        probe.set_coordinates(y);
        return cs.constraints(probe)(r);
      }, sys.coordinates());
      CAPTURE(trial);
      CAPTURE(r);
      CHECK(relative_error(J.row(r).transpose(), fd) <= 1e-6);
    }
    // The column of a point only depends on that point.
    ParticleSystem moved = sys;
    Eigen::VectorXd y = sys.coordinates();
    y(0) += 0.3;
    moved.set_coordinates(y);
    const Eigen::MatrixXd J2 = cs.jacobian(moved);
    const int P = sys.shape().position_count();
    CHECK((J2.middleCols(d, P - d) - J.middleCols(d, P - d)).cwiseAbs().maxCoeff() == 0.0);
    // Gram of a state with itself is symmetric positive definite for generic points.
    const Eigen::MatrixXd G = cs.gram(sys, sys);
    CHECK((G - G.transpose()).cwiseAbs().maxCoeff() <= 1e-13 * G.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("adaptive weights at the preimage of one reproduce fixed weights") {
  std::mt19937_64 rng(13);
  for (auto kind : {WeightFunction::Kind::Squared, WeightFunction::Kind::Exponential}) {
    const WeightFunction f(kind);
    const ParticleSystem fixed = random_system({5, 3, 1}, false, rng);
    const ParticleSystem adapt(fixed.shape(), fixed.positions(), f, Eigen::VectorXd::Constant(5, f.preimage(1.0)));
    const ConstraintSystem cs(basis_for_dimension(1));
    const Eigen::VectorXd a = cs.constraints(adapt);
    const Eigen::VectorXd b = cs.constraints(fixed);
    CHECK((a.head(b.size()) - b).cwiseAbs().maxCoeff() <= 1e-15);
    CHECK(std::abs(a(b.size())) <= 1e-15);
    CHECK(cost(CoulombCost(0.1), adapt) == doctest::Approx(cost(CoulombCost(0.1), fixed)).epsilon(1e-15));
  }
  CHECK_THROWS_AS(WeightFunction(WeightFunction::Kind::Exponential).preimage(0.0), InvalidArgument);
}

TEST_CASE("theta functional") {
  CHECK(theta_functional(ParticleSystem(Shape{2, 3, 3}, Eigen::VectorXd::Zero(18))) == 0.0);
  CHECK(theta_functional(line_system({1.0, -1.0})) == doctest::Approx(1.0));
  std::mt19937_64 rng(21);
  const ParticleSystem sys = random_system({6, 4, 3}, true, rng);
  double naive = 0.0;
  for (int k = 0; k < 6; ++k)
    for (int m = 0; m < 4; ++m) {
      const auto x = sys.point(k, m);
      naive += sys.weight(k) / 4 * (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
    }
  CHECK(theta_functional(sys) == doctest::Approx(naive).epsilon(1e-14));
}
