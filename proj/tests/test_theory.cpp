#include <doctest.h>

#include <random>
#include <set>

#include "helpers.hpp"
#include "mcot/error.hpp"
#include "mcot/init.hpp"
#include "mcot/langevin.hpp"
#include "mcot/theory.hpp"

using namespace mcot;
using namespace mcot::testing;

namespace {

WeightedAtomSet random_atoms(int K, int M, int d, std::mt19937_64& rng) {
  std::normal_distribution<double> z;
  std::uniform_real_distribution<double> u(0.1, 1.0);
  WeightedAtomSet s;
  s.M = M;
  s.d = d;
  s.weights.resize(K);
  s.atoms.resize(K, M * d);
  for (auto& w : s.weights) w = u(rng);
  s.weights /= s.weights.sum();
  for (auto& v : s.atoms.reshaped()) v = 0.5 * z(rng);
  return s;
}

// Brute-force sums of the functionals: phi-averages, mass, cost, theta-average.
Eigen::VectorXd functionals(const WeightedAtomSet& s, const ConstraintSystem& cs, const CoulombCost& c,
                            const ThetaFn& theta) {
  const int N = cs.basis().size();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(N + 3);
  std::vector<double> v(N);
  for (int k = 0; k < s.size(); ++k) {
    const Eigen::VectorXd X = s.atoms.row(k).transpose();
    double th = 0.0;
    for (int m = 0; m < s.M; ++m) {
      const std::span<const double> x(X.data() + m * s.d, static_cast<std::size_t>(s.d));
      cs.basis().evaluate(x, v);
      for (int n = 0; n < N; ++n) out(n) += s.weights(k) * v[n] / s.M;
      double r2 = 0.0;
      for (double xi : x) r2 += xi * xi;
      th += theta(std::sqrt(r2)) / s.M;
    }
    out(N) += s.weights(k);
    out(N + 1) += s.weights(k) * c.particle_cost({X.data(), static_cast<std::size_t>(X.size())}, s.M, s.d);
    out(N + 2) += s.weights(k) * th;
  }
  return out;
}

PathState feasible_state(const ConstraintSystem& cs, Shape shape, std::uint64_t seed, int langevin_steps = 0) {
  InitOptions opt;
  InitResult r = initialize(preset_law("mu2_1d"), cs, shape, WeightFunction(WeightFunction::Kind::Squared), opt, seed);
  REQUIRE(r.report.converged);
  if (langevin_steps > 0) {
    LangevinParams p;
    p.dt0 = 1e-3;
    p.n_max = langevin_steps;
    p.seed = seed;
    const RunLog log = run_langevin(r.system, CoulombCost(0.1), cs, p);
    r.system.set_coordinates(log.best_state);
  }
  return state_from_system(r.system);
}

}  // namespace

TEST_CASE("tchakaloff reduction keeps every functional") {
  std::mt19937_64 rng(1);
  const ThetaFn abs_theta = [](double r) { return r; };
  for (int trial = 0; trial < 40; ++trial) {
    const int d = trial % 2 ? 3 : 1;
    const int M = 1 + trial % 4;
    const auto basis = d == 1 ? std::make_shared<const TestBasis>(legendre_basis(preset_law("mu1_1d"), 1 + trial % 6))
                              : basis_for_dimension(3);
    const ConstraintSystem cs(basis);
    const CoulombCost c(0.1);
    const WeightedAtomSet in = random_atoms(20 + 3 * trial, M, d, rng);
    const ReductionResult out = tchakaloff_reduce(in, cs, c, abs_theta);
    const int N = basis->size();
    CAPTURE(trial);
    CHECK(out.set.size() <= N + 3);
    CHECK((out.set.weights.array() > 0.0).all());
    CHECK(out.steps <= in.size() - out.set.size());
    CHECK((functionals(out.set, cs, c, abs_theta) - functionals(in, cs, c, abs_theta)).cwiseAbs().maxCoeff() <= 1e-10);
    std::set<int> seen;
    for (std::size_t j = 0; j < out.indices.size(); ++j) {
      CHECK(seen.insert(out.indices[j]).second);
      CHECK(out.set.atoms.row(j) == in.atoms.row(out.indices[j]));
    }
  }
}

TEST_CASE("tchakaloff reduction of a small set is the identity") {
  std::mt19937_64 rng(2);
  const ConstraintSystem cs(std::make_shared<const TestBasis>(legendre_basis(preset_law("mu1_1d"), 1)));
  const WeightedAtomSet in = random_atoms(4, 1, 1, rng);
  const ReductionResult out = tchakaloff_reduce(in, cs, CoulombCost(0.1), [](double r) { return r; });
  CHECK(out.set.size() == 4);
  CHECK(out.steps == 0);
  CHECK(out.set.weights == in.weights);
  CHECK_THROWS_AS(tchakaloff_reduce(WeightedAtomSet{1, 1, -in.weights, in.atoms}, cs, CoulombCost(0.1)),
                  InvalidArgument);
}

TEST_CASE("monotone path between identical endpoints") {
  const ConstraintSystem cs(std::make_shared<const TestBasis>(legendre_basis(preset_law("mu2_1d"), 2)));
  const Shape shape{10, 2, 1};
  const PathState a = feasible_state(cs, shape, 1);
  const PolygonalPath path = monotone_path(a, a, shape, cs, CoulombCost(0.1));
  const PathCheck chk = check_path(path, cs, CoulombCost(0.1));
  CHECK(chk.ok());
  const double c0 = chk.cost.front();
  for (double c : chk.cost) CHECK(std::abs(c - c0) <= 1e-9);
  CHECK(path.at(0.0).positions == a.positions);
  CHECK(path.at(1.0).positions == a.positions);
}

TEST_CASE("monotone paths between random feasible endpoints") {
  const ConstraintSystem cs(std::make_shared<const TestBasis>(legendre_basis(preset_law("mu2_1d"), 2)));
  const Shape shape{10, 2, 1};
  const CoulombCost c(0.1);
  for (int trial = 0; trial < 10; ++trial) {
    const PathState a = feasible_state(cs, shape, 100 + trial);
    const PathState b = feasible_state(cs, shape, 200 + trial, trial % 2 ? 50 : 0);
    const PolygonalPath path = monotone_path(a, b, shape, cs, c);
    const PathCheck chk = check_path(path, cs, c);
    CAPTURE(trial);
    CHECK(chk.ok());
    CHECK(chk.max_residual <= 1e-9);
    CHECK(chk.monotonicity_violation <= 1e-9);
    CHECK((path.at(0.0).positions - a.positions).cwiseAbs().maxCoeff() == 0.0);
    CHECK((path.at(1.0).positions - b.positions).cwiseAbs().maxCoeff() == 0.0);
    CHECK((path.at(1.0).weights - b.weights).cwiseAbs().maxCoeff() == 0.0);
    for (std::size_t i = 1; i < path.t.size(); ++i) CHECK(path.t[i] > path.t[i - 1]);
  }
}

TEST_CASE("monotone path preconditions") {
  const ConstraintSystem cs(std::make_shared<const TestBasis>(legendre_basis(preset_law("mu2_1d"), 2)));
  const Shape small{9, 2, 1};
  const PathState a = feasible_state(cs, small, 3);
  CHECK_THROWS_AS(monotone_path(a, a, small, cs, CoulombCost(0.1)), InvalidArgument);
  const Shape shape{10, 2, 1};
  PathState b = feasible_state(cs, shape, 4);
  b.positions.array() += 0.05;
  CHECK_THROWS_AS(monotone_path(b, b, shape, cs, CoulombCost(0.1)), InvalidArgument);
}
