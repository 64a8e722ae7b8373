#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "mcot/error.hpp"
#include "mcot/oracle1d.hpp"
#include "mcot/quadrature.hpp"

using namespace mcot;

namespace {

// Kolmogorov-Smirnov distance between a sample and a CDF restricted to [lo, hi].
double ks_distance(std::vector<double> xs, const MarginalLaw& law, double lo, double hi) {
  std::sort(xs.begin(), xs.end());
  const double Flo = cdf(law, lo), mass = cdf(law, hi) - Flo;
  const double n = static_cast<double>(xs.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double F = (cdf(law, xs[i]) - Flo) / mass;
    worst = std::max({worst, std::abs(F - i / n), std::abs(F - (i + 1) / n)});
  }
  return worst;
}

// Ordered-pair regularized Coulomb cost of one orbit.
double orbit_cost(const std::vector<double>& x, double eps) {
  double c = 0.0;
  for (std::size_t a = 0; a < x.size(); ++a)
    for (std::size_t b = 0; b < x.size(); ++b)
      if (a != b) c += 1.0 / (eps + std::abs(x[a] - x[b]));
  return c;
}

}  // namespace

TEST_CASE("uniform law with two marginals") {
  const auto law = preset_law("mu1_1d");
  const OptimalMap1D map = build_map(law, 2);
  CHECK(map.T(-0.5) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(map.T(0.25) == doctest::Approx(-0.75).epsilon(1e-14));
  CHECK(std::abs(optimal_cost(map, 0.1) - 2.0 / 1.1) <= 1e-8);
  CHECK(std::abs(optimal_cost(map, 0.0) - 2.0) <= 1e-8);
  const Eigen::MatrixXd plan = plan_support(map, 5);  // grid -1, -0.5, 0, 0.5, 1
  CHECK(plan(1, 0) == doctest::Approx(-0.5));
  CHECK(plan(1, 1) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("uniform quantiles") {
  const OptimalMap1D map = build_map(preset_law("mu1_1d"), 5);
  REQUIRE(map.quantiles().size() == 6);
  for (int i = 0; i <= 5; ++i) CHECK(map.quantiles()[i] == doctest::Approx(-1.0 + 2.0 * i / 5).epsilon(1e-14));
}

TEST_CASE("three marginals against a direct quadrature of the orbit cost") {
  // For the uniform law and M = 3 the orbit of x in [-1, -1/3) is (x, x + 2/3, x + 4/3):
  // spacings 2/3, 2/3, 4/3 for every x, so the integrand is constant.
  const OptimalMap1D map = build_map(preset_law("mu1_1d"), 3);
  const double want = 2.0 * (1.5 + 1.5 + 0.75);
  CHECK(optimal_cost(map, 0.0) == doctest::Approx(want).epsilon(1e-10));
  for (const auto* name : {"mu2_1d", "mu3_1d"}) {
    const auto law = preset_law(name);
    for (int M : {3, 5}) {
      const OptimalMap1D m = build_map(law, M);
      // Independent oracle: composite Gauss-Legendre in x over the support.
      const QuadratureRule q = composite_gauss_legendre(20, 400, -1.0, 1.0);
      double ref = 0.0;
      for (std::size_t i = 0; i < q.nodes.size(); ++i) {
        std::vector<double> orbit(M);
        for (int j = 0; j < M; ++j) orbit[j] = m.iterate(q.nodes[i], j);
        ref += q.weights[i] * density(law, q.nodes[i]) * orbit_cost(orbit, 0.1);
      }
      CAPTURE(std::string(name));
      CAPTURE(M);
      CHECK(optimal_cost(m, 0.1) == doctest::Approx(ref).epsilon(1e-6));
    }
  }
}

TEST_CASE("quantile masses, monotonicity and cyclicity") {
  for (const auto* name : {"mu1_1d", "mu2_1d", "mu3_1d"}) {
    const auto law = preset_law(name);
    for (int M : {2, 3, 5, 10}) {
      const OptimalMap1D map = build_map(law, M);
      const auto& dq = map.quantiles();
      for (int i = 0; i < M; ++i) CHECK(std::abs(cdf(law, dq[i + 1]) - cdf(law, dq[i]) - 1.0 / M) <= 1e-10);
      // Increasing inside each piece.
      for (int i = 0; i < M; ++i) {
        double prev = -INFINITY;
        for (int s = 1; s < 50; ++s) {
          const double x = dq[i] + (dq[i + 1] - dq[i]) * s / 50.0;
          CHECK(map.T(x) > prev);
          prev = map.T(x);
        }
      }
      const Eigen::MatrixXd xs = sample(law, 1000, 17);
      double worst = 0.0;
      for (Eigen::Index k = 0; k < xs.rows(); ++k) {
        double y = xs(k, 0);
        for (int i = 0; i < M; ++i) y = map.T(y);
        worst = std::max(worst, std::abs(y - xs(k, 0)));
      }
      CAPTURE(std::string(name));
      CAPTURE(M);
      CHECK(worst <= 1e-8);
      const Eigen::MatrixXd plan = plan_support(map, 101);
      for (Eigen::Index r = 0; r < plan.rows(); ++r) {
        CHECK(std::abs(map.iterate(plan(r, 0), M) - plan(r, 0)) <= 1e-8);
        CHECK((plan.row(r).array() >= -1.0 - 1e-12).all());
        CHECK((plan.row(r).array() <= 1.0 + 1e-12).all());
      }
    }
  }
}

TEST_CASE("pushforward preserves the law") {
  for (const auto* name : {"mu1_1d", "mu2_1d", "mu3_1d"}) {
    const auto law = preset_law(name);
    const int M = 4;
    const OptimalMap1D map = build_map(law, M);
    const Eigen::MatrixXd xs = sample(law, 100000, 23);
    std::vector<double> image(xs.rows());
    for (Eigen::Index k = 0; k < xs.rows(); ++k) image[k] = map.T(xs(k, 0));
    CAPTURE(std::string(name));
    CHECK(ks_distance(image, law, -1.0, 1.0) <= 0.01);
    // Piece i is carried onto piece i + 1.
    const auto& dq = map.quantiles();
    for (int i = 0; i + 2 <= M; ++i) {
      std::vector<double> piece;
      for (Eigen::Index k = 0; k < xs.rows(); ++k)
        if (xs(k, 0) >= dq[i] && xs(k, 0) < dq[i + 1]) piece.push_back(map.T(xs(k, 0)));
      CHECK(ks_distance(piece, law, dq[i + 1], dq[i + 2]) <= 0.01 * std::sqrt(static_cast<double>(M)));
    }
  }
}

TEST_CASE("invalid inputs") {
  CHECK_THROWS_AS(build_map(preset_law("mu1_3d"), 2), InvalidArgument);
  CHECK_THROWS_AS(build_map(preset_law("mu1_1d"), 0), InvalidArgument);
  CHECK_THROWS_AS(optimal_cost(build_map(preset_law("mu1_1d"), 2), -0.1), InvalidArgument);
  CHECK_THROWS_AS(plan_support(build_map(preset_law("mu1_1d"), 2), 1), InvalidArgument);
}
