// Acceptance runner: one PASS/FAIL line per criterion. Long experiment runs write their
// artifacts under <build>/tests/acceptance_runs so failures can be inspected afterwards.
//
//   acceptance            all criteria
//   acceptance 3 4        selected criteria only
#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "mcot/config.hpp"
#include "mcot/error.hpp"
#include "mcot/experiment.hpp"
#include "mcot/init.hpp"
#include "mcot/langevin.hpp"
#include "mcot/nnls.hpp"
#include "mcot/oracle1d.hpp"
#include "mcot/projection.hpp"
#include "mcot/theory.hpp"

namespace fs = std::filesystem;
using namespace mcot;
using namespace mcot::testing;

namespace {

const fs::path kConfigs = fs::path(MCOT_SOURCE_DIR) / "configs" / "acceptance";
const fs::path kOut = fs::path(MCOT_BINARY_DIR) / "acceptance_runs";

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

ExperimentResult run_config(const std::string& file) {
  const ExperimentConfig cfg = load_config(kConfigs / file);
  const fs::path dir = kOut / cfg.name;
  fs::remove_all(dir);
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentResult r;
  try {
    r = run_experiment(cfg, dir);
  } catch (const Error& e) {
    r.name = cfg.name;
    r.exit_code = static_cast<int>(e.code());
    r.error = e.what();
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("    %-24s exit %d  best %.10g  (%.0f s)\n", cfg.name.c_str(), r.exit_code, r.best_cost, secs);
  std::fflush(stdout);
  return r;
}

Outcome within(const std::vector<std::pair<std::string, double>>& runs, const std::vector<double>& targets, double rel) {
  Outcome o{true, ""};
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const double dev = (runs[i].second - targets[i]) / targets[i];
    o.pass = o.pass && std::abs(dev) <= rel;
    o.detail += fmt("%s%s %.6g vs %.6g (%+.2f%%)", i ? "; " : "", runs[i].first.c_str(), runs[i].second, targets[i],
                    100 * dev);
  }
  return o;
}

// 1. Hyperbolic cross N=27, standard Gaussian, M=10.
Outcome table3() {
  const ExperimentResult a = run_config("table3_k40.json");
  const ExperimentResult b = run_config("table3_k320.json");
  if (a.exit_code || b.exit_code) return {false, "run failed: " + a.error + b.error};
  return within({{"K=40", a.best_cost}, {"K=320", b.best_cost}}, {12.1981977, 12.0855486}, 0.01);
}

// 2. Mean-covariance (N=9) and hyperbolic N=52, standard Gaussian, M=10.
Outcome table2() {
  const ExperimentResult a = run_config("table2_meancov.json");
  const ExperimentResult b = run_config("table2_n52.json");
  if (a.exit_code || b.exit_code) return {false, "run failed: " + a.error + b.error};
  return within({{"N=9", a.best_cost}, {"N=52", b.best_cost}}, {10.65, 12.50}, 0.03);
}

// 3. 1D relaxation sandwich below the exact oracle.
Outcome sandwich() {
  Outcome o{true, ""};
  const double analytic = optimal_cost(build_map(preset_law("mu1_1d"), 2), 0.1);
  const bool oracle_ok = std::abs(analytic - 2.0 / 1.1) <= 1e-8;
  o.pass = oracle_ok;
  o.detail = fmt("oracle(mu1, M=2) err %.1e", std::abs(analytic - 2.0 / 1.1));
  for (const char* law : {"mu1_1d", "mu2_1d", "mu3_1d"}) {
    std::vector<double> best;
    bool ran = true;
    for (int N : {10, 20, 40}) {
      const ExperimentResult r = run_config(fmt("sandwich_%s_N%d.json", law, N));
      ran = ran && r.exit_code == 0;
      best.push_back(r.best_cost);
    }
    const double I = optimal_cost(build_map(preset_law(law), 5), 0.1);
    const double delta = 0.01 * I;
    const bool below = *std::max_element(best.begin(), best.end()) <= 1.01 * I;
    const bool nested = best[0] <= best[1] + delta && best[1] <= best[2] + delta && best[2] <= I + delta;
    const double gap40 = (I - best[2]) / I;
    const bool ok = ran && below && nested && std::abs(gap40) <= 0.02;
    o.pass = o.pass && ok;
    o.detail += fmt("; %s oracle %.6f gaps %.2f%%/%.2f%%/%.2f%%", law, I, 100 * (I - best[0]) / I,
                    100 * (I - best[1]) / I, 100 * gap40);
  }
  return o;
}

// 4. Gradient and Jacobian against central differences.
Outcome derivatives() {
  std::mt19937_64 rng(2024);
  double worst_grad = 0.0, worst_jac = 0.0;
  int systems = 0;
  // 20 systems cycling through the 12 (d, M, mode) combinations.
  for (; systems < 20; ++systems) {
    const int combo = systems % 12;
    const int d = combo < 6 ? 1 : 3, M = std::array{2, 5, 10}[combo / 2 % 3];
    const bool adaptive = combo % 2;
    ParticleSystem sys = random_system({3, M, d}, adaptive, rng,
                                       systems >= 12 ? WeightFunction::Kind::Exponential : WeightFunction::Kind::Squared);
    const CoulombCost c(d == 1 ? 0.1 : 1e-3);
    const ConstraintSystem cs(basis_for_dimension(d));
    ParticleSystem probe = sys;
    const Eigen::VectorXd fd = central_difference([&](const Eigen::VectorXd& y) {
      probe.set_coordinates(y);
      return cost(c, probe);
    }, sys.coordinates());
    worst_grad = std::max(worst_grad, relative_error(cost_gradient(c, sys), fd));
    const Eigen::MatrixXd J = cs.jacobian(sys);
    for (int r = 0; r < J.rows(); ++r) {
      const Eigen::VectorXd fdr = central_difference([&](const Eigen::VectorXd& y) {
        probe.set_coordinates(y);
        return cs.constraints(probe)(r);
      }, sys.coordinates());
      worst_jac = std::max(worst_jac, relative_error(J.row(r).transpose(), fdr));
    }
  }
  return {systems == 20 && worst_grad <= 1e-6 && worst_jac <= 1e-6,
          fmt("%d systems, worst relative error gradient %.2e, Jacobian %.2e", systems, worst_grad, worst_jac)};
}

// 5. Projection: affine one-step convergence, idempotence, row-space confinement.
Outcome projection() {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> z;
  bool affine_ok = true;
  for (int t = 0; t < 20; ++t) {
    Eigen::MatrixXd B(4, 15);
    Eigen::VectorXd b(4), y(15);
    for (auto& v : B.reshaped()) v = z(rng);
    for (auto& v : b) v = z(rng);
    for (auto& v : y) v = z(rng);
    ConstraintEvaluator g = [&](const Eigen::VectorXd& x, Eigen::VectorXd& out, Eigen::MatrixXd* jac) {
      out = B * x - b;
      if (jac) *jac = B;
    };
    const ProjectionResult r = project(g, y, B, Eigen::VectorXd::Zero(4));
    affine_ok = affine_ok && r.ok() && r.newton_iterations == 1;
  }
  int instances = 0, attempts = 0;
  double worst_confine = 0.0, worst_idem = 0.0;
  int worst_iters = 0;
  while (instances < 50 && attempts < 200) {
    ++attempts;
    const int d = attempts % 2 ? 3 : 1;
    const ConstraintSystem cs(basis_for_dimension(d, 8));
    ParticleSystem sys = random_system({40, 3, d}, attempts % 3 == 0, rng);
    const FlowResult flow = constraint_flow(sys, cs);
    if (!flow.converged) continue;
    sys = flow.system;
    const ConstraintEvaluator gamma = make_evaluator(cs, sys);
    const Eigen::MatrixXd J = cs.jacobian(sys);
    Eigen::VectorXd half = sys.coordinates();
    for (auto& v : half) v += 1e-3 * z(rng);
    const ProjectionResult r = project(gamma, half, J, Eigen::VectorXd::Zero(J.rows()));
    if (!r.ok()) return {false, "projection failed on a random instance"};
    const Eigen::VectorXd disp = r.state - half;
    const Eigen::VectorXd in_rows = J.transpose() * J.transpose().colPivHouseholderQr().solve(disp);
    worst_confine = std::max(worst_confine, (disp - in_rows).norm() / disp.norm());
    ParticleSystem at = sys;
    at.set_coordinates(r.state);
    const Eigen::MatrixXd J2 = cs.jacobian(at);
    const ProjectionResult again = project(gamma, r.state, J2, Eigen::VectorXd::Zero(J2.rows()));
    if (!again.ok()) return {false, "re-projection failed"};
    worst_iters = std::max(worst_iters, again.newton_iterations);
    worst_idem = std::max(worst_idem, (again.state - r.state).cwiseAbs().maxCoeff());
    ++instances;
  }
  const bool ok = affine_ok && instances == 50 && worst_confine <= 1e-10 && worst_iters <= 1 && worst_idem <= 1e-10;
  return {ok, fmt("affine 1-step %s; %d instances, row-space leak %.1e, re-projection %d iter / %.1e move",
                  affine_ok ? "yes" : "no", instances, worst_confine, worst_iters, worst_idem)};
}

// 6. Tchakaloff reduction and monotone paths.
Outcome theory() {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> z;
  std::uniform_real_distribution<double> u(0.1, 1.0);
  double worst_fun = 0.0;
  bool sizes_ok = true;
  const ThetaFn theta = [](double r) { return r * r; };
  for (int t = 0; t < 100; ++t) {
    const int d = t % 2 ? 3 : 1, M = 2 + t % 3;
    const auto basis = d == 1 ? basis_for_dimension(1, 2 + t % 9) : basis_for_dimension(3);
    const ConstraintSystem cs(basis);
    const CoulombCost c(d == 1 ? 0.1 : 1e-3);
    WeightedAtomSet s{M, d, Eigen::VectorXd(60), Eigen::MatrixXd(60, M * d)};
    for (auto& w : s.weights) w = u(rng);
    s.weights /= s.weights.sum();
    for (auto& v : s.atoms.reshaped()) v = 0.5 * z(rng);
    const ReductionResult r = tchakaloff_reduce(s, cs, c, theta);
    const Eigen::MatrixXd F0 = functional_matrix(s, cs, c, theta);
    const Eigen::MatrixXd F1 = functional_matrix(r.set, cs, c, theta);
    worst_fun = std::max(worst_fun, (F0 * s.weights - F1 * r.set.weights).cwiseAbs().maxCoeff());
    sizes_ok = sizes_ok && r.set.size() <= basis->size() + 3 && (r.set.weights.array() > 0.0).all();
  }
  const auto law = preset_law("mu2_1d");
  const ConstraintSystem cs(std::make_shared<const TestBasis>(legendre_basis(law, 2)));
  const Shape shape{10, 2, 1};  // K = 2N + 6
  const CoulombCost c(0.1);
  auto endpoint = [&](std::uint64_t seed, int steps) {
    InitResult r = initialize(law, cs, shape, WeightFunction(WeightFunction::Kind::Squared), InitOptions{}, seed);
    if (!r.report.converged) throw NotConverged("acceptance: endpoint init failed");
    if (steps > 0) {
      LangevinParams p;
      p.dt0 = 1e-3;
      p.n_max = steps;
      r.system.set_coordinates(run_langevin(r.system, c, cs, p).best_state);
    }
    return state_from_system(r.system);
  };
  int paths_ok = 0;
  double worst_res = 0.0, worst_mono = 0.0;
  for (int t = 0; t < 50; ++t) {
    const PathState a = endpoint(1000 + t, 0);
    const PathState b = endpoint(2000 + t, t % 2 ? 100 : 0);
    const PathCheck chk = check_path(monotone_path(a, b, shape, cs, c), cs, c);
    worst_res = std::max(worst_res, chk.max_residual);
    worst_mono = std::max(worst_mono, chk.monotonicity_violation);
    paths_ok += chk.ok(1e-9);
  }
  return {sizes_ok && worst_fun <= 1e-10 && paths_ok == 50,
          fmt("100 reductions, functional drift %.1e, sizes %s; %d/50 paths ok (residual %.1e, monotonicity %.1e)",
              worst_fun, sizes_ok ? "ok" : "bad", paths_ok, worst_res, worst_mono)};
}

// 7. Init: RK3 flow to 1e-12 within 5000 steps, NNLS support and KKT.
Outcome init_pipeline() {
  const auto law = preset_law("mu2_1d");
  const ConstraintSystem cs(std::make_shared<const TestBasis>(legendre_basis(law, 10)));
  InitOptions opt;
  opt.newton_polish = false;  // the flow alone must reach the tolerance
  const InitResult r = initialize(law, cs, Shape{1000, 5, 1}, std::nullopt, opt, 1);
  const double res = inf_norm_of(cs.constraints(r.system));
  const Eigen::MatrixXd pts = sample(law, 100000 * 5, 2);
  const Subsample s = nnls_subsample(pts.reshaped<Eigen::RowMajor>(100000, 5), 5, cs);
  const bool ok = r.report.converged && res <= 1e-12 && r.report.flow_iterations <= 5000 &&
                  static_cast<int>(s.indices.size()) <= 11 && s.nnls.kkt_residual <= 1e-10;
  return {ok, fmt("flow %d steps to %.1e; NNLS support %zu (<= 11), KKT %.1e", r.report.flow_iterations, res,
                  s.indices.size(), s.nnls.kkt_residual)};
}

// 8. Byte-identical run logs for identical config and seed.
Outcome determinism() {
  const ExperimentConfig cfg = load_config(kConfigs / "determinism.json");
  std::string logs[2];
  for (int i = 0; i < 2; ++i) {
    const fs::path dir = kOut / fmt("determinism_%d", i);
    fs::remove_all(dir);
    run_experiment(cfg, dir);
    std::ifstream in(dir / "runlog.csv", std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    logs[i] = ss.str();
  }
  return {!logs[0].empty() && logs[0] == logs[1], fmt("runlog.csv %zu bytes, identical: %s", logs[0].size(),
                                                       logs[0] == logs[1] ? "yes" : "no")};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"3D Coulomb cost vs K (K=40, K=320)", table3},
      {"3D Coulomb cost vs basis (N=9, N=52)", table2},
      {"1D oracle sandwich", sandwich},
      {"gradient and Jacobian finite differences", derivatives},
      {"projection contract", projection},
      {"Tchakaloff reduction and monotone paths", theory},
      {"init pipeline", init_pipeline},
      {"determinism", determinism},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  fs::create_directories(kOut);
  int failed = 0;
  std::vector<std::string> lines;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    std::printf("criterion %d: %s\n", id, criteria[i].first.c_str());
    std::fflush(stdout);
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    lines.push_back(fmt("%s %d %s: ", o.pass ? "PASS" : "FAIL", id, criteria[i].first.c_str()) + o.detail);
    std::printf("%s\n", lines.back().c_str());
    std::fflush(stdout);
  }
  std::printf("\nsummary\n");
  for (const auto& l : lines) std::printf("%s\n", l.c_str());
  return failed ? 1 : 0;
}
