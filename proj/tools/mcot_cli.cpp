// mcot: run moment-constrained multi-marginal OT experiments from JSON configs.
#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <optional>
#include <iostream>
#include <json.hpp>

#include "mcot/error.hpp"
#include "mcot/experiment.hpp"
#include "mcot/io.hpp"
#include "mcot/oracle1d.hpp"
#include "mcot/theory.hpp"

namespace {

int report(const mcot::Error& e) {
  std::cerr << "mcot: error: " << e.what() << '\n';
  return static_cast<int>(e.code());
}

int cmd_run(const std::string& path, const std::optional<std::uint64_t>& seed) {
  auto cfg = mcot::load_config(path);
  if (seed) cfg.seed = cfg.langevin.seed = *seed;
  const auto dir = mcot::resolve_output_dir(cfg);
  const auto r = mcot::run_experiment(cfg, dir);
  std::printf("%s: best cost %.10g at iteration %d", r.name.c_str(), r.best_cost, r.best_iteration);
  if (r.oracle_cost) std::printf(" (oracle %.10g, gap %.3e)", *r.oracle_cost, (*r.oracle_cost - r.best_cost) / *r.oracle_cost);
  std::printf("\nartifacts: %s\n", dir.string().c_str());
  return 0;
}

int cmd_suite(const std::string& path, const std::optional<int>& workers, const std::optional<std::uint64_t>& seed) {
  auto suite = mcot::load_suite(path);
  if (workers) suite.workers = *workers;
  if (seed)
    for (auto& c : suite.runs) c.seed = c.langevin.seed = *seed;
  const auto results = mcot::run_suite(suite);
  int failed = 0;
  for (const auto& r : results) {
    if (r.exit_code == 0) {
      std::printf("%-24s ok      best %.10g\n", r.name.c_str(), r.best_cost);
    } else {
      ++failed;
      std::printf("%-24s failed  (%d) %s\n", r.name.c_str(), r.exit_code, r.error.c_str());
    }
  }
  return failed ? 1 : 0;
}

int cmd_oracle(const std::string& law_name, int M, double eps, int grid, const std::string& out) {
  const auto law = mcot::parse_law(nlohmann::json(law_name), "law");
  const auto map = mcot::build_map(law, M);
  const double c = mcot::optimal_cost(map, eps);
  std::printf("oracle cost %s\n", mcot::format_double(c).c_str());
  if (!out.empty()) {
    const std::filesystem::path dir(out);
    mcot::write_oracle_csv(dir / "oracle_map.csv", mcot::plan_support(map, grid));
    nlohmann::ordered_json j{{"law", law_name}, {"M", M}, {"epsilon", eps}, {"oracle_cost", c}};
    std::ofstream(dir / "oracle.json") << j.dump(2) << '\n';
  }
  return 0;
}

int cmd_path_check(const std::string& a, const std::string& b, const std::string& config, const std::string& out) {
  const auto cfg = mcot::load_config(config);
  mcot::StateMeta ma, mb;
  const auto sa = mcot::read_state_csv(a, &ma);
  const auto sb = mcot::read_state_csv(b, &mb);
  if (ma.shape.K != mb.shape.K || ma.shape.M != mb.shape.M || ma.shape.d != mb.shape.d)
    throw mcot::InvalidArgument("path-check: states have different shapes");
  const auto basis = mcot::build_basis(*cfg.law, cfg.basis);
  const mcot::ConstraintSystem csys(basis);
  const mcot::CoulombCost cost(cfg.epsilon);
  // Converged states are feasible to the projection tolerance only.
  const auto path = mcot::monotone_path(sa, sb, ma.shape, csys, cost, [](double r) { return r * r; },
                                        std::max(1e-9, 10 * cfg.langevin.projection_tol));
  const auto check = mcot::check_path(path, csys, cost);
  if (!out.empty()) mcot::write_path_csv(std::filesystem::path(out) / "path.csv", check);
  std::printf("breakpoints %zu, cost %.10g -> %.10g, max residual %.3e, monotonicity violation %.3e: %s\n",
              path.breakpoints.size(), check.cost.front(), check.cost.back(), check.max_residual,
              check.monotonicity_violation, check.ok() ? "monotone" : "NOT monotone");
  return check.ok() ? 0 : 8;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Moment-constrained multi-marginal optimal transport with constrained Langevin dynamics"};
  app.require_subcommand(1);
  std::optional<std::uint64_t> seed;

  std::string config;
  auto* run = app.add_subcommand("run", "run one experiment");
  run->add_option("config", config, "JSON run config")->required()->check(CLI::ExistingFile);
  run->add_option("--seed", seed, "override the config seed");

  std::string suite_file;
  std::optional<int> workers;
  auto* suite = app.add_subcommand("suite", "run a list of experiments and aggregate");
  suite->add_option("config", suite_file, "JSON suite config")->required()->check(CLI::ExistingFile);
  suite->add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
  suite->add_option("--seed", seed, "override every run seed");

  std::string law;
  int M = 2, grid = 201;
  double eps = 0.1;
  std::string oracle_out;
  auto* oracle = app.add_subcommand("oracle1d", "exact 1D optimal cost and map");
  oracle->add_option("law", law, "preset law (mu1_1d, mu2_1d, mu3_1d)")->required();
  oracle->add_option("M", M, "number of marginals")->required()->check(CLI::PositiveNumber);
  oracle->add_option("eps", eps, "cost regularization")->required()->check(CLI::NonNegativeNumber);
  oracle->add_option("--grid", grid, "points for the map export")->check(CLI::Range(2, 1000000));
  oracle->add_option("--out", oracle_out, "directory for oracle_map.csv and oracle.json");

  std::string state_a, state_b, path_config, path_out;
  auto* pc = app.add_subcommand("path-check", "build and verify a monotone path between two states");
  pc->add_option("stateA", state_a, "best_state.csv of the first run")->required()->check(CLI::ExistingFile);
  pc->add_option("stateB", state_b, "best_state.csv of the second run")->required()->check(CLI::ExistingFile);
  pc->add_option("config", path_config, "run config defining law, basis and cost")->required()->check(CLI::ExistingFile);
  pc->add_option("--out", path_out, "directory for path.csv");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return cmd_run(config, seed);
    if (*suite) return cmd_suite(suite_file, workers, seed);
    if (*oracle) return cmd_oracle(law, M, eps, grid, oracle_out);
    if (*pc) return cmd_path_check(state_a, state_b, path_config, path_out);
  } catch (const mcot::Error& e) {
    return report(e);
  } catch (const std::exception& e) {
    std::cerr << "mcot: error: " << e.what() << '\n';
    return 10;
  }
  return 0;
}
