#include "mcot/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <thread>

#include "mcot/error.hpp"
#include "mcot/io.hpp"
#include "mcot/oracle1d.hpp"

namespace mcot {
namespace {

void write_json(const std::filesystem::path& file, const nlohmann::ordered_json& j) {
  std::filesystem::create_directories(file.parent_path());
  std::ofstream out(file, std::ios::binary);
  if (!out) throw ConfigError("cannot open " + file.string() + " for writing");
  out << j.dump(2) << '\n';
}

nlohmann::ordered_json report_json(const InitReport& r) {
  return {{"method", r.method},
          {"converged", r.converged},
          {"flow_iterations", r.flow_iterations},
          {"flow_accepted", r.flow_accepted},
          {"initial_residual", r.initial_residual},
          {"final_residual", r.final_residual},
          {"support_size", r.support_size},
          {"nnls_residual", r.nnls_residual},
          {"nnls_kkt", r.nnls_kkt},
          {"newton_polish", r.polished},
          {"residual_history", r.history}};
}

std::string law_label(const ExperimentConfig& c) {
  if (c.law_spec.is_string()) return c.law_spec.get<std::string>();
  if (c.law_spec.contains("preset")) return c.law_spec["preset"].get<std::string>();
  return c.law->kind_name();
}

}  // namespace

std::filesystem::path resolve_output_dir(const ExperimentConfig& config, const std::string& root) {
  if (const char* env = std::getenv(kOutputRootEnv); env && *env) return std::filesystem::path(env) / config.name;
  if (!root.empty()) return std::filesystem::path(root) / config.name;
  if (!config.output_dir.empty()) return config.output_dir;
  return std::filesystem::path("runs") / config.name;
}

ExperimentResult run_experiment(const ExperimentConfig& config, const std::filesystem::path& dir) {
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentResult result;
  result.name = config.name;
  result.output_dir = dir;
  std::filesystem::create_directories(dir);
  write_json(dir / "config.json", to_json(config));

  const MarginalLaw& law = *config.law;
  const auto basis = build_basis(law, config.basis);
  if (config.basis.dump) write_basis_csv(dir / "basis.csv", *basis);
  const ConstraintSystem csys(basis);
  const CoulombCost cost(config.epsilon);
  const Shape shape{config.K, config.M, law.dimension()};

  const InitResult init = initialize(law, csys, shape, config.weight_function, config.init, config.seed);
  write_json(dir / "init_report.json", report_json(init.report));
  result.init_converged = init.report.converged;
  if (!init.report.converged) {
    throw NotConverged("init did not reach tol " + format_double(config.init.flow.tol) + " (residual " +
                       format_double(init.report.final_residual) + ")");
  }

  LangevinParams params = config.langevin;
  params.seed = config.seed;
  const RunLog log = run_langevin(init.system, cost, csys, params);
  write_runlog_csv(dir / "runlog.csv", log);
  if (!log.snapshots.empty()) write_snapshots_csv(dir / "snapshots.csv", log, init.system);

  ParticleSystem best = init.system;
  best.set_coordinates(log.best_state);
  StateMeta meta{shape, config.weight_function ? "adaptive" : "fixed",
                 config.weight_function ? config.weight_function->name() : "", config.seed, log.best_iteration};
  write_state_csv(dir / "best_state.csv", best, meta);
  write_pair_coupling_csv(dir / "pair_coupling.csv", best);
  write_radial_coupling_csv(dir / "radial_coupling.csv", best);

  result.best_cost = log.best_cost;
  result.best_iteration = log.best_iteration;
  if (law.is_density1d()) {
    const OptimalMap1D map = build_map(law, config.M);
    result.oracle_cost = optimal_cost(map, config.epsilon);
    write_oracle_csv(dir / "oracle_map.csv", plan_support(map, config.oracle_grid));
    write_json(dir / "oracle.json", {{"M", config.M}, {"epsilon", config.epsilon}, {"oracle_cost", *result.oracle_cost}});
  }
  result.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  int violations = 0;
  for (const auto& r : log.records) violations += r.theta_violation ? 1 : 0;
  nlohmann::ordered_json s;
  s["schema"] = "summary/1";
  s["version"] = kVersion;
  s["name"] = config.name;
  s["best_cost"] = log.best_cost;
  s["best_iteration"] = log.best_iteration;
  s["final_cost"] = log.records.back().cost;
  s["accepted_iterations"] = static_cast<int>(log.records.size()) - 1;
  s["total_retries"] = log.total_retries;
  s["theta_violations"] = violations;
  if (result.oracle_cost) {
    s["oracle_cost"] = *result.oracle_cost;
    s["relative_gap"] = (*result.oracle_cost - log.best_cost) / *result.oracle_cost;
  }
  s["init"] = {{"converged", init.report.converged}, {"final_residual", init.report.final_residual}};
  s["wall_time_s"] = result.wall_time;
  s["parameters"] = to_json(config);
  write_json(dir / "summary.json", s);
  return result;
}

std::vector<ExperimentResult> run_suite(const SuiteConfig& suite) {
  std::vector<ExperimentResult> results(suite.runs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < suite.runs.size(); i = next++) {
      const auto& cfg = suite.runs[i];
      const auto dir = resolve_output_dir(cfg, suite.output_root);
      const auto t0 = std::chrono::steady_clock::now();
      try {
        results[i] = run_experiment(cfg, dir);
      } catch (const Error& e) {
        results[i].exit_code = static_cast<int>(e.code());
        results[i].error = e.what();
      } catch (const std::exception& e) {
        results[i].exit_code = static_cast<int>(ErrorCode::Numerical);
        results[i].error = e.what();
      }
      results[i].name = cfg.name;
      results[i].output_dir = dir;
      if (results[i].exit_code != 0)
        results[i].wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
  };
  const int n = std::max(1, std::min<int>(suite.workers, static_cast<int>(suite.runs.size())));
  std::vector<std::thread> pool;
  for (int w = 1; w < n; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::filesystem::path root = suite.output_root.empty() ? std::filesystem::path("runs") : std::filesystem::path(suite.output_root);
  if (const char* env = std::getenv(kOutputRootEnv); env && *env) root = env;
  std::filesystem::create_directories(root);
  std::ofstream out(root / (suite.name + "_aggregate.csv"), std::ios::binary);
  out << "# schema: aggregate/1\n";
  out << "name,law,M,N,K,mode,beta0,schedule,best_cost,oracle_cost,oracle_gap,wall_time_s,status,error\n";
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& c = suite.runs[i];
    const auto& r = results[i];
    out << c.name << ',' << law_label(c) << ',' << c.M << ',' << c.basis.N << ',' << c.K << ','
        << (c.weight_function ? "adaptive" : "fixed") << ',' << format_double(c.langevin.beta0) << ','
        << to_string(c.langevin.schedule) << ',';
    if (r.exit_code == 0) out << format_double(r.best_cost);
    out << ',';
    if (r.oracle_cost) out << format_double(*r.oracle_cost);
    out << ',';
    if (r.oracle_cost && r.exit_code == 0) out << format_double((*r.oracle_cost - r.best_cost) / *r.oracle_cost);
    std::string err = r.error;
    for (char& ch : err)
      if (ch == ',' || ch == '\n' || ch == '"') ch = ' ';
    out << ',' << format_double(r.wall_time) << ',' << (r.exit_code == 0 ? "ok" : "failed:" + std::to_string(r.exit_code))
        << ',' << err << '\n';
  }
  return results;
}

}  // namespace mcot
