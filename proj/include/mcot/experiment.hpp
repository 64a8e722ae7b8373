#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mcot/config.hpp"

namespace mcot {

inline constexpr const char* kVersion = "0.1.0";

/// Environment variable that, when set, redirects artifacts to <value>/<run name>.
inline constexpr const char* kOutputRootEnv = "MCOT_OUTPUT_ROOT";

struct ExperimentResult {
  std::string name;
  std::filesystem::path output_dir;
  int exit_code = 0;  ///< 0 on success, otherwise an ErrorCode value
  std::string error;
  double best_cost = 0.0;
  int best_iteration = 0;
  std::optional<double> oracle_cost;
  double wall_time = 0.0;
  bool init_converged = false;
};

/// Where the artifacts of `config` go: the environment override first, then
/// `root` (suite output root), then config.output_dir, then runs/<name>.
std::filesystem::path resolve_output_dir(const ExperimentConfig& config, const std::string& root = "");

/// init -> Langevin -> artifacts. Solver errors propagate as mcot::Error after the
/// artifacts produced so far are written.
ExperimentResult run_experiment(const ExperimentConfig& config, const std::filesystem::path& output_dir);

/// Runs every config on a pool of `workers` threads and writes <root>/<name>_aggregate.csv.
/// Failed runs are kept as rows with a nonzero status.
std::vector<ExperimentResult> run_suite(const SuiteConfig& suite);

}  // namespace mcot
