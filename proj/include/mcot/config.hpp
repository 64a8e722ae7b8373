#pragma once

#include <cstdint>
#include <filesystem>
#include <json.hpp>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mcot/basis.hpp"
#include "mcot/init.hpp"
#include "mcot/langevin.hpp"
#include "mcot/measures.hpp"

namespace mcot {

struct BasisSpec {
  BasisKind kind = BasisKind::Legendre1D;
  int N = 10;
  Normalization normalization = Normalization::DegreeWeighted;
  bool dump = false;
};

struct ExperimentConfig {
  std::string name = "run";
  nlohmann::ordered_json law_spec;  ///< as given (preset name or parameter block)
  std::shared_ptr<const MarginalLaw> law;
  BasisSpec basis;
  double epsilon = 0.1;
  int K = 100;
  int M = 2;
  std::optional<WeightFunction> weight_function;  ///< set in adaptive mode
  InitOptions init;
  LangevinParams langevin;
  std::uint64_t seed = 0;
  std::string output_dir;  ///< empty: runs/<name>
  int oracle_grid = 201;
};

/// Parses a run config. Unknown keys are rejected with the offending field path.
ExperimentConfig parse_config(const nlohmann::json& j, const std::string& source = "<config>");
ExperimentConfig load_config(const std::filesystem::path& file);
/// Fully resolved config, defaults included.
nlohmann::ordered_json to_json(const ExperimentConfig& config);

MarginalLaw parse_law(const nlohmann::json& j, const std::string& path);
std::shared_ptr<const TestBasis> build_basis(const MarginalLaw& law, const BasisSpec& spec);

struct SuiteConfig {
  std::string name = "suite";
  int workers = 1;
  std::string output_root;
  std::vector<ExperimentConfig> runs;
};

/// Suite file: {"name", "workers", "output_root", "runs": [config object | "relative/path.json", ...]}.
SuiteConfig load_suite(const std::filesystem::path& file);

/// nlohmann parse with a ConfigError that carries the file name and byte position.
nlohmann::json read_json_file(const std::filesystem::path& file);

}  // namespace mcot
