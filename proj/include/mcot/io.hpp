#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <string>

#include "mcot/langevin.hpp"
#include "mcot/model.hpp"
#include "mcot/oracle1d.hpp"
#include "mcot/theory.hpp"

namespace mcot {

/// Shortest round-trip text for a double (fixed "%.17g" for byte-stable output).
std::string format_double(double v);

void write_runlog_csv(const std::filesystem::path& file, const RunLog& log);

struct StateMeta {
  Shape shape;
  std::string mode = "fixed";  ///< fixed | adaptive
  std::string weight_function;
  std::uint64_t seed = 0;
  int iteration = 0;
};

/// Rows (k, m, coordinate, value, weight) plus a JSON sidecar `<file>.json`.
void write_state_csv(const std::filesystem::path& file, const ParticleSystem& sys, const StateMeta& meta);
/// Reads a state written by write_state_csv (shape from the sidecar).
PathState read_state_csv(const std::filesystem::path& file, StateMeta* meta = nullptr);

void write_snapshots_csv(const std::filesystem::path& file, const RunLog& log, const ParticleSystem& like);

/// Pairs (x^k_0, x^k_m') for m' = 1..M-1 with the particle weight.
void write_pair_coupling_csv(const std::filesystem::path& file, const ParticleSystem& sys);
/// Same pairs as radii (|x^k_0|, |x^k_m'|).
void write_radial_coupling_csv(const std::filesystem::path& file, const ParticleSystem& sys);

void write_oracle_csv(const std::filesystem::path& file, const Eigen::MatrixXd& plan);
void write_basis_csv(const std::filesystem::path& file, const TestBasis& basis);
void write_path_csv(const std::filesystem::path& file, const PathCheck& check);

}  // namespace mcot
