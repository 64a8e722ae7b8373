#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mcot/measures.hpp"
#include "mcot/model.hpp"
#include "mcot/nnls.hpp"

namespace mcot {

struct FlowOptions {
  double tol = 1e-12;     ///< target ||Gamma||_inf
  int max_iters = 5000;   ///< accepted plus rejected steps
  double h0 = 0.1;
  int grow_after = 10;    ///< consecutive accepted steps before h doubles
};

struct FlowResult {
  ParticleSystem system;
  bool converged = false;
  int iterations = 0;  ///< steps attempted
  int accepted = 0;
  double residual_inf = 0.0;
  std::vector<double> history;  ///< ||Gamma||_inf after each accepted step, starting value first
};

/// Drives a particle system onto {Gamma^K = 0} with the normalized flow
///   dY/dt = -|Gamma|^2 J^T Gamma / |J^T Gamma|^2
/// integrated by the Bogacki-Shampine RK3 tableau. A step that increases
/// ||Gamma||_2 is rejected and h is halved.
FlowResult constraint_flow(const ParticleSystem& sys, const ConstraintSystem& csys, const FlowOptions& options = {});

struct Subsample {
  Eigen::MatrixXd particles;  ///< support rows, each M*d coordinates
  Eigen::VectorXd weights;    ///< positive, summing to ~1
  std::vector<int> indices;   ///< rows of the input sample matrix
  NnlsResult nnls;
};

/// Picks nonnegative weights on candidate particles (rows of `samples`, M*d each)
/// whose phi-averages and mass match the basis targets in least squares.
Subsample nnls_subsample(const Eigen::MatrixXd& samples, int M, const ConstraintSystem& csys);

/// Replicates support particles into K slots by largest-remainder rounding of K*w,
/// then adds N(0, sigma_i^2) jitter to coordinate i of every point. In adaptive mode
/// a_k is set so that f(a_k) = K * (w_j / copies_j).
ParticleSystem expand_support(const Eigen::MatrixXd& support, const Eigen::VectorXd& weights, Shape shape,
                              const Eigen::VectorXd& sigma, std::uint64_t seed,
                              const std::optional<WeightFunction>& weight_function = std::nullopt);

/// Copy counts used by expand_support.
std::vector<int> largest_remainder_counts(const Eigen::VectorXd& weights, int K);

enum class InitMethod { RK3, NnlsThenRK3 };
std::string to_string(InitMethod m);

struct InitOptions {
  InitMethod method = InitMethod::RK3;
  int K_inf = 0;          ///< candidate count for NNLS; 0 means 100 * K
  double jitter = 1e-3;   ///< relative to the per-coordinate sample standard deviation
  FlowOptions flow;
  bool newton_polish = true;  ///< finish with a Newton projection if the flow stalls above tol
};

struct InitReport {
  std::string method;
  bool converged = false;
  int flow_iterations = 0;
  int flow_accepted = 0;
  double initial_residual = 0.0;
  double final_residual = 0.0;
  int support_size = 0;
  double nnls_residual = 0.0;
  double nnls_kkt = 0.0;
  bool polished = false;
  std::vector<double> history;
};

struct InitResult {
  ParticleSystem system;
  InitReport report;
};

/// Samples K particles from law^{\otimes M} (or NNLS-compresses K_inf candidates),
/// then runs the constraint flow. report.converged tells whether the final residual
/// reached options.flow.tol; callers abort before any dynamics otherwise.
InitResult initialize(const MarginalLaw& law, const ConstraintSystem& csys, Shape shape,
                      const std::optional<WeightFunction>& weight_function, const InitOptions& options,
                      std::uint64_t seed);

}  // namespace mcot
