#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "mcot/model.hpp"
#include "mcot/projection.hpp"

namespace mcot {

enum class NoiseSchedule { Constant, SqrtDecay };

std::string to_string(NoiseSchedule s);

/// beta_{n+1} from beta_n. SqrtDecay multiplies by sqrt((n+1)/(n+2)), so that
/// beta_n = beta_0 / sqrt(1 + n).
double noise_schedule_step(double beta, int n, NoiseSchedule schedule);

struct LangevinParams {
  double dt0 = 1e-4;
  /// Upper bound for the adaptive step; infinite by default (the doubling test alone decides).
  double dt_max = std::numeric_limits<double>::infinity();
  double beta0 = 0.0;
  double tau0 = 1e-6;
  double tau_max = 1e3;
  int i_const = 5;
  int i_max = 50;
  int n_max = 20000;
  NoiseSchedule schedule = NoiseSchedule::SqrtDecay;
  std::uint64_t seed = 0;
  double projection_tol = 1e-12;
  /// Use beta * sqrt(dt) in the time-step test as well as in the proposal.
  bool consistent_noise = false;
  /// Flag iterations whose Theta^K exceeds this bound (diagnostic only).
  double theta_bound = std::numeric_limits<double>::infinity();
  /// Store the accepted state every `snapshot_every` iterations (0 = never).
  int snapshot_every = 0;
};

struct RunRecord {
  int n = 0;
  double cost = 0.0;
  double gamma_inf = 0.0;
  double theta = 0.0;
  double dt = 0.0;
  double beta = 0.0;
  double tau = 0.0;
  int newton_iterations = 0;
  int retries = 0;
  bool accepted = true;
  bool theta_violation = false;
};

struct Snapshot {
  int n = 0;
  Eigen::VectorXd state;
};

struct RunLog {
  std::vector<RunRecord> records;
  std::vector<Snapshot> snapshots;
  double best_cost = std::numeric_limits<double>::infinity();
  int best_iteration = 0;
  Eigen::VectorXd best_state;
  int total_retries = 0;
};

/// Smooth objective on flat coordinates.
struct Objective {
  std::function<double(const Eigen::VectorXd&)> value;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> gradient;
};

/// Result of one time-step adaptation.
struct TimeStep {
  double dt = 0.0;
  Eigen::VectorXd multiplier;
  int halvings = 0;
  bool doubled = false;
};

/// Grows dt by 2 if the proposal at 2 dt stays within tau of the manifold; otherwise
/// halves dt (and the multiplier) until the proposal at dt does. Growth is skipped when
/// 2 dt would exceed dt_max.
TimeStep adapt_time_step(const ConstraintEvaluator& gamma, const Eigen::VectorXd& state,
                         const Eigen::VectorXd& gradient, const Eigen::VectorXd& multiplier, double dt,
                         double beta, double tau, const Eigen::VectorXd& noise, bool consistent_noise = false,
                         double dt_max = std::numeric_limits<double>::infinity());

/// Constrained overdamped Langevin iteration from a feasible start.
/// `diagnostic` (optional) returns Theta^K for the RunLog.
RunLog run_langevin(const Eigen::VectorXd& initial, const Objective& objective, const ConstraintEvaluator& gamma,
                    const LangevinParams& params,
                    const std::function<double(const Eigen::VectorXd&)>& diagnostic = {});

/// Convenience overload for particle systems with the Coulomb cost.
RunLog run_langevin(const ParticleSystem& initial, const CoulombCost& cost, const ConstraintSystem& csys,
                    const LangevinParams& params);

}  // namespace mcot
