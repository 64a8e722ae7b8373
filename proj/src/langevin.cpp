#include "mcot/langevin.hpp"

#include <cmath>
#include <random>

#include "mcot/error.hpp"

namespace mcot {
namespace {

constexpr double kUnderflow = 1e-300;

double inf_norm(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

double residual_at(const ConstraintEvaluator& gamma, const Eigen::VectorXd& y) {
  Eigen::VectorXd g;
  gamma(y, g, nullptr);
  if (!g.allFinite()) return std::numeric_limits<double>::infinity();
  return inf_norm(g);
}

}  // namespace

std::string to_string(NoiseSchedule s) { return s == NoiseSchedule::Constant ? "constant" : "sqrt_decay"; }

double noise_schedule_step(double beta, int n, NoiseSchedule schedule) {
  if (n < 0) throw InvalidArgument("noise_schedule_step: n must be >= 0");
  if (schedule == NoiseSchedule::Constant) return beta;
  return beta * std::sqrt((n + 1.0) / (n + 2.0));
}

TimeStep adapt_time_step(const ConstraintEvaluator& gamma, const Eigen::VectorXd& state,
                         const Eigen::VectorXd& gradient, const Eigen::VectorXd& multiplier, double dt,
                         double beta, double tau, const Eigen::VectorXd& noise, bool consistent_noise,
                         double dt_max) {
  TimeStep out{dt, multiplier, 0, false};
  const bool noisy = beta != 0.0 && noise.size() == state.size();
  auto proposal = [&](double step, double noise_step) {
    Eigen::VectorXd y = state - step * gradient;
    if (noisy) y += (beta * std::sqrt(noise_step)) * noise;
    return y;
  };
  // The grow test uses sqrt(2 dt) for the noise, which equals sqrt(step) at step = 2 dt.
  if (2.0 * dt <= dt_max && residual_at(gamma, proposal(2.0 * dt, 2.0 * dt)) <= tau) {
    out.dt = 2.0 * dt;
    out.doubled = true;
    return out;
  }
  while (residual_at(gamma, proposal(out.dt, consistent_noise ? out.dt : 2.0 * out.dt)) >= tau) {
    out.dt *= 0.5;
    out.multiplier *= 0.5;
    ++out.halvings;
    if (out.dt < kUnderflow) throw StallError("adapt_time_step: time step underflow");
  }
  return out;
}

RunLog run_langevin(const Eigen::VectorXd& initial, const Objective& objective, const ConstraintEvaluator& gamma,
                    const LangevinParams& params, const std::function<double(const Eigen::VectorXd&)>& diagnostic) {
  if (!(params.dt0 > 0.0) || !(params.dt_max >= params.dt0) || !(params.tau0 > 0.0) || !(params.beta0 >= 0.0) || params.i_max < 1 ||
      params.i_const < 0 || params.n_max < 0 || !(params.projection_tol > 0.0)) {
    throw InvalidArgument("run_langevin: invalid parameters");
  }
  RunLog log;
  Eigen::VectorXd y = initial;
  Eigen::VectorXd g0;
  Eigen::MatrixXd jac;
  gamma(y, g0, nullptr);
  const double start_residual = inf_norm(g0);
  if (!(start_residual <= params.tau0)) {
    throw InvalidArgument("run_langevin: initial state is not feasible (||Gamma||_inf = " +
                          std::to_string(start_residual) + " > tau0)");
  }
  Eigen::VectorXd lambda = Eigen::VectorXd::Zero(g0.size());
  double dt = params.dt0, beta = params.beta0, tau = params.tau0;
  ProjectionOptions popt;
  popt.max_iterations = params.i_max;
  popt.tolerance = params.projection_tol;

  auto record = [&](int n, const Eigen::VectorXd& state, double residual, int newton, int retries) {
    RunRecord r;
    r.n = n;
    r.cost = objective.value(state);
    if (!std::isfinite(r.cost)) throw NonFiniteError("run_langevin: cost is not finite at iteration " + std::to_string(n));
    r.gamma_inf = residual;
    r.theta = diagnostic ? diagnostic(state) : 0.0;
    r.theta_violation = r.theta > params.theta_bound;
    r.dt = dt;
    r.beta = beta;
    r.tau = tau;
    r.newton_iterations = newton;
    r.retries = retries;
    log.records.push_back(r);
    if (r.cost < log.best_cost) {
      log.best_cost = r.cost;
      log.best_iteration = n;
      log.best_state = state;
    }
    if (params.snapshot_every > 0 && n % params.snapshot_every == 0) log.snapshots.push_back({n, state});
  };
  record(0, y, start_residual, 0, 0);

  std::mt19937_64 rng(params.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd noise = Eigen::VectorXd::Zero(y.size());

  for (int n = 0; n < params.n_max; ++n) {
    // One noise draw per iteration index, reused across retries.
    if (beta != 0.0) {
      for (Eigen::Index i = 0; i < noise.size(); ++i) noise(i) = normal(rng);
    }
    const Eigen::VectorXd grad = objective.gradient(y);
    gamma(y, g0, &jac);
    int retries = 0;
    while (true) {
      const TimeStep step = adapt_time_step(gamma, y, grad, lambda, dt, beta, tau, noise, params.consistent_noise,
                                                params.dt_max);
      dt = step.dt;
      lambda = step.multiplier;
      Eigen::VectorXd half = y - dt * grad;
      if (beta != 0.0) half += (beta * std::sqrt(dt)) * noise;
      ProjectionResult res = project(gamma, half, jac, lambda, popt);
      if (res.ok()) {
        y = std::move(res.state);
        lambda = std::move(res.multiplier);
        if (res.newton_iterations <= params.i_const) tau = std::min(2.0 * tau, params.tau_max);
        beta = noise_schedule_step(beta, n, params.schedule);
        record(n + 1, y, res.residual, res.newton_iterations, retries);
        log.total_retries += retries;
        break;
      }
      if (res.status == ProjectionStatus::SingularGram) {
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(jac * jac.transpose());
        if (!(lu.rcond() >= popt.singular_rcond)) {
          throw SingularGramError("run_langevin: constraint Gram matrix is singular at iteration " + std::to_string(n));
        }
      }
      tau *= 0.5;
      ++retries;
      if (tau < kUnderflow) throw StallError("run_langevin: tolerance underflow at iteration " + std::to_string(n));
    }
  }
  return log;
}

RunLog run_langevin(const ParticleSystem& initial, const CoulombCost& c, const ConstraintSystem& csys,
                    const LangevinParams& params) {
  auto scratch = std::make_shared<ParticleSystem>(initial);
  Objective objective{
      [scratch, &c](const Eigen::VectorXd& y) {
        scratch->set_coordinates(y);
        return cost(c, *scratch);
      },
      [scratch, &c](const Eigen::VectorXd& y) {
        scratch->set_coordinates(y);
        return cost_gradient(c, *scratch);
      },
  };
  auto theta = [scratch](const Eigen::VectorXd& y) {
    scratch->set_coordinates(y);
    return theta_functional(*scratch);
  };
  return run_langevin(initial.coordinates(), objective, make_evaluator(csys, initial), params, theta);
}

}  // namespace mcot
