#include "mcot/init.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "mcot/error.hpp"
#include "mcot/projection.hpp"

namespace mcot {
namespace {

double inf_norm(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

constexpr std::uint64_t kJitterStream = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kCandidateStream = 0xD1B54A32D192ED03ULL;

// Flat coordinates from a (K*M) x d sample matrix whose row k*M + m is point m of particle k.
Eigen::VectorXd flatten_rows(const Eigen::MatrixXd& pts) {
  Eigen::VectorXd flat(pts.size());
  for (Eigen::Index r = 0; r < pts.rows(); ++r)
    for (Eigen::Index i = 0; i < pts.cols(); ++i) flat(r * pts.cols() + i) = pts(r, i);
  return flat;
}

Eigen::VectorXd coordinate_std(const Eigen::MatrixXd& pts) {
  const Eigen::RowVectorXd mean = pts.colwise().mean();
  const double denom = std::max<Eigen::Index>(pts.rows() - 1, 1);
  return ((pts.rowwise() - mean).colwise().squaredNorm() / denom).cwiseSqrt().transpose();
}

}  // namespace

std::string to_string(InitMethod m) { return m == InitMethod::RK3 ? "rk3" : "nnls_then_rk3"; }

FlowResult constraint_flow(const ParticleSystem& sys, const ConstraintSystem& csys, const FlowOptions& options) {
  if (!(options.h0 > 0.0) || options.max_iters < 0 || !(options.tol > 0.0))
    throw InvalidArgument("constraint_flow: invalid options");
  const ConstraintEvaluator eval = make_evaluator(csys, sys);
  FlowResult out{sys, false, 0, 0, 0.0, {}};

  Eigen::VectorXd gamma;
  Eigen::MatrixXd jac;
  auto field = [&](const Eigen::VectorXd& y, Eigen::VectorXd& F) {
    eval(y, gamma, &jac);
    if (!gamma.allFinite()) return false;
    const double g2 = gamma.squaredNorm();
    if (g2 == 0.0) {
      F.setZero(y.size());
      return true;
    }
    const Eigen::VectorXd g = jac.transpose() * gamma;
    const double n2 = g.squaredNorm();
    if (std::sqrt(n2) < 1e-300) {
      throw NumericalError("constraint_flow: zero flow field at an infeasible point (ZeroFlowField)");
    }
    F = (-g2 / n2) * g;
    return F.allFinite();
  };

  Eigen::VectorXd y = sys.coordinates();
  eval(y, gamma, nullptr);
  double res2 = gamma.norm();
  out.residual_inf = inf_norm(gamma);
  out.history.push_back(out.residual_inf);
  if (out.residual_inf <= options.tol) {
    out.converged = true;
    return out;
  }

  double h = options.h0;
  int streak = 0;
  Eigen::VectorXd k1, k2, k3, trial;
  while (out.iterations < options.max_iters) {
    ++out.iterations;
    bool ok = field(y, k1);
    ok = ok && field(y + (0.5 * h) * k1, k2);
    ok = ok && field(y + (0.75 * h) * k2, k3);
    if (ok) {
      trial = y + h * ((2.0 / 9.0) * k1 + (1.0 / 3.0) * k2 + (4.0 / 9.0) * k3);
      eval(trial, gamma, nullptr);
      ok = gamma.allFinite() && gamma.norm() < res2;
    }
    if (!ok) {
      h *= 0.5;
      streak = 0;
      if (h < 1e-300) break;
      continue;
    }
    y = trial;
    res2 = gamma.norm();
    out.residual_inf = inf_norm(gamma);
    out.history.push_back(out.residual_inf);
    ++out.accepted;
    if (out.residual_inf <= options.tol) {
      out.converged = true;
      break;
    }
    if (++streak >= options.grow_after) {
      h *= 2.0;
      streak = 0;
    }
  }
  out.system.set_coordinates(y);
  return out;
}

Subsample nnls_subsample(const Eigen::MatrixXd& samples, int M, const ConstraintSystem& csys) {
  const int N = csys.basis().size();
  const int d = csys.basis().dimension();
  if (samples.cols() != static_cast<Eigen::Index>(M) * d) throw InvalidArgument("nnls_subsample: row width must be M*d");
  const Eigen::Index Kinf = samples.rows();
  Eigen::MatrixXd Phi(N + 1, Kinf);
  Eigen::VectorXd row(samples.cols());
  for (Eigen::Index k = 0; k < Kinf; ++k) {
    row = samples.row(k).transpose();
    Phi.col(k).head(N) = csys.particle_average(std::span<const double>(row.data(), row.size()), M);
    Phi(N, k) = 1.0;
  }
  Eigen::VectorXd target(N + 1);
  target << csys.basis().target_moments(), 1.0;

  Subsample out;
  out.nnls = nnls(Phi, target);
  const auto& J = out.nnls.support;
  out.indices = J;
  out.particles.resize(static_cast<Eigen::Index>(J.size()), samples.cols());
  out.weights.resize(static_cast<Eigen::Index>(J.size()));
  for (std::size_t j = 0; j < J.size(); ++j) {
    out.particles.row(j) = samples.row(J[j]);
    out.weights(j) = out.nnls.x(J[j]);
  }
  return out;
}

std::vector<int> largest_remainder_counts(const Eigen::VectorXd& weights, int K) {
  const double total = weights.sum();
  if (!(total > 0.0) || (weights.array() < 0.0).any()) throw InvalidArgument("expand_support: weights must be >= 0 with positive sum");
  const Eigen::Index n = weights.size();
  std::vector<int> counts(n);
  std::vector<double> rem(n);
  int assigned = 0;
  for (Eigen::Index j = 0; j < n; ++j) {
    const double share = K * weights(j) / total;
    counts[j] = static_cast<int>(std::floor(share));
    rem[j] = share - counts[j];
    assigned += counts[j];
  }
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return rem[a] > rem[b]; });
  for (int i = 0; assigned < K; ++i, ++assigned) ++counts[order[i % n]];
  return counts;
}

ParticleSystem expand_support(const Eigen::MatrixXd& support, const Eigen::VectorXd& weights, Shape shape,
                              const Eigen::VectorXd& sigma, std::uint64_t seed,
                              const std::optional<WeightFunction>& weight_function) {
  if (support.rows() != weights.size() || support.rows() < 1) throw InvalidArgument("expand_support: empty or mismatched support");
  if (support.rows() > shape.K) throw InvalidArgument("expand_support: support larger than K");
  if (support.cols() != static_cast<Eigen::Index>(shape.M) * shape.d || sigma.size() != shape.d)
    throw InvalidArgument("expand_support: shape mismatch");
  const std::vector<int> counts = largest_remainder_counts(weights, shape.K);
  const double total = weights.sum();

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd pos(shape.position_count());
  Eigen::VectorXd params(shape.K);
  int k = 0;
  for (Eigen::Index j = 0; j < support.rows(); ++j) {
    for (int c = 0; c < counts[j]; ++c, ++k) {
      for (int m = 0; m < shape.M; ++m) {
        for (int i = 0; i < shape.d; ++i) {
          double v = support(j, m * shape.d + i);
          if (sigma(i) > 0.0) v += sigma(i) * normal(rng);
          pos(shape.point_offset(k, m) + i) = v;
        }
      }
      if (weight_function) params(k) = weight_function->preimage(shape.K * (weights(j) / total) / counts[j]);
    }
  }
  if (weight_function) return ParticleSystem(shape, std::move(pos), *weight_function, std::move(params));
  return ParticleSystem(shape, std::move(pos));
}

InitResult initialize(const MarginalLaw& law, const ConstraintSystem& csys, Shape shape,
                      const std::optional<WeightFunction>& weight_function, const InitOptions& options,
                      std::uint64_t seed) {
  if (shape.d != law.dimension() || shape.d != csys.basis().dimension())
    throw InvalidArgument("initialize: law, basis and particle dimensions differ");
  InitReport report;
  report.method = to_string(options.method);

  std::optional<ParticleSystem> start;
  if (options.method == InitMethod::RK3) {
    const Eigen::MatrixXd pts = sample(law, shape.K * shape.M, seed);
    Eigen::VectorXd flat = flatten_rows(pts);
    if (weight_function) {
      const double a = weight_function->preimage(1.0);
      start.emplace(shape, std::move(flat), *weight_function, Eigen::VectorXd::Constant(shape.K, a));
    } else {
      start.emplace(shape, std::move(flat));
    }
    report.support_size = shape.K;
  } else {
    const int Kinf = options.K_inf > 0 ? options.K_inf : 100 * shape.K;
    const Eigen::MatrixXd pts = sample(law, Kinf * shape.M, seed ^ kCandidateStream);
    Eigen::MatrixXd cand(Kinf, shape.M * shape.d);
    for (int k = 0; k < Kinf; ++k)
      for (int m = 0; m < shape.M; ++m) cand.row(k).segment(m * shape.d, shape.d) = pts.row(k * shape.M + m);
    const Subsample sub = nnls_subsample(cand, shape.M, csys);
    report.support_size = static_cast<int>(sub.indices.size());
    report.nnls_residual = sub.nnls.residual;
    report.nnls_kkt = sub.nnls.kkt_residual;
    if (sub.indices.empty()) throw NotConverged("initialize: NNLS returned an empty support");
    const Eigen::VectorXd sigma = options.jitter * coordinate_std(pts);
    start.emplace(expand_support(sub.particles, sub.weights, shape, sigma, seed ^ kJitterStream, weight_function));
  }

  FlowResult flow = constraint_flow(*start, csys, options.flow);
  report.initial_residual = flow.history.front();
  report.flow_iterations = flow.iterations;
  report.flow_accepted = flow.accepted;
  report.history = flow.history;
  ParticleSystem sys = flow.system;
  double residual = flow.residual_inf;

  if (residual > options.flow.tol && options.newton_polish) {
    const ConstraintEvaluator eval = make_evaluator(csys, sys);
    Eigen::VectorXd gamma;
    Eigen::MatrixXd jac;
    eval(sys.coordinates(), gamma, &jac);
    ProjectionOptions popt;
    popt.tolerance = options.flow.tol;
    const ProjectionResult pr = project(eval, sys.coordinates(), jac, Eigen::VectorXd::Zero(gamma.size()), popt);
    if (pr.ok()) {
      sys.set_coordinates(pr.state);
      residual = pr.residual;
      report.polished = true;
    }
  }
  report.final_residual = residual;
  report.converged = residual <= options.flow.tol;
  return {std::move(sys), std::move(report)};
}

}  // namespace mcot
