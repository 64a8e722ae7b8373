#include "mcot/projection.hpp"

#include <Eigen/LU>

#include "mcot/error.hpp"

namespace mcot {

std::string to_string(ProjectionStatus status) {
  switch (status) {
    case ProjectionStatus::Success: return "success";
    case ProjectionStatus::Failure: return "failure";
    case ProjectionStatus::SingularGram: return "singular_gram";
    case ProjectionStatus::NonFinite: return "non_finite";
  }
  return "unknown";
}

ConstraintEvaluator make_evaluator(const ConstraintSystem& csys, const ParticleSystem& like) {
  // The evaluator owns a scratch system so it can be called with bare coordinates.
  auto scratch = std::make_shared<ParticleSystem>(like);
  return [&csys, scratch](const Eigen::VectorXd& y, Eigen::VectorXd& gamma, Eigen::MatrixXd* jac) {
    scratch->set_coordinates(y);
    if (jac) {
      csys.evaluate(*scratch, gamma, *jac);
    } else {
      gamma = csys.constraints(*scratch);
    }
  };
}

ProjectionResult project(const ConstraintEvaluator& gamma_fn, const Eigen::VectorXd& state_half,
                         const Eigen::MatrixXd& jacobian_at_prev, const Eigen::VectorXd& multiplier_init,
                         const ProjectionOptions& options) {
  if (jacobian_at_prev.cols() != state_half.size() || jacobian_at_prev.rows() != multiplier_init.size()) {
    throw InvalidArgument("project: dimension mismatch between state, Jacobian and multiplier");
  }
  ProjectionResult result;
  result.multiplier = multiplier_init;
  Eigen::VectorXd gamma;
  Eigen::MatrixXd jac;
  Eigen::VectorXd y = state_half + jacobian_at_prev.transpose() * result.multiplier;
  for (int i = 0;; ++i) {
    gamma_fn(y, gamma, nullptr);
    result.newton_iterations = i;
    if (!gamma.allFinite() || !y.allFinite()) {
      result.residual = std::numeric_limits<double>::infinity();
      result.status = ProjectionStatus::NonFinite;
      return result;
    }
    result.residual = gamma.size() ? gamma.cwiseAbs().maxCoeff() : 0.0;
    if (result.residual <= options.tolerance) {
      result.state = std::move(y);
      result.status = ProjectionStatus::Success;
      return result;
    }
    if (i >= options.max_iterations) {
      result.status = ProjectionStatus::Failure;
      return result;
    }
    gamma_fn(y, gamma, &jac);
    const Eigen::MatrixXd gram = jac * jacobian_at_prev.transpose();
    if (!gram.allFinite()) {
      result.status = ProjectionStatus::NonFinite;
      return result;
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(gram);
    if (!(lu.rcond() >= options.singular_rcond)) {
      result.status = ProjectionStatus::SingularGram;
      return result;
    }
    result.multiplier -= lu.solve(gamma);
    y = state_half + jacobian_at_prev.transpose() * result.multiplier;
  }
}

}  // namespace mcot
