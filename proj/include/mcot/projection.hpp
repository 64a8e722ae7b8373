#pragma once

#include <Eigen/Dense>
#include <functional>

#include "mcot/model.hpp"

namespace mcot {

/// y -> Gamma(y), optionally with the Jacobian (rows = constraints, cols = coordinates).
/// `jac` may be null when only the residual is needed.
using ConstraintEvaluator = std::function<void(const Eigen::VectorXd& y, Eigen::VectorXd& gamma, Eigen::MatrixXd* jac)>;

/// Adapter evaluating `csys` on particle systems shaped like `like`.
ConstraintEvaluator make_evaluator(const ConstraintSystem& csys, const ParticleSystem& like);

enum class ProjectionStatus { Success, Failure, SingularGram, NonFinite };

std::string to_string(ProjectionStatus status);

struct ProjectionResult {
  Eigen::VectorXd state;       ///< projected coordinates (meaningful on Success only)
  Eigen::VectorXd multiplier;  ///< final Lambda
  int newton_iterations = 0;
  double residual = 0.0;  ///< ||Gamma||_inf at the last evaluated point
  ProjectionStatus status = ProjectionStatus::Failure;

  bool ok() const noexcept { return status == ProjectionStatus::Success; }
};

struct ProjectionOptions {
  int max_iterations = 50;
  double tolerance = 1e-12;  ///< on ||Gamma||_inf
  double singular_rcond = 1e-14;
};

/// Newton solve of Gamma(state_half + J_prev^T Lambda) = 0 for Lambda.
///
/// The left Jacobian is re-evaluated at the moving point while the right factor stays
/// frozen at the previous state: each step solves
///   (J(y_i) J_prev^T) delta = Gamma(y_i),  Lambda_{i+1} = Lambda_i - delta.
/// The stopping test is checked before every update, so an already-feasible input
/// returns after zero iterations.
ProjectionResult project(const ConstraintEvaluator& gamma, const Eigen::VectorXd& state_half,
                         const Eigen::MatrixXd& jacobian_at_prev, const Eigen::VectorXd& multiplier_init,
                         const ProjectionOptions& options = {});

}  // namespace mcot
