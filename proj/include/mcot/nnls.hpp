#pragma once

#include <Eigen/Dense>
#include <vector>

namespace mcot {

struct NnlsResult {
  Eigen::VectorXd x;
  double residual = 0.0;      ///< ||A x - b||_2
  double kkt_residual = 0.0;  ///< max |A_P^T (A x - b)| over the passive set
  int pivots = 0;
  std::vector<int> support;   ///< indices with x > 0, ascending
};

/// Lawson-Hanson active-set solver for min ||A x - b||_2 subject to x >= 0.
/// Throws NotConverged after `max_pivots` passive-set changes (default 10 * cols).
NnlsResult nnls(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, int max_pivots = -1);

}  // namespace mcot
