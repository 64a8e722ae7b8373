#include "mcot/nnls.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <limits>

#include "mcot/error.hpp"

namespace mcot {
namespace {

Eigen::VectorXd solve_passive(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, const std::vector<int>& passive) {
  Eigen::MatrixXd Ap(A.rows(), static_cast<Eigen::Index>(passive.size()));
  for (std::size_t j = 0; j < passive.size(); ++j) Ap.col(j) = A.col(passive[j]);
  return Ap.colPivHouseholderQr().solve(b);
}

}  // namespace

NnlsResult nnls(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, int max_pivots) {
  const Eigen::Index m = A.rows(), n = A.cols();
  if (b.size() != m) throw InvalidArgument("nnls: dimension mismatch");
  if (max_pivots < 0) max_pivots = static_cast<int>(10 * n);
  const double tol = 10.0 * std::numeric_limits<double>::epsilon() * A.cwiseAbs().maxCoeff() *
                     static_cast<double>(std::max(m, n)) * std::max(1.0, b.cwiseAbs().maxCoeff());

  NnlsResult out;
  out.x = Eigen::VectorXd::Zero(n);
  std::vector<char> in_passive(n, 0);
  std::vector<int> passive;
  Eigen::VectorXd w = A.transpose() * (b - A * out.x);

  while (static_cast<Eigen::Index>(passive.size()) < std::min(m, n)) {
    Eigen::Index best = -1;
    double best_val = tol;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!in_passive[j] && w(j) > best_val) {
        best_val = w(j);
        best = j;
      }
    }
    if (best < 0) break;
    in_passive[best] = 1;
    passive.push_back(static_cast<int>(best));
    if (++out.pivots > max_pivots) throw NotConverged("nnls: active set did not converge");

    while (true) {
      const Eigen::VectorXd z = solve_passive(A, b, passive);
      bool feasible = true;
      for (Eigen::Index i = 0; i < z.size(); ++i) feasible = feasible && z(i) > 0.0;
      if (feasible) {
        for (std::size_t i = 0; i < passive.size(); ++i) out.x(passive[i]) = z(i);
        break;
      }
      // Step from x toward z until the first passive coordinate hits zero.
      double alpha = std::numeric_limits<double>::infinity();
      std::size_t blocking = 0;
      for (std::size_t i = 0; i < passive.size(); ++i) {
        if (z(i) <= 0.0) {
          const double xi = out.x(passive[i]);
          const double a = xi / (xi - z(i));
          if (a < alpha) {
            alpha = a;
            blocking = i;
          }
        }
      }
      for (std::size_t i = 0; i < passive.size(); ++i) {
        double& xi = out.x(passive[i]);
        xi += alpha * (z(i) - xi);
      }
      out.x(passive[blocking]) = 0.0;  // exact zero despite rounding in the step
      std::vector<int> kept;
      for (int j : passive) {
        if (out.x(j) > 0.0) {
          kept.push_back(j);
        } else {
          out.x(j) = 0.0;
          in_passive[j] = 0;
        }
      }
      passive.swap(kept);
      if (++out.pivots > max_pivots) throw NotConverged("nnls: active set did not converge");
      if (passive.empty()) break;
    }
    w = A.transpose() * (b - A * out.x);
  }

  const Eigen::VectorXd r = A * out.x - b;
  out.residual = r.norm();
  std::sort(passive.begin(), passive.end());
  out.support = passive;
  for (int j : passive) out.kkt_residual = std::max(out.kkt_residual, std::abs(A.col(j).dot(r)));
  return out;
}

}  // namespace mcot
