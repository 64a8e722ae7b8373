#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "mcot/model.hpp"

namespace mcot {

using ThetaFn = std::function<double(double)>;

/// Discrete measure on (R^d)^M: atom k has weight weights(k) and coordinates
/// atoms.row(k) (M*d entries, point-major).
struct WeightedAtomSet {
  int M = 1;
  int d = 1;
  Eigen::VectorXd weights;
  Eigen::MatrixXd atoms;

  int size() const noexcept { return static_cast<int>(weights.size()); }
};

WeightedAtomSet atoms_from_system(const ParticleSystem& sys);

/// (N+3) x K matrix of per-atom functionals: phi-averages, 1, c(X), theta-average(X).
Eigen::MatrixXd functional_matrix(const WeightedAtomSet& set, const ConstraintSystem& csys, const CoulombCost& cost,
                                  const ThetaFn& theta);

struct ReductionResult {
  WeightedAtomSet set;       ///< the surviving atoms with their new weights
  std::vector<int> indices;  ///< rows of the input each surviving atom came from
  int steps = 0;             ///< elimination steps performed
};

/// Caratheodory elimination: repeatedly moves the weights along a null vector of the
/// functional matrix until one weight vanishes, so that all N+3 functionals are kept
/// while the support shrinks to at most N+3 atoms of the input.
ReductionResult tchakaloff_reduce(const WeightedAtomSet& set, const ConstraintSystem& csys, const CoulombCost& cost,
                                  const ThetaFn& theta = [](double r) { return r * r; });

/// A state of K weighted slots: weights (K) and flat positions (K*M*d).
struct PathState {
  Eigen::VectorXd weights;
  Eigen::VectorXd positions;
};

PathState state_from_system(const ParticleSystem& sys);

struct PolygonalPath {
  Shape shape;
  std::vector<double> t;  ///< strictly increasing, from 0 to 1
  std::vector<PathState> breakpoints;
  std::vector<std::string> labels;  ///< segment kind ending at each breakpoint

  PathState at(double s) const;
};

/// Polygonal path from start to end inside the feasible set along which the cost is
/// monotone. Requires K >= 2N+6 and feasible endpoints (||Gamma||_inf <= feasibility_tol).
PolygonalPath monotone_path(const PathState& start, const PathState& end, Shape shape, const ConstraintSystem& csys,
                            const CoulombCost& cost, const ThetaFn& theta = [](double r) { return r * r; },
                            double feasibility_tol = 1e-9);

double path_cost(const PathState& s, Shape shape, const CoulombCost& cost);
/// max(||moment residual||_inf, |mass - 1|)
double path_residual(const PathState& s, Shape shape, const ConstraintSystem& csys);

struct PathCheck {
  std::vector<double> t;
  std::vector<double> cost;
  std::vector<double> residual;
  double max_residual = 0.0;
  double min_weight = 0.0;
  double monotonicity_violation = 0.0;  ///< largest step against the start-to-end direction
  bool ok(double tol = 1e-9) const noexcept {
    return max_residual <= tol && monotonicity_violation <= tol && min_weight >= -tol;
  }
};

/// Samples `samples` uniform parameters plus all breakpoints.
PathCheck check_path(const PolygonalPath& path, const ConstraintSystem& csys, const CoulombCost& cost,
                     int samples = 101);

}  // namespace mcot
