#include "mcot/theory.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "mcot/error.hpp"

namespace mcot {
namespace {

double theta_average(std::span<const double> X, int M, int d, const ThetaFn& theta) {
  double acc = 0.0;
  for (int m = 0; m < M; ++m) {
    double r2 = 0.0;
    for (int i = 0; i < d; ++i) r2 += X[m * d + i] * X[m * d + i];
    acc += theta(std::sqrt(r2));
  }
  return acc / M;
}

std::span<const double> slot(const PathState& s, Shape shape, int k) {
  return {s.positions.data() + shape.point_offset(k, 0), static_cast<std::size_t>(shape.M * shape.d)};
}

void set_slot(PathState& s, Shape shape, int k, std::span<const double> X) {
  std::copy(X.begin(), X.end(), s.positions.data() + shape.point_offset(k, 0));
}

bool same_state(const PathState& a, const PathState& b) {
  return a.weights == b.weights && a.positions == b.positions;
}

// Replaces the weights of `s` by a Tchakaloff reduction of its positive-weight slots.
PathState reduce_weights(const PathState& s, Shape shape, const ConstraintSystem& csys, const CoulombCost& cost,
                         const ThetaFn& theta) {
  std::vector<int> live;
  for (int k = 0; k < shape.K; ++k)
    if (s.weights(k) > 0.0) live.push_back(k);
  WeightedAtomSet set{shape.M, shape.d, Eigen::VectorXd(live.size()), Eigen::MatrixXd(live.size(), shape.M * shape.d)};
  for (std::size_t j = 0; j < live.size(); ++j) {
    set.weights(j) = s.weights(live[j]);
    const auto X = slot(s, shape, live[j]);
    for (int c = 0; c < shape.M * shape.d; ++c) set.atoms(j, c) = X[c];
  }
  const ReductionResult red = tchakaloff_reduce(set, csys, cost, theta);
  PathState out{Eigen::VectorXd::Zero(shape.K), s.positions};
  for (std::size_t j = 0; j < red.indices.size(); ++j) out.weights(live[red.indices[j]]) = red.set.weights(j);
  return out;
}

// Weights and positions of the slots used by the end side, laid out so that the
// support of the end state avoids the support of the start state. Returns the
// breakpoints walking away from `s` (which is reduced and feasible).
std::vector<std::pair<PathState, std::string>> evacuate(const PathState& s, Shape shape,
                                                        const std::vector<char>& reserved) {
  std::vector<std::pair<PathState, std::string>> steps;
  std::vector<int> conflicts, free_slots;
  for (int k = 0; k < shape.K; ++k) {
    if (s.weights(k) > 0.0 && reserved[k]) conflicts.push_back(k);
    if (s.weights(k) == 0.0 && !reserved[k]) free_slots.push_back(k);
  }
  if (conflicts.empty()) return steps;
  if (free_slots.size() < conflicts.size()) throw InvalidArgument("monotone_path: not enough free slots (need K >= 2N+6)");
  // Empty slots first take the positions of the conflicting atoms (no weight moves).
  PathState moved = s;
  for (std::size_t j = 0; j < conflicts.size(); ++j) set_slot(moved, shape, free_slots[j], slot(s, shape, conflicts[j]));
  steps.emplace_back(moved, "shuttle_positions");
  // Then weight passes between coincident slots, which leaves every functional unchanged.
  PathState traded = moved;
  for (std::size_t j = 0; j < conflicts.size(); ++j) {
    traded.weights(free_slots[j]) = moved.weights(conflicts[j]);
    traded.weights(conflicts[j]) = 0.0;
  }
  steps.emplace_back(traded, "shuttle_weights");
  return steps;
}

}  // namespace

WeightedAtomSet atoms_from_system(const ParticleSystem& sys) {
  const Shape s = sys.shape();
  WeightedAtomSet set{s.M, s.d, Eigen::VectorXd(s.K), Eigen::MatrixXd(s.K, s.M * s.d)};
  for (int k = 0; k < s.K; ++k) {
    set.weights(k) = sys.weight(k);
    const auto X = sys.particle(k);
    for (int j = 0; j < s.M * s.d; ++j) set.atoms(k, j) = X[j];
  }
  return set;
}

Eigen::MatrixXd functional_matrix(const WeightedAtomSet& set, const ConstraintSystem& csys, const CoulombCost& cost,
                                  const ThetaFn& theta) {
  const int N = csys.basis().size();
  if (set.d != csys.basis().dimension() || set.atoms.cols() != set.M * set.d || set.atoms.rows() != set.size())
    throw InvalidArgument("functional_matrix: atom shape mismatch");
  Eigen::MatrixXd F(N + 3, set.size());
  Eigen::VectorXd X(set.M * set.d);
  for (int k = 0; k < set.size(); ++k) {
    X = set.atoms.row(k).transpose();
    const std::span<const double> xs(X.data(), X.size());
    F.col(k).head(N) = csys.particle_average(xs, set.M);
    F(N, k) = 1.0;
    F(N + 1, k) = cost.particle_cost(xs, set.M, set.d);
    F(N + 2, k) = theta_average(xs, set.M, set.d, theta);
  }
  if (!F.allFinite()) throw NumericalError("functional_matrix: non-finite functional value");
  return F;
}

ReductionResult tchakaloff_reduce(const WeightedAtomSet& set, const ConstraintSystem& csys, const CoulombCost& cost,
                                  const ThetaFn& theta) {
  if ((set.weights.array() < 0.0).any()) throw InvalidArgument("tchakaloff_reduce: negative weight");
  const int R = csys.basis().size() + 3;
  ReductionResult out;
  if (set.size() <= R) {
    out.set = set;
    out.indices.resize(set.size());
    std::iota(out.indices.begin(), out.indices.end(), 0);
    return out;
  }
  Eigen::MatrixXd F = functional_matrix(set, csys, cost, theta);
  // Row scaling leaves the null space unchanged and evens out the magnitudes.
  for (Eigen::Index r = 0; r < F.rows(); ++r) {
    const double s = F.row(r).cwiseAbs().maxCoeff();
    if (s > 0.0) F.row(r) /= s;
  }
  Eigen::VectorXd w = set.weights;
  std::vector<int> active;
  for (int k = 0; k < set.size(); ++k)
    if (w(k) > 0.0) active.push_back(k);

  Eigen::MatrixXd A(R, R + 1);
  while (static_cast<int>(active.size()) > R) {
    for (int j = 0; j <= R; ++j) A.col(j) = F.col(active[j]);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
    const Eigen::VectorXd v = svd.matrixV().col(R);
    // Largest admissible step in each direction, and the weight it zeroes.
    double t_plus = std::numeric_limits<double>::infinity(), t_minus = t_plus;
    int i_plus = -1, i_minus = -1;
    for (int j = 0; j <= R; ++j) {
      const double wj = w(active[j]);
      if (v(j) < 0.0 && wj / -v(j) < t_plus) {
        t_plus = wj / -v(j);
        i_plus = j;
      }
      if (v(j) > 0.0 && wj / v(j) < t_minus) {
        t_minus = wj / v(j);
        i_minus = j;
      }
    }
    if (i_plus < 0 && i_minus < 0) throw NumericalError("tchakaloff_reduce: zero null vector");
    bool plus;
    if (i_minus < 0) plus = true;
    else if (i_plus < 0) plus = false;
    else if (t_plus != t_minus) plus = t_plus < t_minus;
    else plus = i_plus < i_minus;
    const double step = plus ? t_plus : -t_minus;
    const int hit = plus ? i_plus : i_minus;
    for (int j = 0; j <= R; ++j) w(active[j]) += step * v(j);
    w(active[hit]) = 0.0;
    std::vector<int> next;
    for (int k : active) {
      if (w(k) > 0.0) next.push_back(k);
      else w(k) = 0.0;
    }
    if (next.size() >= active.size()) throw NumericalError("tchakaloff_reduce: elimination made no progress");
    active.swap(next);
    ++out.steps;
  }
  out.indices = active;
  out.set = WeightedAtomSet{set.M, set.d, Eigen::VectorXd(active.size()), Eigen::MatrixXd(active.size(), set.atoms.cols())};
  for (std::size_t j = 0; j < active.size(); ++j) {
    out.set.weights(j) = w(active[j]);
    out.set.atoms.row(j) = set.atoms.row(active[j]);
  }
  return out;
}

PathState state_from_system(const ParticleSystem& sys) {
  const Shape s = sys.shape();
  PathState st{Eigen::VectorXd(s.K), sys.positions()};
  for (int k = 0; k < s.K; ++k) st.weights(k) = sys.weight(k);
  return st;
}

PathState PolygonalPath::at(double s) const {
  if (breakpoints.empty()) throw InvalidArgument("PolygonalPath: empty path");
  if (s <= t.front()) return breakpoints.front();
  if (s >= t.back()) return breakpoints.back();
  const auto it = std::upper_bound(t.begin(), t.end(), s);
  const std::size_t j = static_cast<std::size_t>(it - t.begin());
  const double lam = (s - t[j - 1]) / (t[j] - t[j - 1]);
  const PathState& a = breakpoints[j - 1];
  const PathState& b = breakpoints[j];
  return {(1.0 - lam) * a.weights + lam * b.weights, (1.0 - lam) * a.positions + lam * b.positions};
}

double path_cost(const PathState& s, Shape shape, const CoulombCost& cost) {
  double total = 0.0;
  for (int k = 0; k < shape.K; ++k)
    if (s.weights(k) != 0.0) total += s.weights(k) * cost.particle_cost(slot(s, shape, k), shape.M, shape.d);
  return total;
}

double path_residual(const PathState& s, Shape shape, const ConstraintSystem& csys) {
  const int N = csys.basis().size();
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(N);
  for (int k = 0; k < shape.K; ++k)
    if (s.weights(k) != 0.0) acc += s.weights(k) * csys.particle_average(slot(s, shape, k), shape.M);
  acc -= csys.basis().target_moments();
  const double moments = N ? acc.cwiseAbs().maxCoeff() : 0.0;
  return std::max(moments, std::abs(s.weights.sum() - 1.0));
}

PolygonalPath monotone_path(const PathState& start, const PathState& end, Shape shape, const ConstraintSystem& csys,
                            const CoulombCost& cost, const ThetaFn& theta, double feasibility_tol) {
  const int N = csys.basis().size();
  if (shape.K < 2 * N + 6) throw InvalidArgument("monotone_path: K must be >= 2N+6");
  for (const PathState* s : {&start, &end}) {
    if (s->weights.size() != shape.K || s->positions.size() != shape.position_count())
      throw InvalidArgument("monotone_path: endpoint shape mismatch");
    if ((s->weights.array() < 0.0).any()) throw InvalidArgument("monotone_path: negative weight");
    if (!(path_residual(*s, shape, csys) <= feasibility_tol)) throw InvalidArgument("monotone_path: infeasible endpoint");
  }

  // Start side: reduce, then move every empty slot onto the common template.
  const PathState r0 = reduce_weights(start, shape, csys, cost, theta);
  PathState r1 = reduce_weights(end, shape, csys, cost, theta);
  std::vector<char> in_J0(shape.K, 0);
  for (int k = 0; k < shape.K; ++k) in_J0[k] = r0.weights(k) > 0.0;

  // End side: shuttle end atoms out of the slots used by the start support.
  const auto end_steps = evacuate(r1, shape, in_J0);
  const PathState& r1s = end_steps.empty() ? r1 : end_steps.back().first;

  // Template: start atoms where the start lives, end atoms where the end lives,
  // start positions in the remaining (empty on both sides) slots.
  PathState tmpl{Eigen::VectorXd::Zero(shape.K), start.positions};
  for (int k = 0; k < shape.K; ++k)
    if (r1s.weights(k) > 0.0) set_slot(tmpl, shape, k, slot(r1s, shape, k));
  PathState m0{r0.weights, tmpl.positions};
  PathState m1{r1s.weights, tmpl.positions};

  std::vector<std::pair<PathState, std::string>> chain;
  chain.emplace_back(start, "start");
  chain.emplace_back(r0, "reduce_start");
  chain.emplace_back(m0, "align_start");
  chain.emplace_back(m1, "trade_weights");
  chain.emplace_back(r1s, "align_end");
  for (auto it = end_steps.rbegin(); it != end_steps.rend(); ++it) {
    // Walking back toward the end undoes each shuttle step; label by the segment kind.
    const auto next = std::next(it);
    chain.emplace_back(next == end_steps.rend() ? r1 : next->first, it->second);
  }
  chain.emplace_back(end, "expand_end");

  PolygonalPath path;
  path.shape = shape;
  for (auto& [state, label] : chain) {
    if (!path.breakpoints.empty() && same_state(path.breakpoints.back(), state)) continue;
    path.breakpoints.push_back(state);
    path.labels.push_back(label);
  }
  if (path.breakpoints.size() == 1) {
    path.breakpoints.push_back(path.breakpoints.front());
    path.labels.push_back("end");
  }
  const std::size_t n = path.breakpoints.size();
  for (std::size_t j = 0; j < n; ++j) path.t.push_back(static_cast<double>(j) / (n - 1));
  return path;
}

PathCheck check_path(const PolygonalPath& path, const ConstraintSystem& csys, const CoulombCost& cost, int samples) {
  if (samples < 2) throw InvalidArgument("check_path: need at least 2 samples");
  std::set<double> ts(path.t.begin(), path.t.end());
  for (int i = 0; i < samples; ++i) ts.insert(static_cast<double>(i) / (samples - 1));
  PathCheck out;
  out.min_weight = std::numeric_limits<double>::infinity();
  for (double s : ts) {
    const PathState st = path.at(s);
    out.t.push_back(s);
    out.cost.push_back(path_cost(st, path.shape, cost));
    out.residual.push_back(path_residual(st, path.shape, csys));
    out.max_residual = std::max(out.max_residual, out.residual.back());
    out.min_weight = std::min(out.min_weight, st.weights.minCoeff());
  }
  const double dir = out.cost.back() <= out.cost.front() ? -1.0 : 1.0;
  for (std::size_t j = 1; j < out.cost.size(); ++j)
    out.monotonicity_violation = std::max(out.monotonicity_violation, -dir * (out.cost[j] - out.cost[j - 1]));
  return out;
}

}  // namespace mcot
