#include "mcot/polynomial.hpp"

#include <cmath>

#include "mcot/error.hpp"

namespace mcot {

PolynomialFamily1D PolynomialFamily1D::legendre(int max_degree) {
  if (max_degree < 0) throw InvalidArgument("legendre family: negative degree");
  PolynomialFamily1D f;
  f.kind_ = Kind::Legendre;
  f.size_ = max_degree + 1;
  f.max_degree_ = max_degree;
  return f;
}

PolynomialFamily1D PolynomialFamily1D::monomial(double center, double scale, Eigen::MatrixXd coefficients) {
  if (!(scale > 0.0)) throw InvalidArgument("monomial family: scale must be > 0");
  if (coefficients.rows() < 1 || coefficients.cols() < 1) throw InvalidArgument("monomial family: empty");
  PolynomialFamily1D f;
  f.kind_ = Kind::Monomial;
  f.size_ = static_cast<int>(coefficients.rows());
  f.max_degree_ = static_cast<int>(coefficients.cols()) - 1;
  f.center_ = center;
  f.scale_ = scale;
  f.coeffs_ = std::move(coefficients);
  return f;
}

PolynomialFamily1D PolynomialFamily1D::recurrence(double center, double scale, Eigen::VectorXd a, Eigen::VectorXd b,
                                                  Eigen::VectorXd member_scale) {
  if (!(scale > 0.0)) throw InvalidArgument("recurrence family: scale must be > 0");
  const auto L = member_scale.size();
  if (L < 1 || a.size() != L - 1 || b.size() != L) throw InvalidArgument("recurrence family: inconsistent sizes");
  for (Eigen::Index l = 1; l < L; ++l) {
    if (!(b(l) > 0.0)) throw InvalidArgument("recurrence family: b must be positive");
  }
  PolynomialFamily1D f;
  f.kind_ = Kind::Recurrence;
  f.size_ = static_cast<int>(L);
  f.max_degree_ = static_cast<int>(L) - 1;
  f.center_ = center;
  f.scale_ = scale;
  f.a_ = std::move(a);
  f.b_ = std::move(b);
  f.member_scale_ = std::move(member_scale);
  return f;
}

void PolynomialFamily1D::evaluate(double x, std::span<double> values, std::span<double> derivatives) const {
  if (kind_ == Kind::Recurrence) {
    const double t = (x - center_) / scale_;
    double qm = 0.0, q = 1.0, dqm = 0.0, dq = 0.0;
    values[0] = member_scale_(0);
    derivatives[0] = 0.0;
    for (int l = 0; l + 1 < size_; ++l) {
      const double bl = l > 0 ? b_(l) : 0.0;
      const double qn = ((t - a_(l)) * q - bl * qm) / b_(l + 1);
      const double dqn = ((t - a_(l)) * dq + q - bl * dqm) / b_(l + 1);
      qm = q;
      q = qn;
      dqm = dq;
      dq = dqn;
      values[l + 1] = member_scale_(l + 1) * q;
      derivatives[l + 1] = member_scale_(l + 1) * dq / scale_;
    }
    return;
  }
  if (kind_ == Kind::Legendre) {
    values[0] = 1.0;
    derivatives[0] = 0.0;
    if (size_ == 1) return;
    values[1] = x;
    derivatives[1] = 1.0;
    for (int n = 1; n + 1 < size_; ++n) {
      // (n+1) P_{n+1} = (2n+1) x P_n - n P_{n-1}; P'_{n+1} = P'_{n-1} + (2n+1) P_n
      values[n + 1] = ((2.0 * n + 1.0) * x * values[n] - n * values[n - 1]) / (n + 1.0);
      derivatives[n + 1] = derivatives[n - 1] + (2.0 * n + 1.0) * values[n];
    }
    return;
  }
  const double t = (x - center_) / scale_;
  const double inv_scale = 1.0 / scale_;
  for (int l = 0; l < size_; ++l) {
    double v = 0.0, dv = 0.0;
    for (int j = max_degree_; j >= 0; --j) {
      dv = dv * t + v;
      v = v * t + coeffs_(l, j);
    }
    values[l] = v;
    derivatives[l] = dv * inv_scale;
  }
}

void PolynomialFamily1D::evaluate(double x, std::span<double> values) const {
  if (kind_ == Kind::Recurrence) {
    const double t = (x - center_) / scale_;
    double qm = 0.0, q = 1.0;
    values[0] = member_scale_(0);
    for (int l = 0; l + 1 < size_; ++l) {
      const double qn = ((t - a_(l)) * q - (l > 0 ? b_(l) : 0.0) * qm) / b_(l + 1);
      qm = q;
      q = qn;
      values[l + 1] = member_scale_(l + 1) * q;
    }
    return;
  }
  if (kind_ == Kind::Legendre) {
    values[0] = 1.0;
    if (size_ == 1) return;
    values[1] = x;
    for (int n = 1; n + 1 < size_; ++n) {
      values[n + 1] = ((2.0 * n + 1.0) * x * values[n] - n * values[n - 1]) / (n + 1.0);
    }
    return;
  }
  const double t = (x - center_) / scale_;
  for (int l = 0; l < size_; ++l) {
    double v = 0.0;
    for (int j = max_degree_; j >= 0; --j) v = v * t + coeffs_(l, j);
    values[l] = v;
  }
}

Eigen::VectorXd PolynomialFamily1D::monomial_coefficients(int member) const {
  if (member < 0 || member >= size_) throw InvalidArgument("monomial_coefficients: member out of range");
  if (kind_ == Kind::Monomial) return coeffs_.row(member).transpose();
  if (kind_ == Kind::Recurrence) {
    Eigen::VectorXd qm = Eigen::VectorXd::Zero(max_degree_ + 1);
    Eigen::VectorXd q = Eigen::VectorXd::Zero(max_degree_ + 1);
    q(0) = 1.0;
    for (int l = 0; l < member; ++l) {
      Eigen::VectorXd next = -a_(l) * q;
      next.tail(max_degree_) += q.head(max_degree_);
      if (l > 0) next -= b_(l) * qm;
      next /= b_(l + 1);
      qm = std::move(q);
      q = std::move(next);
    }
    return member_scale_(member) * q;
  }
  // Legendre coefficients by the same recurrence applied to coefficient vectors.
  Eigen::VectorXd prev = Eigen::VectorXd::Zero(max_degree_ + 1);
  Eigen::VectorXd cur = Eigen::VectorXd::Zero(max_degree_ + 1);
  prev(0) = 1.0;
  if (member == 0) return prev;
  cur(1) = 1.0;
  for (int n = 1; n < member; ++n) {
    Eigen::VectorXd next = Eigen::VectorXd::Zero(max_degree_ + 1);
    for (int j = 0; j < max_degree_; ++j) next(j + 1) += (2.0 * n + 1.0) * cur(j);
    next -= n * prev;
    next /= (n + 1.0);
    prev = cur;
    cur = next;
  }
  return cur;
}

}  // namespace mcot
