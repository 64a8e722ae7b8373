#pragma once

#include <Eigen/Dense>
#include <span>

namespace mcot {

/// An ordered family of univariate polynomials p_0, ..., p_{L-1} that are evaluated together.
///
/// Two representations:
///  - Legendre: p_l = P_l (Legendre polynomial of degree l), evaluated by the three-term
///    recurrence so high degrees stay accurate on [-1, 1];
///  - Monomial: p_l(x) = sum_j c(l, j) t^j with t = (x - center) / scale, which keeps the
///    coefficients moderate for laws that are far from the origin;
///  - Recurrence: orthonormal q_l in t by q_{l+1} = ((t - a_l) q_l - b_l q_{l-1}) / b_{l+1},
///    q_0 = 1, and p_l = member_scale_l * q_l. Stable where monomial sums cancel.
class PolynomialFamily1D {
 public:
  enum class Kind { Legendre, Monomial, Recurrence };

  static PolynomialFamily1D legendre(int max_degree);
  /// `coefficients` has one row per member; column j multiplies t^j.
  static PolynomialFamily1D monomial(double center, double scale, Eigen::MatrixXd coefficients);
  /// `a` holds a_0..a_{L-1}, `b` holds b_0..b_L (b_0 unused), `member_scale` one entry per member.
  static PolynomialFamily1D recurrence(double center, double scale, Eigen::VectorXd a, Eigen::VectorXd b,
                                       Eigen::VectorXd member_scale);

  Kind kind() const noexcept { return kind_; }
  int size() const noexcept { return size_; }
  int max_degree() const noexcept { return max_degree_; }
  double center() const noexcept { return center_; }
  double scale() const noexcept { return scale_; }

  /// Values and first derivatives (w.r.t. x) of every member at x.
  void evaluate(double x, std::span<double> values, std::span<double> derivatives) const;
  void evaluate(double x, std::span<double> values) const;

  /// Coefficients of member l in powers of t = (x - center) / scale.
  Eigen::VectorXd monomial_coefficients(int member) const;

 private:
  Kind kind_ = Kind::Monomial;
  int size_ = 0;
  int max_degree_ = 0;
  double center_ = 0.0;
  double scale_ = 1.0;
  Eigen::MatrixXd coeffs_;  // Monomial only
  Eigen::VectorXd a_, b_, member_scale_;  // Recurrence only
};

}  // namespace mcot
