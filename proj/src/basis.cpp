#include "mcot/basis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "mcot/error.hpp"
#include "mcot/quadrature.hpp"

namespace mcot {

std::string to_string(BasisKind kind) {
  switch (kind) {
    case BasisKind::Legendre1D: return "legendre";
    case BasisKind::HyperbolicCross3D: return "hyperbolic";
    case BasisKind::MeanCovariance3D: return "meancov";
  }
  return "unknown";
}

TestBasis::TestBasis(BasisKind kind, std::vector<PolynomialFamily1D> families, std::vector<TensorTerm> terms,
                     Eigen::VectorXd target_moments)
    : kind_(kind), families_(std::move(families)), terms_(std::move(terms)), targets_(std::move(target_moments)) {
  if (families_.empty()) throw InvalidArgument("TestBasis: no coordinate families");
  if (targets_.size() != static_cast<Eigen::Index>(terms_.size())) {
    throw InvalidArgument("TestBasis: target moment count does not match the number of functions");
  }
  for (const auto& f : families_) max_family_size_ = std::max(max_family_size_, f.size());
  for (const auto& t : terms_) {
    if (t.factors.size() != families_.size()) throw InvalidArgument("TestBasis: term dimension mismatch");
    for (std::size_t j = 0; j < t.factors.size(); ++j) {
      if (t.factors[j] < 0 || t.factors[j] >= families_[j].size()) {
        throw InvalidArgument("TestBasis: factor index out of range");
      }
    }
  }
}

std::string TestBasis::label(int n) const {
  std::ostringstream os;
  const auto& t = terms_.at(n);
  os << "phi(";
  for (std::size_t j = 0; j < t.factors.size(); ++j) os << (j ? "," : "") << t.factors[j];
  os << ")";
  return os.str();
}

void TestBasis::evaluate(std::span<const double> x, std::span<double> values) const {
  const int d = dimension();
  thread_local std::vector<double> buf;
  buf.resize(static_cast<std::size_t>(d) * max_family_size_);
  for (int j = 0; j < d; ++j) {
    families_[j].evaluate(x[j], std::span<double>(buf.data() + j * max_family_size_, families_[j].size()));
  }
  for (std::size_t n = 0; n < terms_.size(); ++n) {
    const auto& t = terms_[n];
    double v = t.scale;
    for (int j = 0; j < d; ++j) v *= buf[j * max_family_size_ + t.factors[j]];
    values[n] = v;
  }
}

void TestBasis::accumulate(std::span<const double> x, double weight, std::span<double> accum) const {
  const int d = dimension();
  thread_local std::vector<double> buf;
  buf.resize(static_cast<std::size_t>(d) * max_family_size_);
  for (int j = 0; j < d; ++j) {
    families_[j].evaluate(x[j], std::span<double>(buf.data() + j * max_family_size_, families_[j].size()));
  }
  for (std::size_t n = 0; n < terms_.size(); ++n) {
    const auto& t = terms_[n];
    double v = t.scale * weight;
    for (int j = 0; j < d; ++j) v *= buf[j * max_family_size_ + t.factors[j]];
    accum[n] += v;
  }
}

void TestBasis::evaluate_with_gradient(std::span<const double> x, std::span<double> values,
                                       std::span<double> gradients) const {
  const int d = dimension();
  const int stride = max_family_size_;
  thread_local std::vector<double> val, der;
  val.resize(static_cast<std::size_t>(d) * stride);
  der.resize(static_cast<std::size_t>(d) * stride);
  for (int j = 0; j < d; ++j) {
    families_[j].evaluate(x[j], std::span<double>(val.data() + j * stride, families_[j].size()),
                          std::span<double>(der.data() + j * stride, families_[j].size()));
  }
  for (std::size_t n = 0; n < terms_.size(); ++n) {
    const auto& t = terms_[n];
    if (d == 1) {
      values[n] = t.scale * val[t.factors[0]];
      gradients[n] = t.scale * der[t.factors[0]];
      continue;
    }
    if (d == 3) {
      const double a = val[t.factors[0]], b = val[stride + t.factors[1]], c = val[2 * stride + t.factors[2]];
      const double s = t.scale;
      values[n] = s * a * b * c;
      gradients[3 * n] = s * der[t.factors[0]] * b * c;
      gradients[3 * n + 1] = s * a * der[stride + t.factors[1]] * c;
      gradients[3 * n + 2] = s * a * b * der[2 * stride + t.factors[2]];
      continue;
    }
    double v = t.scale;
    for (int j = 0; j < d; ++j) v *= val[j * stride + t.factors[j]];
    values[n] = v;
    for (int i = 0; i < d; ++i) {
      double g = t.scale * der[i * stride + t.factors[i]];
      for (int j = 0; j < d; ++j) {
        if (j != i) g *= val[j * stride + t.factors[j]];
      }
      gradients[n * d + i] = g;
    }
  }
}

Eigen::VectorXd TestBasis::integrate(const MarginalLaw& law) const {
  const int d = dimension();
  if (law.dimension() != d) throw InvalidArgument("TestBasis::integrate: law dimension mismatch");
  const int N = size();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(N);
  if (const auto* p = std::get_if<Density1D>(&law.parameters())) {
    // Direct quadrature of the functions: avoids expanding high-degree Legendre
    // polynomials into monomials.
    const auto rule = composite_gauss_legendre(64, 16, p->lower, p->upper);
    std::vector<double> vals(N);
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      const double x = rule.nodes[q];
      evaluate(std::span<const double>(&x, 1), vals);
      const double w = rule.weights[q] * mcot::density(law, x);
      for (int n = 0; n < N; ++n) out(n) += w * vals[n];
    }
    return out;
  }
  int D = 0;
  std::vector<double> center(d), scale(d);
  for (int j = 0; j < d; ++j) {
    D = std::max(D, families_[j].max_degree());
    center[j] = families_[j].center();
    scale[j] = families_[j].scale();
  }
  MonomialMomentTable table(law, D, center, scale);
  std::vector<std::vector<Eigen::VectorXd>> coeffs(d);
  for (int j = 0; j < d; ++j) {
    for (int l = 0; l < families_[j].size(); ++l) coeffs[j].push_back(families_[j].monomial_coefficients(l));
  }
  for (int n = 0; n < N; ++n) {
    const auto& t = terms_[n];
    // Sum over the tensor product of the factor coefficient vectors.
    MultiIndex alpha(d, 0);
    double total = 0.0;
    std::vector<int> deg(d);
    for (int j = 0; j < d; ++j) deg[j] = static_cast<int>(coeffs[j][t.factors[j]].size()) - 1;
    while (true) {
      double c = 1.0;
      for (int j = 0; j < d && c != 0.0; ++j) c *= coeffs[j][t.factors[j]](alpha[j]);
      if (c != 0.0) total += c * table(alpha);
      int j = d - 1;
      while (j >= 0 && alpha[j] == deg[j]) alpha[j--] = 0;
      if (j < 0) break;
      ++alpha[j];
    }
    out(n) = t.scale * total;
  }
  return out;
}

TestBasis legendre_basis(const MarginalLaw& law, int N) {
  if (N < 1) throw InvalidArgument("legendre_basis: N must be >= 1");
  if (law.dimension() != 1) throw InvalidArgument("legendre_basis: law must be one-dimensional");
  std::vector<PolynomialFamily1D> families{PolynomialFamily1D::legendre(N)};
  std::vector<TensorTerm> terms;
  for (int n = 1; n <= N; ++n) terms.push_back({{n}, std::sqrt(2.0 * n + 0.5) / (n + 1.0)});
  TestBasis probe(BasisKind::Legendre1D, families, terms, Eigen::VectorXd::Zero(N));
  return TestBasis(BasisKind::Legendre1D, std::move(families), std::move(terms), probe.integrate(law));
}

namespace {

// Quadrature for the coordinate marginal of `law`, exact (or accurate to rounding) for
// polynomials of degree <= 2 * 12 + 2: Gauss-Hermite per mixture component, Gauss-Legendre
// in the polar angle for the ball, composite Gauss-Legendre for 1D densities.
QuadratureRule marginal_quadrature(const MarginalLaw& law, int coordinate) {
  QuadratureRule rule;
  if (const auto* mix = std::get_if<GaussianMixture>(&law.parameters())) {
    const QuadratureRule gh = gauss_hermite_probabilists(40);
    for (const auto& c : mix->components) {
      const double sd = std::sqrt(c.covariance(coordinate, coordinate));
      for (std::size_t q = 0; q < gh.nodes.size(); ++q) {
        rule.nodes.push_back(c.mean(coordinate) + sd * gh.nodes[q]);
        rule.weights.push_back(c.weight * gh.weights[q]);
      }
    }
  } else if (const auto* ball = std::get_if<UniformBall>(&law.parameters())) {
    // x = center + r cos(theta); the marginal density is proportional to sin^d(theta).
    const int d = law.dimension();
    rule = gauss_legendre(80, 0.0, std::numbers::pi);
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      rule.weights[q] *= std::pow(std::sin(rule.nodes[q]), d);
      rule.nodes[q] = ball->center(coordinate) + ball->radius * std::cos(rule.nodes[q]);
    }
  } else {
    const auto& dens = std::get<Density1D>(law.parameters());
    rule = composite_gauss_legendre(32, 64, dens.lower, dens.upper);
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) rule.weights[q] *= density(law, rule.nodes[q]);
  }
  double total = 0.0;
  for (double w : rule.weights) total += w;
  for (double& w : rule.weights) w /= total;
  return rule;
}

}  // namespace

PolynomialFamily1D orthonormal_marginal_polynomials(const MarginalLaw& law, int coordinate, int max_degree,
                                                    Normalization normalization) {
  const int d = law.dimension();
  if (coordinate < 0 || coordinate >= d) throw InvalidArgument("orthonormal_marginal_polynomials: bad coordinate");
  if (max_degree < 0 || max_degree > 12) {
    throw InvalidArgument("orthonormal_marginal_polynomials: max_degree must be in [0, 12]");
  }
  const double center = law.mean()(coordinate);
  const double scale = std::sqrt(law.covariance()(coordinate, coordinate));
  const int L = max_degree;
  // Discretized Stieltjes procedure in t = (x - center) / scale. The quadrature reproduces
  // the marginal's moments, so the recurrence is the one of the exact inner product, and
  // evaluating through it avoids the cancellation of monomial coefficient sums.
  const QuadratureRule rule = marginal_quadrature(law, coordinate);
  const auto Q = static_cast<Eigen::Index>(rule.nodes.size());
  Eigen::VectorXd t(Q), w(Q);
  for (Eigen::Index q = 0; q < Q; ++q) {
    t(q) = (rule.nodes[q] - center) / scale;
    w(q) = rule.weights[q];
  }
  Eigen::VectorXd a(L), b = Eigen::VectorXd::Zero(L + 1);
  Eigen::VectorXd qm = Eigen::VectorXd::Zero(Q), qc = Eigen::VectorXd::Ones(Q);
  for (int l = 0; l < L; ++l) {
    a(l) = w.dot(t.cwiseProduct(qc.cwiseProduct(qc)));
    Eigen::VectorXd v = (t.array() - a(l)).matrix().cwiseProduct(qc) - (l > 0 ? b(l) : 0.0) * qm;
    // Second Gram-Schmidt pass against the two previous members.
    v -= w.dot(v.cwiseProduct(qc)) * qc;
    if (l > 0) v -= w.dot(v.cwiseProduct(qm)) * qm;
    const double norm2 = w.dot(v.cwiseProduct(v));
    if (!(norm2 > 1e-13)) {
      throw NumericalError("orthonormal_marginal_polynomials: moment matrix is numerically singular at degree " +
                           std::to_string(l + 1));
    }
    b(l + 1) = std::sqrt(norm2);
    qm = std::move(qc);
    qc = v / b(l + 1);
  }
  Eigen::VectorXd member_scale = Eigen::VectorXd::Ones(L + 1);
  if (normalization == Normalization::DegreeWeighted) {
    for (int l = 0; l <= L; ++l) member_scale(l) = 1.0 / (l + 1.0);
  }
  return PolynomialFamily1D::recurrence(center, scale, std::move(a), std::move(b), std::move(member_scale));
}

std::vector<std::array<int, 3>> hyperbolic_cross_indices(int threshold) {
  std::vector<std::array<int, 3>> out;
  for (int a = 0; a < threshold; ++a) {
    for (int b = 0; b < threshold; ++b) {
      for (int c = 0; c < threshold; ++c) {
        if ((a + 1) * (b + 1) * (c + 1) <= threshold && (a | b | c) != 0) out.push_back({a, b, c});
      }
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& x, const auto& y) {
    const int px = (x[0] + 1) * (x[1] + 1) * (x[2] + 1);
    const int py = (y[0] + 1) * (y[1] + 1) * (y[2] + 1);
    if (px != py) return px < py;
    return x < y;
  });
  return out;
}

int hyperbolic_cross_size(int threshold) { return static_cast<int>(hyperbolic_cross_indices(threshold).size()); }

int hyperbolic_cross_threshold(int N) {
  for (int L = 2; L <= 64; ++L) {
    const int n = hyperbolic_cross_size(L);
    if (n == N) return L;
    if (n > N) break;
  }
  throw InvalidArgument("hyperbolic_cross_basis: N = " + std::to_string(N) +
                        " is not realizable by any hyperbolic cross threshold");
}

TestBasis hyperbolic_cross_basis(const MarginalLaw& law, int N, Normalization normalization) {
  if (law.dimension() != 3) throw InvalidArgument("hyperbolic_cross_basis: law must be three-dimensional");
  const int L = hyperbolic_cross_threshold(N);
  std::vector<PolynomialFamily1D> families;
  for (int j = 0; j < 3; ++j) families.push_back(orthonormal_marginal_polynomials(law, j, L - 1, normalization));
  std::vector<TensorTerm> terms;
  for (const auto& idx : hyperbolic_cross_indices(L)) terms.push_back({{idx[0], idx[1], idx[2]}, 1.0});
  TestBasis probe(BasisKind::HyperbolicCross3D, families, terms, Eigen::VectorXd::Zero(N));
  return TestBasis(BasisKind::HyperbolicCross3D, std::move(families), std::move(terms), probe.integrate(law));
}

TestBasis mean_covariance_basis(const MarginalLaw& law) {
  if (law.dimension() != 3) throw InvalidArgument("mean_covariance_basis: law must be three-dimensional");
  const Eigen::MatrixXd powers = Eigen::MatrixXd::Identity(3, 3);  // 1, t, t^2
  std::vector<PolynomialFamily1D> families(3, PolynomialFamily1D::monomial(0.0, 1.0, powers));
  std::vector<TensorTerm> terms = {
      {{1, 0, 0}, 1.0}, {{0, 1, 0}, 1.0}, {{0, 0, 1}, 1.0}, {{2, 0, 0}, 1.0}, {{0, 2, 0}, 1.0},
      {{0, 0, 2}, 1.0}, {{1, 1, 0}, 1.0}, {{1, 0, 1}, 1.0}, {{0, 1, 1}, 1.0},
  };
  TestBasis probe(BasisKind::MeanCovariance3D, families, terms, Eigen::VectorXd::Zero(9));
  return TestBasis(BasisKind::MeanCovariance3D, std::move(families), std::move(terms), probe.integrate(law));
}

}  // namespace mcot
