#include "mcot/measures.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "mcot/error.hpp"
#include "mcot/quadrature.hpp"

namespace mcot {
namespace {

constexpr double kPi = std::numbers::pi;

// Unnormalized antiderivative of the density, zero at the lower end of the support.
double raw_cdf(const Density1D& p, double x) {
  const double xc = std::clamp(x, p.lower, p.upper);
  double value = p.c0 * (xc - p.lower);
  if (p.frequency == 0.0) {
    value += p.amplitude * (xc - p.lower);
  } else {
    value += p.amplitude / p.frequency * (std::sin(p.frequency * xc) - std::sin(p.frequency * p.lower));
  }
  return value;
}

double raw_density(const Density1D& p, double x) {
  if (x < p.lower || x > p.upper) return 0.0;
  return p.c0 + p.amplitude * std::cos(p.frequency * x);
}

const QuadratureRule& density_rule(const Density1D& p) {
  // 16 panels of 64 nodes: exact for polynomial degree <= 127 per panel, and
  // resolves the cosine factor far below 1e-13 for the frequencies in use.
  thread_local Density1D cached{};
  thread_local QuadratureRule rule;
  thread_local bool init = false;
  if (!init || cached.lower != p.lower || cached.upper != p.upper) {
    rule = composite_gauss_legendre(64, 16, p.lower, p.upper);
    cached = p;
    init = true;
  }
  return rule;
}

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

void check_finite_span(std::span<const double> v, int d, const char* what) {
  if (static_cast<int>(v.size()) != d) throw InvalidArgument(std::string(what) + ": dimension mismatch");
  for (double x : v) {
    if (!std::isfinite(x)) throw InvalidArgument(std::string(what) + ": non-finite value");
  }
}

// Box-indexed table helper: values over [0, D]^d in lexicographic order
// (last coordinate fastest).
struct Box {
  int d;
  int D;
  std::size_t size() const {
    std::size_t s = 1;
    for (int i = 0; i < d; ++i) s *= static_cast<std::size_t>(D + 1);
    return s;
  }
  std::size_t index(const MultiIndex& a) const {
    std::size_t idx = 0;
    for (int i = 0; i < d; ++i) idx = idx * (D + 1) + a[i];
    return idx;
  }
  MultiIndex unflatten(std::size_t idx) const {
    MultiIndex a(d);
    for (int i = d - 1; i >= 0; --i) {
      a[i] = static_cast<int>(idx % (D + 1));
      idx /= (D + 1);
    }
    return a;
  }
};

// Moments of N(mean, cov) over the box by the recurrence
// E[x^(b + e_i)] = m_i E[x^b] + sum_j C_ij b_j E[x^(b - e_j)].
std::vector<double> gaussian_table(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov, int D) {
  const int d = static_cast<int>(mean.size());
  Box box{d, D};
  std::vector<double> t(box.size(), 0.0);
  t[0] = 1.0;
  for (std::size_t idx = 1; idx < t.size(); ++idx) {
    MultiIndex a = box.unflatten(idx);
    int i = 0;
    while (a[i] == 0) ++i;
    MultiIndex b = a;
    b[i] -= 1;
    double v = mean(i) * t[box.index(b)];
    for (int j = 0; j < d; ++j) {
      if (b[j] == 0 || cov(i, j) == 0.0) continue;
      MultiIndex c = b;
      c[j] -= 1;
      v += cov(i, j) * b[j] * t[box.index(c)];
    }
    t[idx] = v;
  }
  return t;
}

// E[z^b] for z uniform on the unit ball of R^d.
double unit_ball_moment(const MultiIndex& b) {
  const int d = static_cast<int>(b.size());
  int total = 0;
  for (int v : b) {
    if (v % 2 != 0) return 0.0;
    total += v;
  }
  double log_value = std::lgamma(0.5 * d + 1.0) - 0.5 * d * std::log(kPi) + std::log(2.0) -
                     std::lgamma(0.5 * (total + d)) - std::log(static_cast<double>(total + d));
  for (int v : b) log_value += std::lgamma(0.5 * (v + 1));
  return std::exp(log_value);
}

// Given a table of E[z^b], returns E[prod (a_i + s_i z_i)^alpha_i] over the same box,
// applying the binomial expansion one coordinate at a time.
std::vector<double> affine_transform_table(std::vector<double> t, const Box& box,
                                           std::span<const double> shift,
                                           std::span<const double> scale) {
  for (int i = 0; i < box.d; ++i) {
    std::vector<double> out(t.size(), 0.0);
    for (std::size_t idx = 0; idx < t.size(); ++idx) {
      MultiIndex a = box.unflatten(idx);
      const int ai = a[i];
      double acc = 0.0;
      for (int b = 0; b <= ai; ++b) {
        MultiIndex c = a;
        c[i] = b;
        acc += binomial(ai, b) * std::pow(shift[i], ai - b) * std::pow(scale[i], b) * t[box.index(c)];
      }
      out[idx] = acc;
    }
    t = std::move(out);
  }
  return t;
}

std::vector<double> standardized_table(const MarginalLaw& law, int D, std::span<const double> center,
                                       std::span<const double> scale) {
  const int d = law.dimension();
  Box box{d, D};
  return std::visit(
      [&](const auto& p) -> std::vector<double> {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, Density1D>) {
          const auto& rule = density_rule(p);
          const double norm = raw_cdf(p, p.upper);
          std::vector<double> t(D + 1, 0.0);
          for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
            const double tq = (rule.nodes[q] - center[0]) / scale[0];
            const double w = rule.weights[q] * raw_density(p, rule.nodes[q]) / norm;
            double pw = 1.0;
            for (int k = 0; k <= D; ++k) {
              t[k] += w * pw;
              pw *= tq;
            }
          }
          return t;
        } else if constexpr (std::is_same_v<T, GaussianMixture>) {
          std::vector<double> t(box.size(), 0.0);
          Eigen::VectorXd c = Eigen::Map<const Eigen::VectorXd>(center.data(), d);
          Eigen::VectorXd s_inv = Eigen::Map<const Eigen::VectorXd>(scale.data(), d).cwiseInverse();
          for (const auto& comp : p.components) {
            Eigen::VectorXd m = (comp.mean - c).cwiseProduct(s_inv);
            Eigen::MatrixXd C = s_inv.asDiagonal() * comp.covariance * s_inv.asDiagonal();
            const auto ct = gaussian_table(m, C, D);
            for (std::size_t i = 0; i < t.size(); ++i) t[i] += comp.weight * ct[i];
          }
          return t;
        } else {
          std::vector<double> z(box.size());
          for (std::size_t idx = 0; idx < z.size(); ++idx) z[idx] = unit_ball_moment(box.unflatten(idx));
          std::vector<double> shift(d), sc(d);
          for (int i = 0; i < d; ++i) {
            shift[i] = (p.center(i) - center[i]) / scale[i];
            sc[i] = p.radius / scale[i];
          }
          return affine_transform_table(std::move(z), box, shift, sc);
        }
      },
      law.parameters());
}

void validate(const Density1D& p) {
  if (!(p.upper > p.lower) || !std::isfinite(p.lower) || !std::isfinite(p.upper)) {
    throw InvalidArgument("Density1D: support must be a finite interval with lower < upper");
  }
  for (int i = 0; i <= 10000; ++i) {
    const double x = p.lower + (p.upper - p.lower) * i / 10000.0;
    if (raw_density(p, x) < 0.0) throw InvalidArgument("Density1D: density is negative on its support");
  }
  const auto& rule = density_rule(p);
  double mass = 0.0;
  for (std::size_t q = 0; q < rule.nodes.size(); ++q) mass += rule.weights[q] * raw_density(p, rule.nodes[q]);
  if (std::abs(mass - 1.0) > 1e-10) {
    throw InvalidArgument("Density1D: density integrates to " + std::to_string(mass) + ", expected 1");
  }
}

void validate(const GaussianMixture& p, int& dim) {
  if (p.components.empty()) throw InvalidArgument("GaussianMixture: no components");
  dim = static_cast<int>(p.components.front().mean.size());
  if (dim < 1) throw InvalidArgument("GaussianMixture: dimension must be >= 1");
  double total = 0.0;
  for (const auto& c : p.components) {
    if (c.mean.size() != dim || c.covariance.rows() != dim || c.covariance.cols() != dim) {
      throw InvalidArgument("GaussianMixture: inconsistent component dimensions");
    }
    if (!(c.weight >= 0.0)) throw InvalidArgument("GaussianMixture: negative weight");
    total += c.weight;
    const double asym = (c.covariance - c.covariance.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-12 * std::max(1.0, c.covariance.cwiseAbs().maxCoeff())) {
      throw InvalidArgument("GaussianMixture: covariance is not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(c.covariance);
    if (eig.eigenvalues().minCoeff() <= 0.0) {
      throw InvalidArgument("GaussianMixture: covariance is not positive definite");
    }
  }
  if (std::abs(total - 1.0) > 1e-12) throw InvalidArgument("GaussianMixture: weights do not sum to 1");
}

}  // namespace

MarginalLaw::MarginalLaw(Density1D density) : params_(density), dimension_(1) { validate(density); }

MarginalLaw::MarginalLaw(GaussianMixture mixture) {
  validate(mixture, dimension_);
  params_ = std::move(mixture);
}

MarginalLaw::MarginalLaw(UniformBall ball) {
  if (ball.center.size() < 1) throw InvalidArgument("UniformBall: empty center");
  if (!(ball.radius > 0.0) || !std::isfinite(ball.radius)) throw InvalidArgument("UniformBall: radius must be > 0");
  dimension_ = static_cast<int>(ball.center.size());
  params_ = std::move(ball);
}

std::string MarginalLaw::kind_name() const {
  switch (params_.index()) {
    case 0: return "density1d";
    case 1: return "gaussian_mixture";
    default: return "uniform_ball";
  }
}

Eigen::VectorXd MarginalLaw::mean() const {
  Eigen::VectorXd m = Eigen::VectorXd::Zero(dimension_);
  for (int i = 0; i < dimension_; ++i) {
    MultiIndex a(dimension_, 0);
    a[i] = 1;
    m(i) = monomial_moment(*this, a);
  }
  return m;
}

Eigen::MatrixXd MarginalLaw::covariance() const {
  Eigen::VectorXd m = mean();
  Eigen::MatrixXd c(dimension_, dimension_);
  for (int i = 0; i < dimension_; ++i) {
    for (int j = 0; j < dimension_; ++j) {
      MultiIndex a(dimension_, 0);
      a[i] += 1;
      a[j] += 1;
      c(i, j) = monomial_moment(*this, a) - m(i) * m(j);
    }
  }
  return c;
}

MarginalLaw preset_law(const std::string& name) {
  if (name == "mu1_1d") return MarginalLaw(Density1D{0.5, 0.0, 0.0, -1.0, 1.0});
  if (name == "mu2_1d") return MarginalLaw(Density1D{0.46, kPi / 10.0, 2.5 * kPi, -1.0, 1.0});
  if (name == "mu3_1d") return MarginalLaw(Density1D{0.48, 0.13 * kPi, 6.5 * kPi, -1.0, 1.0});
  Eigen::Matrix3d c_a;
  c_a << 1.0, 0.5, 0.75, 0.5, 2.0, 1.5, 0.75, 1.5, 3.0;
  if (name == "mu1_3d") {
    return MarginalLaw(GaussianMixture{{{1.0, Eigen::Vector3d::Zero(), Eigen::Matrix3d::Identity()}}});
  }
  if (name == "mu2_3d") {
    Eigen::Matrix3d c_b;
    c_b << 1.0, 0.8, 0.22, 0.8, 2.0, 1.8, 0.22, 1.8, 3.0;
    return MarginalLaw(GaussianMixture{{{2.0 / 3.0, Eigen::Vector3d::Zero(), c_a},
                                        {1.0 / 3.0, Eigen::Vector3d(2.0, 2.0, 2.0), c_b}}});
  }
  if (name == "mu3_3d") {
    GaussianMixture mix;
    const double weights[6] = {0.1, 0.2, 0.2, 0.2, 0.2, 0.1};
    for (int i = 0; i < 6; ++i) mix.components.push_back({weights[i], Eigen::Vector3d(4.0 * i, 0.0, 0.0), c_a});
    return MarginalLaw(std::move(mix));
  }
  if (name == "mu4_3d") return MarginalLaw(UniformBall{Eigen::Vector3d::Zero(), 1.0});
  throw InvalidArgument("unknown preset law '" + name + "'");
}

std::vector<std::string> preset_law_names() {
  return {"mu1_1d", "mu2_1d", "mu3_1d", "mu1_3d", "mu2_3d", "mu3_3d", "mu4_3d"};
}

double monomial_moment(const MarginalLaw& law, const MultiIndex& alpha) {
  const std::vector<double> zero(law.dimension(), 0.0), one(law.dimension(), 1.0);
  return standardized_monomial_moment(law, alpha, zero, one);
}

double standardized_monomial_moment(const MarginalLaw& law, const MultiIndex& alpha,
                                    std::span<const double> center, std::span<const double> scale) {
  if (static_cast<int>(alpha.size()) != law.dimension()) {
    throw InvalidArgument("monomial_moment: multi-index dimension does not match the law");
  }
  int D = 0;
  for (int a : alpha) {
    if (a < 0) throw InvalidArgument("monomial_moment: negative exponent");
    D = std::max(D, a);
  }
  MonomialMomentTable table(law, D, center, scale);
  return table(alpha);
}

MonomialMomentTable::MonomialMomentTable(const MarginalLaw& law, int max_degree,
                                         std::span<const double> center, std::span<const double> scale)
    : dimension_(law.dimension()), max_degree_(max_degree) {
  if (max_degree < 0) throw InvalidArgument("MonomialMomentTable: negative degree");
  check_finite_span(center, dimension_, "MonomialMomentTable center");
  check_finite_span(scale, dimension_, "MonomialMomentTable scale");
  for (double s : scale) {
    if (!(s > 0.0)) throw InvalidArgument("MonomialMomentTable: scale must be > 0");
  }
  values_ = standardized_table(law, max_degree, center, scale);
}

MonomialMomentTable::MonomialMomentTable(const MarginalLaw& law, int max_degree)
    : MonomialMomentTable(law, max_degree, std::vector<double>(law.dimension(), 0.0),
                          std::vector<double>(law.dimension(), 1.0)) {}

std::size_t MonomialMomentTable::flat_index(const MultiIndex& alpha) const {
  if (static_cast<int>(alpha.size()) != dimension_) {
    throw InvalidArgument("MonomialMomentTable: multi-index dimension mismatch");
  }
  for (int a : alpha) {
    if (a < 0 || a > max_degree_) throw InvalidArgument("MonomialMomentTable: exponent out of range");
  }
  return Box{dimension_, max_degree_}.index(alpha);
}

double MonomialMomentTable::operator()(const MultiIndex& alpha) const { return values_[flat_index(alpha)]; }

double density(const MarginalLaw& law, double x) {
  const auto* p = std::get_if<Density1D>(&law.parameters());
  if (!p) throw InvalidArgument("density: law is not a 1D density");
  return raw_density(*p, x) / raw_cdf(*p, p->upper);
}

double cdf(const MarginalLaw& law, double x) {
  const auto* p = std::get_if<Density1D>(&law.parameters());
  if (!p) throw InvalidArgument("cdf: law is not a 1D density");
  if (x <= p->lower) return 0.0;
  if (x >= p->upper) return 1.0;
  return raw_cdf(*p, x) / raw_cdf(*p, p->upper);
}

double quantile(const MarginalLaw& law, double p) {
  const auto* params = std::get_if<Density1D>(&law.parameters());
  if (!params) throw InvalidArgument("quantile: law is not a 1D density");
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("quantile: probability outside [0, 1]");
  double lo = params->lower, hi = params->upper;
  if (p == 0.0) return lo;
  // Invariant: F(lo) < p <= F(hi); keeps the leftmost root.
  while (hi - lo > 1e-8) {
    const double mid = 0.5 * (lo + hi);
    if (cdf(law, mid) < p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  double x = hi;
  for (int iter = 0; iter < 30; ++iter) {
    const double r = cdf(law, x) - p;
    if (std::abs(r) <= 1e-15) break;
    const double rho = density(law, x);
    if (!(rho > 0.0)) break;
    const double next = std::clamp(x - r / rho, lo, hi);
    if (next == x) break;
    x = next;
  }
  return x;
}

Eigen::MatrixXd sample(const MarginalLaw& law, int count, std::uint64_t seed) {
  if (count < 1) throw InvalidArgument("sample: count must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  const int d = law.dimension();
  Eigen::MatrixXd out(count, d);
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, Density1D>) {
          for (int s = 0; s < count; ++s) out(s, 0) = quantile(law, unif(rng));
        } else if constexpr (std::is_same_v<T, GaussianMixture>) {
          std::vector<Eigen::MatrixXd> factors;
          for (const auto& c : p.components) factors.push_back(c.covariance.llt().matrixL());
          for (int s = 0; s < count; ++s) {
            const double u = unif(rng);
            std::size_t k = 0;
            double acc = p.components[0].weight;
            while (u >= acc && k + 1 < p.components.size()) acc += p.components[++k].weight;
            Eigen::VectorXd z(d);
            for (int i = 0; i < d; ++i) z(i) = normal(rng);
            out.row(s) = (p.components[k].mean + factors[k] * z).transpose();
          }
        } else {
          for (int s = 0; s < count; ++s) {
            Eigen::VectorXd z(d);
            double norm = 0.0;
            do {
              for (int i = 0; i < d; ++i) z(i) = normal(rng);
              norm = z.norm();
            } while (norm == 0.0);
            const double r = p.radius * std::pow(unif(rng), 1.0 / d);
            out.row(s) = (p.center + z * (r / norm)).transpose();
          }
        }
      },
      law.parameters());
  return out;
}

}  // namespace mcot
