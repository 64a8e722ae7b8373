#include "mcot/config.hpp"

#include <fstream>
#include <set>

#include "mcot/error.hpp"

namespace mcot {
namespace {

using nlohmann::json;

// Walks one JSON object, remembering which keys were consumed.
class Fields {
 public:
  Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  template <class T>
  T get(const std::string& key, T fallback) {
    used_.insert(key);
    if (!j_.contains(key)) return fallback;
    return as<T>(j_.at(key), key);
  }

  template <class T>
  T require(const std::string& key) {
    used_.insert(key);
    if (!j_.contains(key)) throw ConfigError(path_ + "." + key + ": missing required field");
    return as<T>(j_.at(key), key);
  }

  const json& raw(const std::string& key) {
    used_.insert(key);
    if (!j_.contains(key)) throw ConfigError(path_ + "." + key + ": missing required field");
    return j_.at(key);
  }

  std::string sub(const std::string& key) const { return path_ + "." + key; }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!used_.count(it.key())) throw ConfigError(path_ + "." + it.key() + ": unknown field");
  }

 private:
  template <class T>
  T as(const json& v, const std::string& key) const {
    try {
      if constexpr (std::is_same_v<T, double>) {
        if (!v.is_number()) throw ConfigError("");
      } else if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) throw ConfigError("");
      } else if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer()) throw ConfigError("");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) throw ConfigError("");
      }
      return v.get<T>();
    } catch (const std::exception&) {
      throw ConfigError(path_ + "." + key + ": wrong type (got " + std::string(v.type_name()) + ")");
    }
  }

  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

Eigen::VectorXd vector_of(const json& v, const std::string& path) {
  if (!v.is_array()) throw ConfigError(path + ": expected an array of numbers");
  Eigen::VectorXd out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) throw ConfigError(path + "[" + std::to_string(i) + "]: expected a number");
    out(i) = v[i].get<double>();
  }
  return out;
}

Eigen::MatrixXd matrix_of(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) throw ConfigError(path + ": expected an array of rows");
  const std::size_t n = v.size();
  Eigen::MatrixXd out(n, n);
  for (std::size_t r = 0; r < n; ++r) {
    const Eigen::VectorXd row = vector_of(v[r], path + "[" + std::to_string(r) + "]");
    if (static_cast<std::size_t>(row.size()) != n) throw ConfigError(path + ": matrix must be square");
    out.row(r) = row.transpose();
  }
  return out;
}

template <class Fn>
auto wrap_domain(const std::string& path, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

}  // namespace

MarginalLaw parse_law(const json& j, const std::string& path) {
  if (j.is_string()) return wrap_domain(path, [&] { return preset_law(j.get<std::string>()); });
  Fields f(j, path);
  if (f.has("preset")) {
    const auto name = f.require<std::string>("preset");
    f.finish();
    return wrap_domain(path, [&] { return preset_law(name); });
  }
  const auto kind = f.require<std::string>("kind");
  if (kind == "density1d") {
    Density1D p;
    p.c0 = f.get("c0", p.c0);
    p.amplitude = f.get("amplitude", p.amplitude);
    p.frequency = f.get("frequency", p.frequency);
    p.lower = f.get("lower", p.lower);
    p.upper = f.get("upper", p.upper);
    f.finish();
    return wrap_domain(path, [&] { return MarginalLaw(p); });
  }
  if (kind == "gaussian_mixture") {
    const json& comps = f.raw("components");
    f.finish();
    if (!comps.is_array() || comps.empty()) throw ConfigError(path + ".components: expected a non-empty array");
    GaussianMixture mix;
    for (std::size_t i = 0; i < comps.size(); ++i) {
      const std::string cp = path + ".components[" + std::to_string(i) + "]";
      Fields c(comps[i], cp);
      GaussianComponent g;
      g.weight = c.require<double>("weight");
      g.mean = vector_of(c.raw("mean"), cp + ".mean");
      g.covariance = matrix_of(c.raw("covariance"), cp + ".covariance");
      c.finish();
      mix.components.push_back(std::move(g));
    }
    return wrap_domain(path, [&] { return MarginalLaw(mix); });
  }
  if (kind == "uniform_ball") {
    UniformBall b;
    b.center = vector_of(f.raw("center"), f.sub("center"));
    b.radius = f.get("radius", 1.0);
    f.finish();
    return wrap_domain(path, [&] { return MarginalLaw(b); });
  }
  throw ConfigError(path + ".kind: unknown law kind '" + kind + "'");
}

std::shared_ptr<const TestBasis> build_basis(const MarginalLaw& law, const BasisSpec& spec) {
  switch (spec.kind) {
    case BasisKind::Legendre1D: return std::make_shared<const TestBasis>(legendre_basis(law, spec.N));
    case BasisKind::HyperbolicCross3D:
      return std::make_shared<const TestBasis>(hyperbolic_cross_basis(law, spec.N, spec.normalization));
    case BasisKind::MeanCovariance3D: return std::make_shared<const TestBasis>(mean_covariance_basis(law));
  }
  throw InvalidArgument("build_basis: unknown kind");
}

ExperimentConfig parse_config(const json& j, const std::string& source) {
  ExperimentConfig c;
  Fields f(j, source);
  c.name = f.get<std::string>("name", c.name);
  c.law_spec = f.raw("law");
  c.law = std::make_shared<const MarginalLaw>(parse_law(c.law_spec, f.sub("law")));
  const int d = c.law->dimension();
  c.seed = f.get<std::uint64_t>("seed", 0);
  c.output_dir = f.get<std::string>("output_dir", "");

  {
    Fields b(f.raw("basis"), f.sub("basis"));
    const auto type = b.require<std::string>("type");
    if (type == "legendre") c.basis.kind = BasisKind::Legendre1D;
    else if (type == "hyperbolic") c.basis.kind = BasisKind::HyperbolicCross3D;
    else if (type == "meancov") c.basis.kind = BasisKind::MeanCovariance3D;
    else throw ConfigError(b.sub("type") + ": expected legendre | hyperbolic | meancov");
    c.basis.N = b.get("N", c.basis.kind == BasisKind::MeanCovariance3D ? 9 : c.basis.N);
    const auto norm = b.get<std::string>("normalization", "degree_weighted");
    if (norm == "degree_weighted") c.basis.normalization = Normalization::DegreeWeighted;
    else if (norm == "plain") c.basis.normalization = Normalization::Plain;
    else throw ConfigError(b.sub("normalization") + ": expected degree_weighted | plain");
    c.basis.dump = b.get("dump", false);
    b.finish();
    if (c.basis.kind == BasisKind::MeanCovariance3D && c.basis.N != 9)
      throw ConfigError(f.sub("basis") + ".N: the mean-covariance basis has N = 9");
    if ((c.basis.kind == BasisKind::Legendre1D) != (d == 1))
      throw ConfigError(f.sub("basis") + ".type: legendre needs a 1D law, the 3D bases a 3D law");
  }

  c.epsilon = d == 1 ? 0.1 : 1e-3;
  if (f.has("cost")) {
    Fields cf(f.raw("cost"), f.sub("cost"));
    c.epsilon = cf.get("epsilon", c.epsilon);
    cf.finish();
  }

  {
    Fields p(f.raw("particles"), f.sub("particles"));
    c.K = p.require<int>("K");
    c.M = p.require<int>("M");
    const auto mode = p.get<std::string>("mode", "fixed");
    if (mode == "adaptive") {
      const auto wf = p.get<std::string>("weight_function", "squared");
      if (wf == "squared") c.weight_function = WeightFunction(WeightFunction::Kind::Squared);
      else if (wf == "exponential") c.weight_function = WeightFunction(WeightFunction::Kind::Exponential);
      else throw ConfigError(p.sub("weight_function") + ": expected squared | exponential");
    } else if (mode != "fixed") {
      throw ConfigError(p.sub("mode") + ": expected fixed | adaptive");
    } else if (p.has("weight_function")) {
      throw ConfigError(p.sub("weight_function") + ": only allowed in adaptive mode");
    }
    p.finish();
    if (c.K < 1 || c.M < 1) throw ConfigError(f.sub("particles") + ": K and M must be >= 1");
  }

  c.langevin.dt0 = d == 1 ? 1e-3 : 1e-4;
  if (f.has("init")) {
    Fields in(f.raw("init"), f.sub("init"));
    const auto method = in.get<std::string>("method", "rk3");
    if (method == "rk3") c.init.method = InitMethod::RK3;
    else if (method == "nnls_then_rk3") c.init.method = InitMethod::NnlsThenRK3;
    else throw ConfigError(in.sub("method") + ": expected rk3 | nnls_then_rk3");
    c.init.K_inf = in.get("K_inf", c.init.K_inf);
    c.init.jitter = in.get("jitter", c.init.jitter);
    c.init.flow.tol = in.get("tol", c.init.flow.tol);
    c.init.flow.max_iters = in.get("max_iters", c.init.flow.max_iters);
    c.init.flow.h0 = in.get("h0", c.init.flow.h0);
    c.init.newton_polish = in.get("newton_polish", c.init.newton_polish);
    in.finish();
  }

  if (f.has("langevin")) {
    Fields l(f.raw("langevin"), f.sub("langevin"));
    auto& p = c.langevin;
    p.dt0 = l.get("dt0", p.dt0);
    if (l.has("dt_max")) p.dt_max = l.get("dt_max", p.dt_max);
    p.beta0 = l.get("beta0", p.beta0);
    p.tau0 = l.get("tau0", p.tau0);
    p.tau_max = l.get("tau_max", p.tau_max);
    p.i_const = l.get("i_const", p.i_const);
    p.i_max = l.get("i_max", p.i_max);
    p.n_max = l.get("n_max", p.n_max);
    const auto sched = l.get<std::string>("schedule", to_string(p.schedule));
    if (sched == "constant") p.schedule = NoiseSchedule::Constant;
    else if (sched == "sqrt_decay") p.schedule = NoiseSchedule::SqrtDecay;
    else throw ConfigError(l.sub("schedule") + ": expected constant | sqrt_decay");
    p.projection_tol = l.get("projection_tol", p.projection_tol);
    p.consistent_noise = l.get("consistent_noise", p.consistent_noise);
    if (l.has("theta_bound")) p.theta_bound = l.get("theta_bound", p.theta_bound);
    p.snapshot_every = l.get("snapshot_every", p.snapshot_every);
    l.finish();
  }
  c.oracle_grid = f.get("oracle_grid", c.oracle_grid);
  f.finish();

  const auto& p = c.langevin;
  if (!(p.dt0 > 0) || !(p.tau0 > 0) || !(p.beta0 >= 0) || p.i_max < 1 || p.i_const < 0 || p.n_max < 0 ||
      !(p.projection_tol > 0) || !(p.tau_max >= p.tau0) || !(p.dt_max >= p.dt0))
    throw ConfigError(f.sub("langevin") + ": parameters out of range");
  if (!(c.epsilon >= 0)) throw ConfigError(f.sub("cost") + ".epsilon: must be >= 0");
  if (c.oracle_grid < 2) throw ConfigError(f.sub("oracle_grid") + ": must be >= 2");
  c.langevin.seed = c.seed;
  return c;
}

json read_json_file(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open " + file.string());
  try {
    return json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError(file.string() + ": parse error at byte " + std::to_string(e.byte) + ": " + e.what());
  }
}

ExperimentConfig load_config(const std::filesystem::path& file) { return parse_config(read_json_file(file), file.filename().string()); }

nlohmann::ordered_json to_json(const ExperimentConfig& c) {
  nlohmann::ordered_json j;
  j["name"] = c.name;
  j["law"] = c.law_spec;
  j["basis"] = {{"type", to_string(c.basis.kind)},
                {"N", c.basis.N},
                {"normalization", c.basis.normalization == Normalization::Plain ? "plain" : "degree_weighted"},
                {"dump", c.basis.dump}};
  j["cost"] = {{"epsilon", c.epsilon}};
  nlohmann::ordered_json p = {{"K", c.K}, {"M", c.M}, {"mode", c.weight_function ? "adaptive" : "fixed"}};
  if (c.weight_function) p["weight_function"] = c.weight_function->name();
  j["particles"] = p;
  j["init"] = {{"method", to_string(c.init.method)}, {"K_inf", c.init.K_inf},     {"jitter", c.init.jitter},
               {"tol", c.init.flow.tol},             {"max_iters", c.init.flow.max_iters}, {"h0", c.init.flow.h0},
               {"newton_polish", c.init.newton_polish}};
  const auto& l = c.langevin;
  nlohmann::ordered_json lj = {{"dt0", l.dt0},
                               {"beta0", l.beta0},
                               {"tau0", l.tau0},
                               {"tau_max", l.tau_max},
                               {"i_const", l.i_const},
                               {"i_max", l.i_max},
                               {"n_max", l.n_max},
                               {"schedule", to_string(l.schedule)},
                               {"projection_tol", l.projection_tol},
                               {"consistent_noise", l.consistent_noise},
                               {"snapshot_every", l.snapshot_every}};
  if (std::isfinite(l.theta_bound)) lj["theta_bound"] = l.theta_bound;
  if (std::isfinite(l.dt_max)) lj["dt_max"] = l.dt_max;
  j["langevin"] = lj;
  j["seed"] = c.seed;
  j["output_dir"] = c.output_dir;
  j["oracle_grid"] = c.oracle_grid;
  return j;
}

SuiteConfig load_suite(const std::filesystem::path& file) {
  const json j = read_json_file(file);
  const std::string src = file.filename().string();
  Fields f(j, src);
  SuiteConfig s;
  s.name = f.get<std::string>("name", s.name);
  s.workers = f.get("workers", s.workers);
  s.output_root = f.get<std::string>("output_root", "");
  const json& runs = f.raw("runs");
  f.finish();
  if (s.workers < 1) throw ConfigError(src + ".workers: must be >= 1");
  if (!runs.is_array()) throw ConfigError(src + ".runs: expected an array");
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const std::string rp = src + ".runs[" + std::to_string(i) + "]";
    if (runs[i].is_string()) {
      const auto path = file.parent_path() / runs[i].get<std::string>();
      s.runs.push_back(load_config(path));
    } else {
      s.runs.push_back(parse_config(runs[i], rp));
    }
  }
  return s;
}

}  // namespace mcot
