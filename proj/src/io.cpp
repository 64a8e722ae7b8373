#include "mcot/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "mcot/error.hpp"

namespace mcot {
namespace {

std::ofstream open_out(const std::filesystem::path& file) {
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  std::ofstream out(file, std::ios::binary);
  if (!out) throw ConfigError("cannot open " + file.string() + " for writing");
  return out;
}

double norm(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_runlog_csv(const std::filesystem::path& file, const RunLog& log) {
  auto out = open_out(file);
  out << "# schema: runlog/1\n";
  out << "n,cost,gamma_inf,theta,dt,beta,tau,newton_iterations,retries,accepted,theta_violation\n";
  for (const auto& r : log.records) {
    out << r.n << ',' << format_double(r.cost) << ',' << format_double(r.gamma_inf) << ',' << format_double(r.theta)
        << ',' << format_double(r.dt) << ',' << format_double(r.beta) << ',' << format_double(r.tau) << ','
        << r.newton_iterations << ',' << r.retries << ',' << (r.accepted ? 1 : 0) << ','
        << (r.theta_violation ? 1 : 0) << '\n';
  }
}

void write_state_csv(const std::filesystem::path& file, const ParticleSystem& sys, const StateMeta& meta) {
  const Shape s = sys.shape();
  {
    auto out = open_out(file);
    out << "# schema: state/1\n";
    out << "k,m,coordinate,value,weight\n";
    for (int k = 0; k < s.K; ++k) {
      const std::string w = format_double(sys.weight(k));
      for (int m = 0; m < s.M; ++m) {
        const auto x = sys.point(k, m);
        for (int i = 0; i < s.d; ++i) out << k << ',' << m << ',' << i << ',' << format_double(x[i]) << ',' << w << '\n';
      }
    }
  }
  nlohmann::ordered_json j;
  j["schema"] = "state/1";
  j["K"] = s.K;
  j["M"] = s.M;
  j["d"] = s.d;
  j["mode"] = meta.mode;
  if (sys.adaptive()) {
    j["weight_function"] = sys.weight_function()->name();
    std::vector<double> a(s.K);
    for (int k = 0; k < s.K; ++k) a[k] = sys.weight_param(k);
    j["weight_params"] = a;
  }
  j["seed"] = meta.seed;
  j["iteration"] = meta.iteration;
  auto side = open_out(file.string() + ".json");
  side << j.dump(2) << '\n';
}

PathState read_state_csv(const std::filesystem::path& file, StateMeta* meta) {
  std::ifstream side(file.string() + ".json");
  if (!side) throw ConfigError("missing state sidecar " + file.string() + ".json");
  nlohmann::json j;
  try {
    side >> j;
  } catch (const std::exception& e) {
    throw ConfigError(file.string() + ".json: " + e.what());
  }
  StateMeta m;
  m.shape = Shape{j.at("K").get<int>(), j.at("M").get<int>(), j.at("d").get<int>()};
  m.mode = j.value("mode", "fixed");
  m.seed = j.value("seed", std::uint64_t{0});
  m.iteration = j.value("iteration", 0);
  if (j.contains("weight_function")) m.weight_function = j["weight_function"].get<std::string>();

  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open " + file.string());
  PathState st{Eigen::VectorXd::Zero(m.shape.K), Eigen::VectorXd::Zero(m.shape.position_count())};
  std::vector<char> seen(m.shape.position_count(), 0);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#' || line.rfind("k,", 0) == 0) continue;
    std::istringstream ls(line);
    int k, mm, i;
    double v, w;
    char c1, c2, c3, c4;
    if (!(ls >> k >> c1 >> mm >> c2 >> i >> c3 >> v >> c4 >> w) || k < 0 || k >= m.shape.K || mm < 0 ||
        mm >= m.shape.M || i < 0 || i >= m.shape.d) {
      throw ConfigError(file.string() + ":" + std::to_string(lineno) + ": malformed state row");
    }
    const int off = m.shape.point_offset(k, mm) + i;
    st.positions(off) = v;
    st.weights(k) = w;
    seen[off] = 1;
  }
  for (char s : seen)
    if (!s) throw ConfigError(file.string() + ": state is missing coordinates");
  if (meta) *meta = m;
  return st;
}

void write_snapshots_csv(const std::filesystem::path& file, const RunLog& log, const ParticleSystem& like) {
  auto out = open_out(file);
  out << "# schema: snapshots/1\n";
  out << "n,k,m,coordinate,value,weight\n";
  ParticleSystem sys = like;
  const Shape s = sys.shape();
  for (const auto& snap : log.snapshots) {
    sys.set_coordinates(snap.state);
    for (int k = 0; k < s.K; ++k) {
      const std::string w = format_double(sys.weight(k));
      for (int m = 0; m < s.M; ++m)
        for (int i = 0; i < s.d; ++i)
          out << snap.n << ',' << k << ',' << m << ',' << i << ',' << format_double(sys.point(k, m)[i]) << ',' << w
              << '\n';
    }
  }
}

void write_pair_coupling_csv(const std::filesystem::path& file, const ParticleSystem& sys) {
  const Shape s = sys.shape();
  auto out = open_out(file);
  out << "# schema: pair_coupling/1\n";
  out << "k,m";
  for (int i = 0; i < s.d; ++i) out << ",x" << i;
  for (int i = 0; i < s.d; ++i) out << ",y" << i;
  out << ",weight\n";
  for (int k = 0; k < s.K; ++k) {
    const auto x = sys.point(k, 0);
    for (int m = 1; m < s.M; ++m) {
      const auto y = sys.point(k, m);
      out << k << ',' << m;
      for (int i = 0; i < s.d; ++i) out << ',' << format_double(x[i]);
      for (int i = 0; i < s.d; ++i) out << ',' << format_double(y[i]);
      out << ',' << format_double(sys.weight(k)) << '\n';
    }
  }
}

void write_radial_coupling_csv(const std::filesystem::path& file, const ParticleSystem& sys) {
  const Shape s = sys.shape();
  auto out = open_out(file);
  out << "# schema: radial_coupling/1\n";
  out << "k,m,r0,rm,weight\n";
  for (int k = 0; k < s.K; ++k) {
    const double r0 = norm(sys.point(k, 0));
    for (int m = 1; m < s.M; ++m)
      out << k << ',' << m << ',' << format_double(r0) << ',' << format_double(norm(sys.point(k, m))) << ','
          << format_double(sys.weight(k)) << '\n';
  }
}

void write_oracle_csv(const std::filesystem::path& file, const Eigen::MatrixXd& plan) {
  auto out = open_out(file);
  out << "# schema: oracle_map/1\n";
  out << "x";
  for (Eigen::Index i = 1; i < plan.cols(); ++i) out << ",T" << i;
  out << '\n';
  for (Eigen::Index r = 0; r < plan.rows(); ++r) {
    for (Eigen::Index c = 0; c < plan.cols(); ++c) out << (c ? "," : "") << format_double(plan(r, c));
    out << '\n';
  }
}

void write_basis_csv(const std::filesystem::path& file, const TestBasis& basis) {
  auto out = open_out(file);
  out << "# schema: basis/1\n";
  out << "n,label,scale,target\n";
  for (int n = 0; n < basis.size(); ++n)
    out << n + 1 << ",\"" << basis.label(n) << "\"," << format_double(basis.terms()[n].scale) << ','
        << format_double(basis.target_moments()(n)) << '\n';
  auto fam = open_out(file.string() + ".families.csv");
  fam << "# schema: basis_families/1\n";
  fam << "coordinate,member,power,coefficient,center,scale\n";
  for (std::size_t j = 0; j < basis.families().size(); ++j) {
    const auto& f = basis.families()[j];
    for (int l = 0; l < f.size(); ++l) {
      const Eigen::VectorXd c = f.monomial_coefficients(l);
      for (Eigen::Index p = 0; p < c.size(); ++p)
        fam << j << ',' << l << ',' << p << ',' << format_double(c(p)) << ',' << format_double(f.center()) << ','
            << format_double(f.scale()) << '\n';
    }
  }
}

void write_path_csv(const std::filesystem::path& file, const PathCheck& check) {
  auto out = open_out(file);
  out << "# schema: path/1\n";
  out << "t,cost,gamma_inf\n";
  for (std::size_t j = 0; j < check.t.size(); ++j)
    out << format_double(check.t[j]) << ',' << format_double(check.cost[j]) << ',' << format_double(check.residual[j])
        << '\n';
}

}  // namespace mcot
