#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "nlslab/evolution.hpp"
#include "nlslab/groundstate.hpp"
#include "nlslab/io.hpp"
#include "nlslab/virial.hpp"

namespace nlslab {

struct InitSpec {
  enum class Kind { soliton, gaussian, file } kind = Kind::soliton;
  double a = 1.0;       // soliton amplitude multiplier: a Q
  double lambda = 1.0;  // soliton scale
  double theta = 0.0;
  Vec3 x0{};
  double A = 1.0;  // gaussian A exp(-|x|^2 / (2 w^2))
  double w = 1.0;
  std::string path;
  std::string text;  // as written, for echo
};

/// Everything a run or pipeline needs, read from a `key = value` file.
struct RunConfig {
  GridKind kind = GridKind::periodic3d;
  std::size_t n = 128;
  double L = 16.0;  // r_max on radial grids
  EvolveConfig evolve;
  InitSpec init;
  Vec3 kick{};        // multiplies the data by e^{i kick . x}
  double noise = 0.0; // amplitude of a seeded smooth perturbation
  std::uint64_t seed = 1;

  bool galilean = false;
  std::vector<BoundMode> modes{BoundMode::finite_variance};
  double gamma = 0.05;
  double local_R = 12.0;
  BoundConstants constants;

  std::string q_file;
  double q_rmax = 20.0;
  std::size_t q_n = 16384;
  double q_tol = 1e-12;

  std::vector<std::pair<std::string, std::string>> echo;

  Grid grid() const { return kind == GridKind::periodic3d ? Grid::periodic(n, L) : Grid::radial(n, L); }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] inline void config_error(int line, const std::string& msg) {
  throw Error(ErrorCode::parse_error, "config line " + std::to_string(line) + ": " + msg);
}

inline double to_double(const std::string& v, int line, const std::string& key) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    config_error(line, "'" + key + "' expects a number, got '" + v + "'");
  }
}

inline std::size_t to_count(const std::string& v, int line, const std::string& key) {
  const double d = to_double(v, line, key);
  if (d < 0 || d != std::floor(d) || d > 4e9) config_error(line, "'" + key + "' expects a non-negative integer");
  return static_cast<std::size_t>(d);
}

inline bool to_bool(const std::string& v, int line, const std::string& key) {
  if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "off" || v == "no") return false;
  config_error(line, "'" + key + "' expects true/false, got '" + v + "'");
}

inline Vec3 to_vec3(const std::string& v, int line, const std::string& key) {
  std::string s = v;
  for (char& c : s)
    if (c == '(' || c == ')') c = ' ';
  std::istringstream in(s);
  Vec3 out{};
  for (std::size_t i = 0; i < 3; ++i) {
    std::string part;
    if (!std::getline(in, part, ',')) config_error(line, "'" + key + "' expects three comma-separated numbers");
    out[i] = to_double(trim(part), line, key);
  }
  return out;
}

inline InitSpec parse_init(const std::string& v, int line) {
  InitSpec spec;
  spec.text = v;
  std::istringstream in(v);
  std::string word;
  in >> word;
  if (word == "file") {
    spec.kind = InitSpec::Kind::file;
    std::getline(in, spec.path);
    spec.path = trim(spec.path);
    if (spec.path.empty()) config_error(line, "init = file needs a path");
    return spec;
  }
  std::map<std::string, double> params;
  std::string tok;
  while (in >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) config_error(line, "init parameter '" + tok + "' is not name=value");
    const std::string name = tok.substr(0, eq), val = tok.substr(eq + 1);
    if (name == "x0") {
      spec.x0 = to_vec3(val, line, "x0");
      continue;
    }
    params[name] = to_double(val, line, name);
  }
  auto take = [&](const char* name, double& dst) {
    if (auto it = params.find(name); it != params.end()) {
      dst = it->second;
      params.erase(it);
    }
  };
  if (word == "soliton") {
    spec.kind = InitSpec::Kind::soliton;
    take("a", spec.a);
    take("lambda", spec.lambda);
    take("theta", spec.theta);
  } else if (word == "gaussian") {
    spec.kind = InitSpec::Kind::gaussian;
    take("A", spec.A);
    take("w", spec.w);
    if (!(spec.w > 0.0)) config_error(line, "gaussian width must be positive");
  } else {
    config_error(line, "init must be 'soliton ...', 'gaussian ...' or 'file <path>'");
  }
  if (!params.empty()) config_error(line, "unknown init parameter '" + params.begin()->first + "'");
  return spec;
}

inline std::vector<BoundMode> parse_modes(const std::string& v, int line) {
  std::vector<BoundMode> out;
  std::istringstream in(v);
  std::string part;
  while (std::getline(in, part, ',')) {
    part = trim(part);
    if (part.empty()) continue;
    try {
      out.push_back(parse_bound_mode(part));
    } catch (const Error&) {
      config_error(line, "unknown bound mode '" + part + "'");
    }
  }
  return out;
}

}  // namespace detail

inline RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  std::set<std::string> seen;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string s = detail::trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos) detail::config_error(line, "expected 'key = value'");
    const std::string key = detail::trim(s.substr(0, eq));
    const std::string val = detail::trim(s.substr(eq + 1));
    if (key.empty()) detail::config_error(line, "empty key");
    if (val.empty()) detail::config_error(line, "empty value for '" + key + "'");
    if (!seen.insert(key).second) detail::config_error(line, "duplicate key '" + key + "'");
    cfg.echo.emplace_back(key, val);

    using namespace detail;
    if (key == "kind") {
      if (val == "periodic3d") cfg.kind = GridKind::periodic3d;
      else if (val == "radial1d") cfg.kind = GridKind::radial1d;
      else config_error(line, "kind must be periodic3d or radial1d");
    } else if (key == "n") cfg.n = to_count(val, line, key);
    else if (key == "L" || key == "r_max") cfg.L = to_double(val, line, key);
    else if (key == "dt0") cfg.evolve.dt0 = to_double(val, line, key);
    else if (key == "t_end") cfg.evolve.t_end = to_double(val, line, key);
    else if (key == "cfl_alpha") cfg.evolve.cfl_alpha = to_double(val, line, key);
    else if (key == "blowup_factor") cfg.evolve.blowup_factor = to_double(val, line, key);
    else if (key == "snapshot_every") cfg.evolve.snapshot_every = to_count(val, line, key);
    else if (key == "diag_every") cfg.evolve.diag_every = to_count(val, line, key);
    else if (key == "dealias") cfg.evolve.dealias = to_bool(val, line, key);
    else if (key == "adaptive") cfg.evolve.adaptive = to_bool(val, line, key);
    else if (key == "R") cfg.evolve.cutoff_R = to_double(val, line, key);
    else if (key == "init") cfg.init = parse_init(val, line);
    else if (key == "kick") cfg.kick = to_vec3(val, line, key);
    else if (key == "noise") cfg.noise = to_double(val, line, key);
    else if (key == "seed") cfg.seed = to_count(val, line, key);
    else if (key == "galilean") cfg.galilean = to_bool(val, line, key);
    else if (key == "modes") cfg.modes = parse_modes(val, line);
    else if (key == "gamma") cfg.gamma = to_double(val, line, key);
    else if (key == "local_R") cfg.local_R = to_double(val, line, key);
    else if (key == "gamma0") cfg.constants.gamma0 = to_double(val, line, key);
    else if (key == "c_R") cfg.constants.c_R = to_double(val, line, key);
    else if (key == "c2") cfg.constants.c2 = to_double(val, line, key);
    else if (key == "q_file") cfg.q_file = val;
    else if (key == "q_rmax") cfg.q_rmax = to_double(val, line, key);
    else if (key == "q_n") cfg.q_n = to_count(val, line, key);
    else if (key == "q_tol") cfg.q_tol = to_double(val, line, key);
    else config_error(line, "unknown key '" + key + "'");
  }
  try {
    (void)cfg.grid();
    cfg.evolve.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::parse_error, std::string("config: ") + e.what());
  }
  return cfg;
}

inline RunConfig read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_error, "cannot open config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

/// Ground state from `q_file` when given, otherwise solved with the q_* settings.
inline GroundState load_ground_state(const RunConfig& cfg) {
  if (!cfg.q_file.empty()) return io::read_profile(cfg.q_file);
  return solve_ground_state(cfg.q_rmax, cfg.q_n, cfg.q_tol);
}

/// Builds the initial field described by the config.
inline Field make_initial(const RunConfig& cfg, const GroundState& q) {
  Field f;
  const Grid grid = cfg.grid();
  switch (cfg.init.kind) {
    case InitSpec::Kind::soliton: {
      f = sample_soliton(q, grid, cfg.init.lambda, cfg.init.x0, cfg.init.theta, 1.0);
      for (auto& v : f.values) v *= cfg.init.a;
      break;
    }
    case InitSpec::Kind::gaussian: {
      const double A = cfg.init.A, w2 = cfg.init.w * cfg.init.w;
      const Vec3 c = cfg.init.x0;
      f = sample(grid, [&](const Vec3& x) {
        const double dx = x[0] - c[0], dy = x[1] - c[1], dz = x[2] - c[2];
        return cplx(A * std::exp(-(dx * dx + dy * dy + dz * dz) / (2.0 * w2)));
      });
      break;
    }
    case InitSpec::Kind::file: {
      f = io::read_field(cfg.init.path);
      if (!(f.grid == grid))
        throw Error(ErrorCode::mode_mismatch, "initial field in '" + cfg.init.path + "' does not match the configured grid");
      break;
    }
  }
  if (cfg.kick != Vec3{0.0, 0.0, 0.0}) {
    if (!grid.is_periodic()) throw Error(ErrorCode::mode_mismatch, "a momentum kick needs a periodic grid");
    parallel_for(f.size(), [&](std::size_t i) {
      const Vec3 x = grid.position(i);
      f[i] *= std::polar(1.0, cfg.kick[0] * x[0] + cfg.kick[1] * x[1] + cfg.kick[2] * x[2]);
    });
  }
  if (cfg.noise != 0.0) {
    // A few random low modes under a Gaussian envelope; reproducible from the seed.
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> normal;
    struct Mode {
      Vec3 k;
      cplx c;
    };
    std::vector<Mode> modes(8);
    for (auto& m : modes) {
      m.k = {normal(rng), normal(rng), normal(rng)};
      m.c = {normal(rng), normal(rng)};
    }
    const double eps = cfg.noise;
    const double width = 0.25 * cfg.L;
    if (grid.is_periodic()) {
      parallel_for(f.size(), [&](std::size_t i) {
        const Vec3 x = grid.position(i);
        const double r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
        cplx s{};
        for (const auto& m : modes) s += m.c * std::polar(1.0, m.k[0] * x[0] + m.k[1] * x[1] + m.k[2] * x[2]);
        f[i] += eps * std::exp(-r2 / (width * width)) * s;
      });
    } else {
      for (std::size_t i = 0; i < f.size(); ++i) {
        const double r = grid.coord(i);
        cplx s{};
        for (const auto& m : modes) s += m.c * std::cos(std::abs(m.k[0]) * r);
        f[i] += eps * std::exp(-r * r / (width * width)) * s;
      }
    }
  }
  return f;
}

}  // namespace nlslab
