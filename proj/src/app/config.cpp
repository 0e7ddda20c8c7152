#include "app/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace photon::app {

using nlohmann::json;

namespace {

// Line and column (1-based) of a byte offset into the source text.
std::pair<std::size_t, std::size_t> line_col(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < text.size() && i + 1 < byte; ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

double number(const json& j, const std::string& key) {
  if (!j.is_number()) throw ConfigError(key, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(key, "must be finite");
  return v;
}

double positive(const json& j, const std::string& key) {
  const double v = number(j, key);
  if (!(v > 0.0)) throw ConfigError(key, "must be > 0");
  return v;
}

cplx complex_entry(const json& j, const std::string& key) {
  if (j.is_number()) return {number(j, key), 0.0};
  if (j.is_array() && j.size() == 2) return {number(j[0], key), number(j[1], key)};
  throw ConfigError(key, "expected a number or an [re, im] pair");
}

Operator matrix(const json& j, const std::string& key, int dim) {
  if (!j.is_array() || static_cast<int>(j.size()) != dim) {
    throw ConfigError(key, "expected " + std::to_string(dim) + " rows");
  }
  Operator m(dim, dim);
  for (int r = 0; r < dim; ++r) {
    const json& row = j[r];
    const std::string rk = key + "[" + std::to_string(r) + "]";
    if (!row.is_array() || static_cast<int>(row.size()) != dim) {
      throw ConfigError(rk, "expected " + std::to_string(dim) + " entries");
    }
    for (int c = 0; c < dim; ++c) m(r, c) = complex_entry(row[c], rk);
  }
  return m;
}

json matrix_json(const Operator& m) {
  json rows = json::array();
  for (int r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back({m(r, c).real(), m(r, c).imag()});
    rows.push_back(row);
  }
  return rows;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << v;
  return os.str();
}

SystemSpec parse_system(const json& j, const Tolerances& tol) {
  if (!j.is_object()) throw ConfigError("system", "expected an object");
  SystemSpec sys;
  if (j.contains("preset")) {
    if (!j["preset"].is_string() || j["preset"].get<std::string>() != "twolevel") {
      throw ConfigError("system.preset", "unknown preset (available: \"twolevel\")");
    }
    if (!j.contains("kappa")) throw ConfigError("system.kappa", "required by preset twolevel");
    sys.preset = "twolevel";
    sys.kappa = positive(j["kappa"], "system.kappa");
    sys.omega = j.contains("omega") ? number(j["omega"], "system.omega") : 0.0;
    const SLHTriple g = two_level_system(sys.kappa, sys.omega);
    sys.S = g.S();
    sys.L = g.L();
    sys.H = g.H();
    return sys;
  }
  if (!j.contains("dim")) throw ConfigError("system.dim", "required without a preset");
  if (!j["dim"].is_number_integer()) throw ConfigError("system.dim", "expected an integer");
  const int dim = j["dim"].get<int>();
  if (dim < 1) throw ConfigError("system.dim", "must be >= 1");
  if (!j.contains("L")) throw ConfigError("system.L", "required");
  sys.S = j.contains("S") ? matrix(j["S"], "system.S", dim) : identity(dim);
  sys.L = matrix(j["L"], "system.L", dim);
  sys.H = j.contains("H") ? matrix(j["H"], "system.H", dim) : zeros(dim);
  const double sd = unitarity_defect(sys.S);
  if (!(sd <= tol.structural)) {
    throw ConfigError("system.S", "S is not unitary: ||S*S - I||_max = " + fmt(sd));
  }
  const double hd = hermiticity_defect(sys.H);
  if (!(hd <= tol.structural)) {
    throw ConfigError("system.H", "H is not Hermitian: ||H - H*||_max = " + fmt(hd));
  }
  return sys;
}

Pulse parse_pulse(const json& j, json& resolved) {
  if (!j.is_object() || !j.contains("shape") || !j["shape"].is_string()) {
    throw ConfigError("pulse.shape", "required (gaussian, exponential, square, tabulated)");
  }
  const std::string shape = j["shape"].get<std::string>();
  const double detuning = j.contains("detuning") ? number(j["detuning"], "pulse.detuning") : 0.0;
  resolved = {{"shape", shape}, {"detuning", detuning}};
  auto need = [&](const char* k) -> const json& {
    if (!j.contains(k)) throw ConfigError(std::string("pulse.") + k, "required for " + shape);
    return j[k];
  };
  try {
    if (shape == "gaussian") {
      const double t0 = number(need("t0"), "pulse.t0");
      const double sigma = positive(need("sigma"), "pulse.sigma");
      resolved["t0"] = t0;
      resolved["sigma"] = sigma;
      return Pulse::gaussian(t0, sigma, detuning);
    }
    if (shape == "exponential") {
      const double gamma = positive(need("gamma"), "pulse.gamma");
      const double t0 = j.contains("t0") ? number(j["t0"], "pulse.t0") : 0.0;
      resolved["gamma"] = gamma;
      resolved["t0"] = t0;
      return Pulse::decaying_exponential(gamma, t0, detuning);
    }
    if (shape == "square") {
      const double t0 = number(need("t0"), "pulse.t0");
      const double t1 = number(need("t1"), "pulse.t1");
      resolved["t0"] = t0;
      resolved["t1"] = t1;
      return Pulse::square(t0, t1, detuning);
    }
    if (shape == "tabulated") {
      const json& g = need("grid");
      const json& v = need("values");
      if (!g.is_array() || !v.is_array() || g.size() != v.size()) {
        throw ConfigError("pulse.values", "grid and values must be arrays of equal length");
      }
      std::vector<double> grid;
      std::vector<cplx> values;
      for (const auto& x : g) grid.push_back(number(x, "pulse.grid"));
      for (const auto& x : v) values.push_back(complex_entry(x, "pulse.values"));
      resolved["grid"] = g;
      resolved["values"] = v;
      return Pulse::tabulated(std::move(grid), std::move(values), detuning);
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError("pulse", e.what());
  }
  throw ConfigError("pulse.shape", "unknown shape '" + shape + "'");
}

StateVector parse_eta(const json& j, int dim, std::vector<std::string>& warnings) {
  if (!j.is_array() || static_cast<int>(j.size()) != dim) {
    throw ConfigError("eta", "expected " + std::to_string(dim) + " amplitudes");
  }
  StateVector eta(dim);
  for (int i = 0; i < dim; ++i) eta(i) = complex_entry(j[i], "eta");
  const double norm = eta.norm();
  const double off = std::abs(norm - 1.0);
  if (off >= 1e-6) {
    throw ConfigError("eta", "not a unit vector: | |eta| - 1 | = " + fmt(off));
  }
  if (off > 0.0) {
    eta /= norm;
    warnings.push_back("eta normalised (| |eta| - 1 | = " + fmt(off) + ")");
  }
  return eta;
}

NamedOperator preset_observable(const std::string& name, int dim) {
  if (dim != 2) {
    throw ConfigError("observables", "preset '" + name + "' needs a two-dimensional system");
  }
  if (name == "sx") return {name, pauli::sx()};
  if (name == "sy") return {name, pauli::sy()};
  if (name == "sz") return {name, pauli::sz()};
  if (name == "population") return {name, pauli::number()};
  throw ConfigError("observables", "unknown preset '" + name + "' (sx, sy, sz, population)");
}

const std::set<std::string> kKnownKeys{
    "mode",    "system",   "pulse",   "eta",   "dt_ode",      "dt_sde", "T",
    "seed",    "n_traj",   "threads", "observables", "checkpoints", "output", "record",
    "w_floor", "tolerances"};

}  // namespace

ConfigError::ConfigError(std::string key, const std::string& what)
    : std::runtime_error(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}

Mode parse_mode(const std::string& s) {
  if (s == "master") return Mode::Master;
  if (s == "trajectory") return Mode::Trajectory;
  if (s == "ensemble") return Mode::Ensemble;
  if (s == "validate") return Mode::Validate;
  throw ConfigError("mode", "unknown mode '" + s + "' (master, trajectory, ensemble, validate)");
}

std::string to_string(Mode m) {
  switch (m) {
    case Mode::Master: return "master";
    case Mode::Trajectory: return "trajectory";
    case Mode::Ensemble: return "ensemble";
    case Mode::Validate: return "validate";
  }
  return "?";
}

RunConfig parse_config(const std::string& text, std::optional<Mode> mode_override) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_col(text, e.byte);
    std::ostringstream os;
    os << "parse error at line " << line << ", column " << col << ": " << e.what();
    throw ConfigError("", os.str());
  }
  if (!j.is_object()) throw ConfigError("", "top level must be an object");

  RunConfig cfg;
  for (const auto& [k, v] : j.items()) {
    if (!kKnownKeys.count(k)) cfg.warnings.push_back("unknown key '" + k + "' ignored");
  }

  if (mode_override) {
    cfg.mode = *mode_override;
  } else if (j.contains("mode") && j["mode"].is_string()) {
    cfg.mode = parse_mode(j["mode"].get<std::string>());
  } else {
    throw ConfigError("mode", "required (or pass it on the command line)");
  }

  if (j.contains("tolerances")) {
    const json& t = j["tolerances"];
    if (!t.is_object()) throw ConfigError("tolerances", "expected an object");
    if (t.contains("structural")) {
      cfg.tolerances.structural = positive(t["structural"], "tolerances.structural");
    }
    if (t.contains("algebraic")) {
      cfg.tolerances.algebraic = positive(t["algebraic"], "tolerances.algebraic");
    }
  }

  if (!j.contains("system")) throw ConfigError("system", "required");
  cfg.system = parse_system(j["system"], cfg.tolerances);
  const int dim = static_cast<int>(cfg.system.S.rows());

  if (!j.contains("pulse")) throw ConfigError("pulse", "required");
  cfg.pulse = parse_pulse(j["pulse"], cfg.pulse_spec);

  if (j.contains("eta")) {
    cfg.eta = parse_eta(j["eta"], dim, cfg.warnings);
  } else {
    cfg.eta = StateVector::Zero(dim);
    cfg.eta(0) = 1.0;
  }

  if (j.contains("T")) cfg.T = positive(j["T"], "T");
  if (j.contains("dt_ode")) cfg.dt_ode = positive(j["dt_ode"], "dt_ode");
  if (j.contains("dt_sde")) cfg.dt_sde = positive(j["dt_sde"], "dt_sde");
  const bool stochastic = cfg.mode != Mode::Master;
  if (stochastic && !cfg.dt_sde) {
    throw ConfigError("dt_sde", "required in " + to_string(cfg.mode) + " mode");
  }
  auto check_grid = [&](double dt, const char* key) {
    try {
      TimeGrid::from_horizon(dt, cfg.T);
    } catch (const std::exception& e) {
      throw ConfigError(key, e.what());
    }
  };
  check_grid(cfg.dt_ode, "dt_ode");
  if (cfg.dt_sde) check_grid(*cfg.dt_sde, "dt_sde");

  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) throw ConfigError("seed", "expected an unsigned integer");
    cfg.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("n_traj")) {
    if (!j["n_traj"].is_number_integer() || j["n_traj"].get<long long>() < 2) {
      throw ConfigError("n_traj", "expected an integer >= 2");
    }
    cfg.n_traj = j["n_traj"].get<std::size_t>();
  }
  if (j.contains("threads")) {
    if (!j["threads"].is_number_unsigned()) throw ConfigError("threads", "expected >= 0");
    cfg.threads = j["threads"].get<unsigned>();
  }
  if (j.contains("w_floor")) cfg.w_floor = positive(j["w_floor"], "w_floor");
  if (j.contains("output")) {
    if (!j["output"].is_string()) throw ConfigError("output", "expected a path");
    cfg.output = j["output"].get<std::string>();
  }
  if (j.contains("record")) {
    if (!j["record"].is_string()) throw ConfigError("record", "expected a path");
    cfg.record = j["record"].get<std::string>();
  }

  if (j.contains("observables")) {
    const json& obs = j["observables"];
    if (!obs.is_array() || obs.empty()) throw ConfigError("observables", "expected a list");
    for (const auto& o : obs) {
      if (o.is_string()) {
        cfg.observables.push_back(preset_observable(o.get<std::string>(), dim));
        cfg.observable_specs.push_back(o.get<std::string>());
      } else if (o.is_object() && o.contains("name") && o.contains("op") &&
                 o["name"].is_string()) {
        const std::string name = o["name"].get<std::string>();
        cfg.observables.push_back({name, matrix(o["op"], "observables." + name, dim)});
        cfg.observable_specs.push_back("custom");
      } else {
        throw ConfigError("observables", "entries are preset names or {name, op}");
      }
    }
  } else if (dim == 2) {
    for (const char* n : {"sx", "sy", "sz"}) {
      cfg.observables.push_back(preset_observable(n, dim));
      cfg.observable_specs.push_back(n);
    }
  } else {
    throw ConfigError("observables", "required when the system is not two-dimensional");
  }
  std::set<std::string> seen;
  for (const auto& o : cfg.observables) {
    if (!seen.insert(o.name).second) {
      throw ConfigError("observables", "duplicate name '" + o.name + "'");
    }
  }

  if (j.contains("checkpoints")) {
    if (!j["checkpoints"].is_array()) throw ConfigError("checkpoints", "expected a list");
    for (const auto& c : j["checkpoints"]) {
      const double t = number(c, "checkpoints");
      if (t < 0.0 || t > cfg.T) throw ConfigError("checkpoints", "must lie in [0, T]");
      cfg.checkpoints.push_back(t);
    }
  } else {
    for (int k = 1; k <= static_cast<int>(std::floor(cfg.T + 1e-9)); ++k) {
      cfg.checkpoints.push_back(k);
    }
  }

  if (cfg.mode == Mode::Validate && cfg.system.preset != "twolevel") {
    throw ConfigError("system", "validate mode needs the twolevel preset");
  }
  return cfg;
}

RunConfig load_config(const std::string& path, std::optional<Mode> mode_override) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), mode_override);
}

json RunConfig::echo() const {
  json sys;
  if (system.preset.empty()) {
    sys = {{"dim", system.S.rows()},
           {"S", matrix_json(system.S)},
           {"L", matrix_json(system.L)},
           {"H", matrix_json(system.H)}};
  } else {
    sys = {{"preset", system.preset}, {"kappa", system.kappa}, {"omega", system.omega}};
  }
  json eta_j = json::array();
  for (int i = 0; i < eta.size(); ++i) eta_j.push_back({eta(i).real(), eta(i).imag()});
  json obs = json::array();
  for (std::size_t i = 0; i < observables.size(); ++i) {
    if (observable_specs[i] == "custom") {
      obs.push_back({{"name", observables[i].name}, {"op", matrix_json(observables[i].op)}});
    } else {
      obs.push_back(observable_specs[i]);
    }
  }
  json out = {{"mode", to_string(mode)},
              {"system", sys},
              {"pulse", pulse_spec},
              {"eta", eta_j},
              {"dt_ode", dt_ode},
              {"T", T},
              {"seed", seed},
              {"n_traj", n_traj},
              {"threads", threads},
              {"observables", obs},
              {"checkpoints", checkpoints},
              {"output", output},
              {"w_floor", w_floor},
              {"tolerances",
               {{"structural", tolerances.structural}, {"algebraic", tolerances.algebraic}}}};
  out["dt_sde"] = dt_sde ? json(*dt_sde) : json(nullptr);
  if (!record.empty()) out["record"] = record;
  return out;
}

std::string default_config_text() {
  return R"({
  "mode": "validate",
  "system": {"preset": "twolevel", "kappa": 1.0, "omega": 0.5},
  "pulse": {"shape": "gaussian", "t0": 3.0, "sigma": 1.0},
  "eta": [1, 0],
  "dt_ode": 1e-3,
  "dt_sde": 1e-4,
  "T": 10,
  "seed": 20240611,
  "n_traj": 500,
  "observables": ["sx", "sy", "sz", "population"],
  "output": "out"
}
)";
}

}  // namespace photon::app
