#include "app/run.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>

#include "photon/filter.hpp"
#include "photon/master.hpp"

namespace photon::app {

using nlohmann::json;
namespace fs = std::filesystem;

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

class CsvWriter {
 public:
  CsvWriter(const fs::path& path, const std::vector<std::string>& header) : out_(path) {
    if (!out_) throw std::runtime_error("cannot write " + path.string());
    for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
    out_ << '\n';
  }
  void row(const std::vector<double>& values) {
    for (std::size_t i = 0; i < values.size(); ++i) {
      out_ << (i ? "," : "") << format_double(values[i]);
    }
    out_ << '\n';
  }

 private:
  std::ofstream out_;
};

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

json master_invariants(const InvariantSummary& inv) {
  return {{"max_trace_drift", inv.max_trace_drift},
          {"max_cross_trace", inv.max_cross_trace},
          {"max_cross_asymmetry", inv.max_cross_asymmetry},
          {"max_hermiticity_defect", inv.max_hermiticity_defect},
          {"min_eigenvalue", inv.min_eigenvalue}};
}

void run_master(const RunConfig& cfg, const fs::path& dir, RunReport& rep, std::ostream& log) {
  MasterOptions opts;
  opts.observables = cfg.observables;
  const MasterRun run = integrate_master(cfg.triple(), cfg.pulse, cfg.eta, cfg.dt_ode, cfg.T, opts);
  std::vector<std::string> header{"t"};
  for (const auto& o : cfg.observables) {
    for (const char* jk : kBlockLabels) {
      header.push_back(std::string("mu") + jk + "_" + o.name + "_re");
      header.push_back(std::string("mu") + jk + "_" + o.name + "_im");
    }
  }
  CsvWriter csv(dir / "master.csv", header);
  std::vector<double> row;
  for (std::size_t k = 0; k <= run.grid.n_steps; ++k) {
    row.assign(1, run.grid.time(k));
    for (std::size_t i = 0; i < cfg.observables.size(); ++i) {
      for (int jk = 0; jk < 4; ++jk) {
        row.push_back(run.expectations[i][jk][k].real());
        row.push_back(run.expectations[i][jk][k].imag());
      }
    }
    csv.row(row);
  }
  rep.files.push_back("master.csv");
  rep.invariants = master_invariants(run.invariants);
  log << "master: " << run.grid.n_steps << " steps, trace drift "
      << run.invariants.max_trace_drift << '\n';
}

void run_single_trajectory(const RunConfig& cfg, const fs::path& dir, RunReport& rep,
                           std::ostream& log) {
  const SLHTriple G = cfg.triple();
  TrajectoryOptions opts;
  opts.observables = cfg.observables;
  opts.w_floor = cfg.w_floor;

  TrajectoryRun run;
  if (!cfg.record.empty()) {
    const MeasurementRecord rec = load_record(cfg.record);
    run = run_filter(G, cfg.pulse, cfg.eta, rec, opts);
    log << "trajectory: filtered " << rec.dY.size() << " increments from " << cfg.record << '\n';
  } else {
    const ExtendedSystem ext(G, cfg.pulse, cfg.w_floor);
    const GeneratedRecord gen = generate_record(ext, cfg.eta, *cfg.dt_sde, cfg.T, cfg.seed, 0, opts);
    save_record((dir / "record.txt").string(), gen.record);
    rep.files.push_back("record.txt");
    run = run_filter(G, cfg.pulse, cfg.eta, gen.record, opts, &gen);
    log << "trajectory: " << run.grid.n_steps << " steps, seed " << cfg.seed << '\n';
  }

  std::vector<std::string> header{"t"};
  for (const auto& o : cfg.observables) header.push_back("pi11_" + o.name);
  for (const auto& o : cfg.observables) header.push_back("ext_" + o.name);
  header.push_back("Y");
  header.push_back("W");
  CsvWriter csv(dir / "trajectory.csv", header);
  const bool have_ext = !run.extended.empty();
  std::vector<double> row;
  for (std::size_t k = 0; k <= run.grid.n_steps; ++k) {
    row.assign(1, run.grid.time(k));
    for (const auto& series : run.pi11) row.push_back(series[k]);
    for (std::size_t i = 0; i < cfg.observables.size(); ++i) {
      row.push_back(have_ext ? run.extended[i][k] : std::numeric_limits<double>::quiet_NaN());
    }
    row.push_back(run.Y[k]);
    row.push_back(run.W[k]);
    csv.row(row);
  }
  rep.files.push_back("trajectory.csv");

  json cross = json::object();
  if (have_ext) {
    for (std::size_t i = 0; i < cfg.observables.size(); ++i) {
      cross[cfg.observables[i].name] = run.max_cross_check[i];
    }
  }
  rep.invariants = {{"max_trace_drift", run.max_trace_drift},
                    {"max_cross_asymmetry", run.max_cross_asymmetry},
                    {"max_cross_check", cross},
                    {"cross_check_flagged", run.cross_check_flagged},
                    {"W_final", run.W_final}};
  if (run.cross_check_flagged) {
    log << "warning: filter and extended system differ by more than "
        << opts.cross_check_tolerance << '\n';
  }
}

void run_ensemble_mode(const RunConfig& cfg, const fs::path& dir, RunReport& rep,
                       std::ostream& log) {
  const SLHTriple G = cfg.triple();
  TrajectoryOptions opts;
  opts.observables = cfg.observables;
  opts.w_floor = cfg.w_floor;
  opts.checkpoints = cfg.checkpoints;
  std::vector<std::size_t> ode_index;
  for (const double t : cfg.checkpoints) {
    const double k = t / cfg.dt_ode;
    if (std::abs(k - std::round(k)) > 1e-9 * std::max(1.0, k)) {
      throw ConfigError("checkpoints", "t=" + format_double(t) + " is not on the dt_ode grid");
    }
    ode_index.push_back(static_cast<std::size_t>(std::llround(k)));
  }

  log << "ensemble: " << cfg.n_traj << " trajectories on " << resolve_threads(cfg.threads)
      << " thread(s)\n";
  const EnsembleResult ens = run_ensemble(G, cfg.pulse, cfg.eta, *cfg.dt_sde, cfg.T, cfg.seed,
                                          cfg.n_traj, opts, cfg.threads);
  MasterOptions mopts;
  mopts.observables = cfg.observables;
  const MasterRun master = integrate_master(G, cfg.pulse, cfg.eta, cfg.dt_ode, cfg.T, mopts);

  std::vector<std::string> header{"t"};
  for (const auto& o : cfg.observables) {
    header.push_back("mean_" + o.name);
    header.push_back("stderr_" + o.name);
    header.push_back("mu11_" + o.name);
  }
  CsvWriter csv(dir / "ensemble.csv", header);
  std::vector<double> row;
  for (std::size_t c = 0; c < cfg.checkpoints.size(); ++c) {
    row.assign(1, cfg.checkpoints[c]);
    for (std::size_t i = 0; i < cfg.observables.size(); ++i) {
      row.push_back(ens.mean[i][c]);
      row.push_back(ens.stderr_[i][c]);
      row.push_back(master.expectations[i][0][ode_index[c]].real());
    }
    csv.row(row);
  }
  rep.files.push_back("ensemble.csv");
  rep.invariants = {{"max_trace_drift", ens.max_trace_drift},
                    {"max_cross_asymmetry", ens.max_cross_asymmetry},
                    {"W_mean", ens.W_mean},
                    {"W_var", ens.W_var},
                    {"n_traj", ens.n_traj}};
}

void run_validate(const RunConfig& cfg, RunReport& rep, std::ostream& log) {
  const SuiteParams p = SuiteParams::from_config(cfg);
  rep.checks = run_acceptance_suite(p);
  for (const auto& c : rep.checks) {
    log << c.summary_line() << '\n';
    rep.passed = rep.passed && c.passed;
  }
  const json& m1 = rep.checks.front().measured;
  rep.invariants = {{"max_trace_drift", m1["trace_drift"]},
                    {"max_hermiticity_defect", m1["hermiticity_defect"]},
                    {"min_eigenvalue", m1["min_eig"]},
                    {"max_cross_asymmetry", m1["cross_asymmetry"]}};
}

}  // namespace

json RunReport::to_json() const {
  json checks_j = json::array();
  for (const auto& c : checks) {
    json j = c.to_json();
    j.erase("runtime_s");
    // Per-trajectory wall times for check 4 live in the timing file as well.
    if (j["measured"].contains("seconds_coarse")) {
      j["measured"].erase("seconds_coarse");
      j["measured"].erase("seconds_refined");
    }
    j["passed"] = c.passed;
    checks_j.push_back(j);
  }
  return {{"config", config},
          {"invariants", invariants},
          {"checks", checks_j},
          {"files", files},
          {"passed", passed}};
}

json RunReport::timing_json() const {
  json per = json::object();
  for (const auto& c : checks) {
    per[std::to_string(c.id)] = {{"runtime_s", c.runtime_s}, {"budget_s", c.budget_s}};
  }
  return {{"wall_seconds", wall_seconds}, {"checks", per}};
}

RunReport run(const RunConfig& cfg, std::ostream& log) {
  const auto start = std::chrono::steady_clock::now();
  RunReport rep;
  rep.config = cfg.echo();
  const fs::path dir(cfg.output);
  fs::create_directories(dir);

  switch (cfg.mode) {
    case Mode::Master: run_master(cfg, dir, rep, log); break;
    case Mode::Trajectory: run_single_trajectory(cfg, dir, rep, log); break;
    case Mode::Ensemble: run_ensemble_mode(cfg, dir, rep, log); break;
    case Mode::Validate: run_validate(cfg, rep, log); break;
  }
  rep.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  rep.files.push_back("report.json");
  rep.files.push_back("timing.json");
  write_json(dir / "report.json", rep.to_json());
  write_json(dir / "timing.json", rep.timing_json());
  return rep;
}

}  // namespace photon::app
