#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "app/config.hpp"

namespace photon::app {

/// Parameters of the two-level acceptance runs.
struct SuiteParams {
  double kappa = 1.0;
  double omega = 0.5;
  Pulse pulse = Pulse::gaussian(3.0, 1.0);
  StateVector eta = StateVector::Unit(2, 0);
  double T = 10.0;
  double dt_ode = 1e-3;
  double dt_trajectory = 1e-4;  // identity check, refined to dt/4
  double dt_ensemble = 1e-4;
  std::size_t n_traj = 500;
  std::uint64_t seed = 20240611;
  unsigned threads = 0;
  double w_floor = kDefaultWFloor;

  /// Takes system, pulse, eta, T, dt_ode, seed, n_traj and threads from a
  /// validated two-level config. The ensemble step is dt_sde.
  static SuiteParams from_config(const RunConfig& cfg);
};

struct CheckResult {
  int id = 0;
  std::string name;
  bool passed = false;
  nlohmann::json measured;   // measured quantities
  nlohmann::json limits;     // pinned tolerances
  double runtime_s = 0.0;
  double budget_s = 0.0;
  std::string note;

  nlohmann::json to_json() const;
  /// One line: `[PASS] 3 embedding equivalence: ...`.
  std::string summary_line() const;
};

CheckResult check_master_structure(const SuiteParams& p);
CheckResult check_twolevel_oracle(const SuiteParams& p);
CheckResult check_embedding(const SuiteParams& p);
CheckResult check_trajectory_identity(const SuiteParams& p);
/// Criteria 5 and 6 share one ensemble run.
std::vector<CheckResult> check_ensemble(const SuiteParams& p);
CheckResult check_vacuum_reduction(const SuiteParams& p);
CheckResult check_generating_filter(const SuiteParams& p);
CheckResult check_exponential_decay(const SuiteParams& p);

/// All nine checks, in criterion order, each exactly once.
std::vector<CheckResult> run_acceptance_suite(const SuiteParams& p);

}  // namespace photon::app
