#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "photon/master.hpp"
#include "photon/opalg.hpp"
#include "photon/pulse.hpp"
#include "photon/slh.hpp"

namespace photon::app {

enum class Mode { Master, Trajectory, Ensemble, Validate };

Mode parse_mode(const std::string& s);
std::string to_string(Mode m);

/// Raised for malformed or invalid configuration files. `key` names the
/// offending entry when one can be identified.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& what);
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

struct SystemSpec {
  /// "twolevel" when built from the preset, empty otherwise.
  std::string preset;
  double kappa = 0.0;
  double omega = 0.0;
  Operator S, L, H;
};

struct RunConfig {
  Mode mode = Mode::Master;
  SystemSpec system;
  nlohmann::json pulse_spec;  // as resolved, for the echo
  Pulse pulse = Pulse::gaussian(3.0, 1.0);
  StateVector eta;
  double dt_ode = 1e-3;
  std::optional<double> dt_sde;
  double T = 10.0;
  std::uint64_t seed = 0;
  std::size_t n_traj = 500;
  unsigned threads = 0;  // 0 = available cores
  std::vector<NamedOperator> observables;
  std::vector<std::string> observable_specs;  // preset names or "custom"
  std::vector<double> checkpoints;
  std::string output = "out";
  std::string record;  // trajectory mode: filter this record instead of generating one
  double w_floor = kDefaultWFloor;
  Tolerances tolerances;
  std::vector<std::string> warnings;

  SLHTriple triple() const { return SLHTriple(system.S, system.L, system.H, tolerances); }
  /// Fully resolved configuration, defaults included.
  nlohmann::json echo() const;
};

/// Parses and validates a configuration. `mode_override` replaces the
/// file's `mode` key (the CLI positional argument).
RunConfig parse_config(const std::string& text, std::optional<Mode> mode_override = {});
RunConfig load_config(const std::string& path, std::optional<Mode> mode_override = {});

/// The two-level configuration used throughout the acceptance suite.
std::string default_config_text();

}  // namespace photon::app
