#pragma once

#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "app/checks.hpp"
#include "app/config.hpp"

namespace photon::app {

struct RunReport {
  nlohmann::json config;      // resolved config echo
  nlohmann::json invariants;  // max trace drift, hermiticity defect, min eigenvalue, ...
  std::vector<CheckResult> checks;  // validate mode only
  std::vector<std::string> files;   // artifacts written, relative to the output dir
  double wall_seconds = 0.0;
  bool passed = true;

  /// Deterministic part of the report: no wall-clock figures.
  nlohmann::json to_json() const;
  /// Wall-clock figures, kept apart so report.json is reproducible.
  nlohmann::json timing_json() const;
};

/// Runs the configured mode, writes its artifacts under cfg.output and
/// returns the report. Progress lines go to `log`.
RunReport run(const RunConfig& cfg, std::ostream& log);

/// printf("%.17g").
std::string format_double(double v);

}  // namespace photon::app
