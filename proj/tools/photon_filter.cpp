// photon_filter <mode> --config <path> [--out <dir>] [--seed <u64>] [--n-traj <n>]

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "app/config.hpp"
#include "app/run.hpp"

int main(int argc, char** argv) {
  CLI::App cli{"Single-photon master equations and quantum filters"};
  std::string mode;
  std::string config_path;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> n_traj;
  bool print_default = false;

  cli.add_option("mode", mode, "master | trajectory | ensemble | validate");
  cli.add_option("--config,-c", config_path, "JSON configuration file");
  cli.add_option("--out,-o", out, "output directory (overrides `output`)");
  cli.add_option("--seed", seed, "master seed (overrides `seed`)");
  cli.add_option("--n-traj", n_traj, "ensemble size (overrides `n_traj`)")
      ->check(CLI::PositiveNumber);
  cli.add_flag("--print-default-config", print_default,
               "print the two-level validation config and exit");
  CLI11_PARSE(cli, argc, argv);

  if (print_default) {
    std::cout << photon::app::default_config_text();
    return 0;
  }
  if (mode.empty() || config_path.empty()) {
    std::cerr << "error: a mode and --config are required\n" << cli.help();
    return 2;
  }

  try {
    auto cfg = photon::app::load_config(config_path, photon::app::parse_mode(mode));
    if (out) cfg.output = *out;
    if (seed) cfg.seed = *seed;
    if (n_traj) {
      if (*n_traj < 2) throw photon::app::ConfigError("n_traj", "expected an integer >= 2");
      cfg.n_traj = *n_traj;
    }
    for (const auto& w : cfg.warnings) std::cerr << "warning: " << w << '\n';

    const auto report = photon::app::run(cfg, std::cout);
    std::cout << (report.passed ? "ok" : "FAILED") << ": wrote " << report.files.size()
              << " file(s) to " << cfg.output << " in " << report.wall_seconds << " s\n";
    return report.passed ? 0 : 1;
  } catch (const photon::app::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
