// Command-line experiment runner.
//
//   cavity_entropy_cli <experiment> --config <path> [--jobs N] [--out <path>]
//
// Writes the CSV to --out (or the config's "output", or <experiment>.csv) and
// a manifest next to it with the extension replaced by .manifest.json.

#include <chrono>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "cavity_entropy/experiments.hpp"

namespace ce = cavity_entropy;
namespace cli = cavity_entropy::cli;

int main(int argc, char** argv) {
  CLI::App app{"Particle-cavity entropy experiments"};
  app.set_version_flag("--version", std::string(ce::kVersion));

  std::string experiment;
  std::string config_path;
  std::string out_path;
  int jobs = 1;
  app.add_option("experiment", experiment, "Experiment to run")
      ->required()
      ->check(CLI::IsMember(cli::experiment_names()));
  app.add_option("--config", config_path, "Flat JSON configuration file")->required();
  app.add_option("--jobs", jobs, "Worker threads for sweeps")->check(CLI::PositiveNumber);
  app.add_option("--out", out_path, "CSV output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? cli::kExitOk : cli::kExitConfig;
  }

  cli::ExperimentConfig config;
  try {
    config = cli::load_config(config_path, experiment, cli::seed_from_environment());
  } catch (const ce::Error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return cli::kExitConfig;
  }

  std::filesystem::path csv_path = out_path;
  if (csv_path.empty()) csv_path = config.output.empty() ? experiment + ".csv" : config.output;

  const auto t0 = std::chrono::steady_clock::now();
  cli::RunResult result;
  try {
    result = cli::run_experiment(config, {jobs});
  } catch (const cli::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return cli::kExitConfig;
  } catch (const ce::InvariantViolation& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return cli::kExitConfig;
  } catch (const ce::Error& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return cli::kExitNumerical;
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  try {
    cli::write_text(csv_path, result.table.csv());
    cli::write_text(cli::manifest_path(csv_path), cli::manifest(config, result, wall).dump(2) + "\n");
  } catch (const std::exception& e) {
    std::cerr << "output error: " << e.what() << '\n';
    return cli::kExitNumerical;
  }

  for (const auto& c : result.checks) {
    std::cout << (c.pass ? "ok   " : "FAIL ") << c.name << " = " << cli::format_number(c.value) << '\n';
  }
  std::cout << "wrote " << csv_path.string() << '\n';

  if (experiment == "validate" && !result.all_pass()) return cli::kExitValidation;
  return cli::kExitOk;
}
