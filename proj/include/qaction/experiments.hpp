#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "qaction/config.hpp"

namespace qaction {

struct Check {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct RunReport {
  Experiment experiment = Experiment::fig2_fit_vs_T;
  std::string output_dir;
  std::vector<std::string> files;  // names relative to output_dir, manifest last
  std::vector<Check> checks;
  int failed_cells = 0;
  double wall_time = 0.0;
  nlohmann::json summary;  // experiment-specific numbers, also in the manifest

  bool checks_pass() const;
  /// 0: all checks pass; 1: a check failed; 3: some sweep cells failed.
  int exit_status() const;
};

/// Validates the config (ConfigError before anything is written), runs the
/// experiment, and writes its CSV files, gnuplot stub and manifest.json.
RunReport run_experiment(const ExperimentConfig& cfg);

std::string sha256_hex(const std::string& data);

}  // namespace qaction
