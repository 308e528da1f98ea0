#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "qaction/model.hpp"

namespace qaction {

/// Bad configuration; field() names the offending key.
class ConfigError : public std::runtime_error {
public:
  ConfigError(std::string field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

private:
  std::string field_;
};

enum class Experiment {
  fig1_potential_wave,
  fig2_fit_vs_T,
  boundary_study,
  resolution_study,
  asymptotic_check,
  fig3_chaos_scan,
};

std::string to_string(Experiment e);
Experiment experiment_from_string(const std::string& s);  // throws ConfigError("experiment", ...)
const std::vector<Experiment>& all_experiments();

struct ExperimentConfig {
  Experiment experiment = Experiment::fig2_fit_vs_T;
  std::string output_dir = "out";
  std::uint64_t seed = 20240607;
  int jobs = 0;  // 0: all cores

  PhysConst c;
  ActionParams1D classical{1.0, 0.5, 1.0, 0.0};

  // fig2-fit-vs-T, asymptotic-check
  std::vector<double> initial_points = uniform_points(4.0, 5.0, 2);
  std::vector<double> final_points = uniform_points(0.5, 3.0, 10);
  std::vector<double> fit_T_grid = {2.0, 3.0, 4.5, 6.0, 8.0};
  int n_starts = 5;
  double jitter = 0.15;
  double band_m_v2_lo = 0.498, band_m_v2_hi = 0.502;
  double band_m_vm2_lo = 1.99, band_m_vm2_hi = 2.03;

  // boundary-study: "all" or one of vary-final, vary-initial, balanced
  std::string scenario = "all";
  std::vector<double> boundary_T_grid = {1.0, 1.5, 2.0, 3.0, 4.0};
  double balanced_residual_max = 2e-3;  // checked for 1 <= T <= 2

  // resolution-study (uses initial_points / final_points)
  std::vector<int> mesh_grid = {200, 400, 800, 1600, 3200, 6400, 12800};
  std::vector<double> resolution_T_grid = {2.0, 8.0, 14.0};
  double stability_tol = 1e-3;
  double resolution_factor = 10.0;  // required N_t(T_max) / N_t(T_min)

  // fig1-potential-wave
  double x_max = 4.0;
  int n_x = 400;

  // asymptotic-check
  double asym_T = 8.0;
  double law_x_lo = 0.2, law_x_hi = 4.0;
  int law_n = 200;
  double law_tube = 0.05;

  // fig3-chaos-scan
  ActionParams2D chaos_classical{1.0, 0.5, 0.05, 0.0, ActionRole::classical};
  ActionParams2D chaos_quantum{1.0, 0.504, 0.05, 1e-5, ActionRole::quantum};
  std::vector<double> energies = {2.0, 5.0, 10.0, 20.0, 40.0};
  int n_ic = 200;
  double t_end = 2000.0;
  double dt = 0.0;          // 0: automatic
  double threshold = -1.0;  // < 0: calibrated
  int section_orbits = 3;
  int section_crossings = 300;
};

/// Flat dotted-key view of a config file. JSON objects nest; key=value files
/// use the dotted keys directly ('#' starts a comment, lists are comma separated).
std::map<std::string, std::string> parse_config_text(const std::string& text);
std::map<std::string, std::string> read_config_file(const std::string& path);

/// Applies key/value pairs on top of `base`; unknown keys and malformed
/// values raise ConfigError.
void apply_config(ExperimentConfig& cfg, const std::map<std::string, std::string>& kv);

/// Checks every field the chosen experiment uses; throws ConfigError.
void validate_config(const ExperimentConfig& cfg);

/// All keys with their current values, in the key=value format.
std::map<std::string, std::string> config_to_map(const ExperimentConfig& cfg);

}  // namespace qaction
