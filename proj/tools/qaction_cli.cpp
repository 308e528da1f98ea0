#include <cstdio>
#include <exception>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qaction/config.hpp"
#include "qaction/experiments.hpp"
#include "qaction/verify.hpp"

using namespace qaction;

int main(int argc, char** argv) {
  CLI::App app{"Quantum-action fits for the inverse-square potential and chaos scans of the 2-D coupled oscillator."};
  std::string config_path, experiment, out_dir;
  std::vector<std::string> overrides;
  std::uint64_t seed = 0;
  int jobs = -1;
  bool do_verify = false, print_config = false;

  std::string names;
  for (Experiment e : all_experiments()) names += (names.empty() ? "" : ", ") + to_string(e);
  app.add_option("--config", config_path, "config file: JSON, or key = value lines")->check(CLI::ExistingFile);
  app.add_option("--experiment", experiment, "one of: " + names);
  auto* seed_opt = app.add_option("--seed", seed, "random seed (multi-start jitter, chaos initial conditions)");
  app.add_option("--jobs", jobs, "worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--set", overrides, "override a config key: --set chaos.n_ic=50 (repeatable)");
  app.add_flag("--verify", do_verify, "run the fast self-checks and exit");
  app.add_flag("--print-config", print_config, "print the effective configuration as key = value and exit");
  CLI11_PARSE(app, argc, argv);

  if (do_verify) {
    const VerifyReport r = verify();
    std::fputs(r.table().c_str(), stdout);
    return r.all_pass() ? 0 : 1;
  }

  ExperimentConfig cfg;
  try {
    if (!config_path.empty()) apply_config(cfg, read_config_file(config_path));
    for (const auto& o : overrides) {
      const auto eq = o.find('=');
      if (eq == std::string::npos) throw ConfigError(o, "--set expects key=value");
      apply_config(cfg, parse_config_text(o));
    }
    if (!experiment.empty()) cfg.experiment = experiment_from_string(experiment);
    if (*seed_opt) cfg.seed = seed;
    if (jobs >= 0) cfg.jobs = jobs;
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    validate_config(cfg);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  }

  if (print_config) {
    for (const auto& [k, v] : config_to_map(cfg)) std::printf("%s = %s\n", k.c_str(), v.c_str());
    return 0;
  }

  try {
    const RunReport r = run_experiment(cfg);
    for (const auto& c : r.checks)
      std::printf("%s  %s%s%s\n", c.pass ? "PASS" : "FAIL", c.name.c_str(), c.detail.empty() ? "" : "  | ",
                  c.detail.c_str());
    if (r.failed_cells) std::printf("%d sweep cell(s) failed; see the CSV error column\n", r.failed_cells);
    std::printf("%s: %zu files in %s (%.1f s)\n", to_string(cfg.experiment).c_str(), r.files.size(),
                cfg.output_dir.c_str(), r.wall_time);
    return r.exit_status();
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  }
}
