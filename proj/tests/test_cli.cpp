#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "qaction/config.hpp"
#include "qaction/csv.hpp"
#include "qaction/experiments.hpp"
#include "qaction/specfun.hpp"
#include "qaction/verify.hpp"

using namespace qaction;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("qaction_test_" + std::to_string(getpid())) / name;
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::string field_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "<no error>";
}

}  // namespace

TEST_CASE("csv quoting and number formatting") {
  CHECK(csv_escape("plain") == "plain");
  CHECK(csv_escape("a,b") == "\"a,b\"");
  CHECK(csv_escape("say \"hi\"") == "\"say \"\"hi\"\"\"");
  CHECK(csv_escape("two\nlines") == "\"two\nlines\"");
  CHECK(csv_number(0.1) == "0.1");
  CHECK(csv_number(2.0) == "2");
  for (double v : {1.0 / 3.0, 2.5e-300, -7.125, 6.02214076e23}) CHECK(std::strtod(csv_number(v).c_str(), nullptr) == v);

  CsvTable t({"a", "b"});
  t.row({"1", "x,y"});
  CHECK(t.str() == "a,b\r\n1,\"x,y\"\r\n");
  CHECK_THROWS_AS(t.row({"only one"}), std::invalid_argument);
}

TEST_CASE("sha256 known vector") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("config text: key=value and JSON agree") {
  const auto kv = parse_config_text(
      "# comment\n"
      "experiment = fig3-chaos-scan\n"
      "chaos.energies = 2, 5.5 ,40   # trailing comment\n"
      "chaos.n_ic=30\n"
      "\n");
  const auto js = parse_config_text(R"({"experiment": "fig3-chaos-scan",
                                       "chaos": {"energies": [2, 5.5, 40], "n_ic": 30}})");
  ExperimentConfig a, b;
  apply_config(a, kv);
  apply_config(b, js);
  CHECK(config_to_map(a) == config_to_map(b));
  CHECK(a.experiment == Experiment::fig3_chaos_scan);
  CHECK(a.energies == std::vector<double>{2.0, 5.5, 40.0});
  CHECK(a.n_ic == 30);

  // the printed form reads back to the same configuration
  ExperimentConfig c;
  apply_config(c, config_to_map(a));
  CHECK(config_to_map(c) == config_to_map(a));

  CHECK(field_of([] { parse_config_text("a = 1\na = 2\n"); }) == "a");
  CHECK(field_of([] { parse_config_text("no equals sign\n"); }) == "config");
  CHECK(field_of([] { parse_config_text("{\"broken\": "); }) == "config");
}

TEST_CASE("config errors name the offending field") {
  ExperimentConfig cfg;
  CHECK(field_of([&] { apply_config(cfg, {{"chaos.nic", "3"}}); }) == "chaos.nic");
  CHECK(field_of([&] { apply_config(cfg, {{"chaos.n_ic", "3.5"}}); }) == "chaos.n_ic");
  CHECK(field_of([&] { apply_config(cfg, {{"classical.v2", "abc"}}); }) == "classical.v2");
  CHECK(field_of([&] { apply_config(cfg, {{"experiment", "fig4"}}); }) == "experiment");
  CHECK(field_of([&] { apply_config(cfg, {{"seed", "-1"}}); }) == "seed");

  ExperimentConfig e;
  e.final_points.clear();
  CHECK(field_of([&] { validate_config(e); }) == "fit.final_points");
  e = ExperimentConfig{};
  e.initial_points = {0.3, -1.0};
  CHECK(field_of([&] { validate_config(e); }) == "fit.initial_points");
  e = ExperimentConfig{};
  e.experiment = Experiment::fig3_chaos_scan;
  e.n_ic = 0;
  CHECK(field_of([&] { validate_config(e); }) == "chaos.n_ic");
  e = ExperimentConfig{};
  e.experiment = Experiment::boundary_study;
  e.scenario = "sideways";
  CHECK(field_of([&] { validate_config(e); }) == "boundary.scenario");
  e = ExperimentConfig{};
  e.experiment = Experiment::resolution_study;
  e.mesh_grid = {400, 200};
  CHECK(field_of([&] { validate_config(e); }) == "resolution.mesh_grid");
  for (Experiment x : all_experiments()) {
    ExperimentConfig d;
    d.experiment = x;
    CHECK_NOTHROW(validate_config(d));
    CHECK(experiment_from_string(to_string(x)) == x);
  }
}

TEST_CASE("empty boundary set: validation error and no output") {
  ExperimentConfig cfg;
  cfg.output_dir = scratch("empty").string();
  cfg.final_points.clear();
  CHECK_THROWS_AS(run_experiment(cfg), ConfigError);
  CHECK(!fs::exists(cfg.output_dir));
}

TEST_CASE("experiment outputs are reproducible and hashed in the manifest") {
  for (Experiment x : {Experiment::fig1_potential_wave, Experiment::fig3_chaos_scan}) {
    ExperimentConfig cfg;
    cfg.experiment = x;
    cfg.n_ic = 8;
    cfg.energies = {2.0, 40.0};
    cfg.t_end = 300.0;
    cfg.section_crossings = 20;
    cfg.jobs = 1;
    cfg.output_dir = scratch("a").string();
    const RunReport a = run_experiment(cfg);
    cfg.output_dir = scratch("b").string();
    cfg.jobs = 2;
    const RunReport b = run_experiment(cfg);
    CAPTURE(to_string(x));
    CHECK(a.exit_status() == 0);
    REQUIRE(a.files == b.files);
    CHECK(a.files.back() == "manifest.json");

    const auto manifest = nlohmann::json::parse(slurp(fs::path(a.output_dir) / "manifest.json"));
    CHECK(manifest["experiment"] == to_string(x));
    CHECK(manifest["seed"] == cfg.seed);
    CHECK(manifest["files"].size() == a.files.size() - 1);
    for (const auto& f : manifest["files"]) {
      const std::string name = f["name"];
      const std::string content = slurp(fs::path(a.output_dir) / name);
      CHECK(f["sha256"] == sha256_hex(content));
      CHECK(content == slurp(fs::path(b.output_dir) / name));
    }
  }
}

TEST_CASE("verify: green, idempotent, and sensitive to a broken Bessel crossover") {
  const VerifyReport a = verify();
  CHECK(a.all_pass());
  CHECK(a.table() == verify().table());

  specfun::detail::set_bessel_crossover_override(7.0);
  const VerifyReport broken = verify();
  specfun::detail::set_bessel_crossover_override(0.0);
  REQUIRE(broken.entries.size() == a.entries.size());
  for (const auto& e : broken.entries) {
    CAPTURE(e.name);
    CHECK(e.pass == (e.name.find("Bessel") == std::string::npos));
  }
  CHECK(verify().all_pass());
}
