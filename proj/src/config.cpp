#include "qaction/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "json.hpp"
#include "qaction/csv.hpp"

namespace qaction {

namespace {

const std::vector<std::pair<Experiment, std::string>> kNames = {
    {Experiment::fig1_potential_wave, "fig1-potential-wave"}, {Experiment::fig2_fit_vs_T, "fig2-fit-vs-T"},
    {Experiment::boundary_study, "boundary-study"},           {Experiment::resolution_study, "resolution-study"},
    {Experiment::asymptotic_check, "asymptotic-check"},       {Experiment::fig3_chaos_scan, "fig3-chaos-scan"},
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r\n") - b + 1);
}

std::string fmt(double v) { return csv_number(v); }

double parse_double(const std::string& key, const std::string& raw) {
  const std::string s = trim(raw);
  double v = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || p != s.data() + s.size() || !std::isfinite(v))
    throw ConfigError(key, "expected a finite number, got '" + raw + "'");
  return v;
}

long long parse_int(const std::string& key, const std::string& raw) {
  const std::string s = trim(raw);
  long long v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || p != s.data() + s.size())
    throw ConfigError(key, "expected an integer, got '" + raw + "'");
  return v;
}

std::vector<std::string> split_list(const std::string& raw) {
  std::vector<std::string> out;
  const std::string s = trim(raw);
  if (s.empty()) return out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

struct Field {
  std::string key;
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

template <class Ref>
Field real(std::string key, Ref ref) {
  return {key, [=](ExperimentConfig& c, const std::string& v) { ref(c) = parse_double(key, v); },
          [=](const ExperimentConfig& c) { return fmt(ref(const_cast<ExperimentConfig&>(c))); }};
}

template <class Ref>
Field integer(std::string key, Ref ref) {
  return {key,
          [=](ExperimentConfig& c, const std::string& v) {
            const long long x = parse_int(key, v);
            if (x < -2147483647LL || x > 2147483647LL) throw ConfigError(key, "out of range");
            ref(c) = static_cast<int>(x);
          },
          [=](const ExperimentConfig& c) { return std::to_string(ref(const_cast<ExperimentConfig&>(c))); }};
}

template <class Ref>
Field real_list(std::string key, Ref ref) {
  return {key,
          [=](ExperimentConfig& c, const std::string& v) {
            std::vector<double> out;
            for (const auto& s : split_list(v)) out.push_back(parse_double(key, s));
            ref(c) = out;
          },
          [=](const ExperimentConfig& c) {
            std::string s;
            for (double x : ref(const_cast<ExperimentConfig&>(c))) s += (s.empty() ? "" : ", ") + fmt(x);
            return s;
          }};
}

const std::vector<Field>& fields() {
  using C = ExperimentConfig;
  static const std::vector<Field> f = {
      {"experiment", [](C& c, const std::string& v) { c.experiment = experiment_from_string(trim(v)); },
       [](const C& c) { return to_string(c.experiment); }},
      {"output_dir", [](C& c, const std::string& v) { c.output_dir = trim(v); }, [](const C& c) { return c.output_dir; }},
      {"seed",
       [](C& c, const std::string& v) {
         const std::string s = trim(v);
         std::uint64_t x = 0;
         const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
         if (s.empty() || ec != std::errc() || p != s.data() + s.size())
           throw ConfigError("seed", "expected a non-negative integer, got '" + v + "'");
         c.seed = x;
       },
       [](const C& c) { return std::to_string(c.seed); }},
      integer("jobs", [](C& c) -> int& { return c.jobs; }),
      real("hbar", [](C& c) -> double& { return c.c.hbar; }),
      real("classical.m", [](C& c) -> double& { return c.classical.m; }),
      real("classical.v2", [](C& c) -> double& { return c.classical.v2; }),
      real("classical.vm2", [](C& c) -> double& { return c.classical.vm2; }),
      real_list("fit.initial_points", [](C& c) -> std::vector<double>& { return c.initial_points; }),
      real_list("fit.final_points", [](C& c) -> std::vector<double>& { return c.final_points; }),
      real_list("fit.T_grid", [](C& c) -> std::vector<double>& { return c.fit_T_grid; }),
      integer("fit.n_starts", [](C& c) -> int& { return c.n_starts; }),
      real("fit.jitter", [](C& c) -> double& { return c.jitter; }),
      real("fit.band.m_v2_lo", [](C& c) -> double& { return c.band_m_v2_lo; }),
      real("fit.band.m_v2_hi", [](C& c) -> double& { return c.band_m_v2_hi; }),
      real("fit.band.m_vm2_lo", [](C& c) -> double& { return c.band_m_vm2_lo; }),
      real("fit.band.m_vm2_hi", [](C& c) -> double& { return c.band_m_vm2_hi; }),
      {"boundary.scenario", [](C& c, const std::string& v) { c.scenario = trim(v); },
       [](const C& c) { return c.scenario; }},
      real_list("boundary.T_grid", [](C& c) -> std::vector<double>& { return c.boundary_T_grid; }),
      real("boundary.balanced_residual_max", [](C& c) -> double& { return c.balanced_residual_max; }),
      {"resolution.mesh_grid",
       [](C& c, const std::string& v) {
         std::vector<int> out;
         for (const auto& s : split_list(v)) {
           const long long x = parse_int("resolution.mesh_grid", s);
           if (x <= 0 || x > 100000000) throw ConfigError("resolution.mesh_grid", "densities must be in [1, 1e8]");
           out.push_back(static_cast<int>(x));
         }
         c.mesh_grid = out;
       },
       [](const C& c) {
         std::string s;
         for (int x : c.mesh_grid) s += (s.empty() ? "" : ", ") + std::to_string(x);
         return s;
       }},
      real_list("resolution.T_grid", [](C& c) -> std::vector<double>& { return c.resolution_T_grid; }),
      real("resolution.stability_tol", [](C& c) -> double& { return c.stability_tol; }),
      real("resolution.factor", [](C& c) -> double& { return c.resolution_factor; }),
      real("fig1.x_max", [](C& c) -> double& { return c.x_max; }),
      integer("fig1.n", [](C& c) -> int& { return c.n_x; }),
      real("asymptotic.T", [](C& c) -> double& { return c.asym_T; }),
      real("asymptotic.x_lo", [](C& c) -> double& { return c.law_x_lo; }),
      real("asymptotic.x_hi", [](C& c) -> double& { return c.law_x_hi; }),
      integer("asymptotic.n", [](C& c) -> int& { return c.law_n; }),
      real("asymptotic.tube", [](C& c) -> double& { return c.law_tube; }),
      real("chaos.classical.m", [](C& c) -> double& { return c.chaos_classical.m; }),
      real("chaos.classical.v2", [](C& c) -> double& { return c.chaos_classical.v2; }),
      real("chaos.classical.v22", [](C& c) -> double& { return c.chaos_classical.v22; }),
      real("chaos.classical.v4", [](C& c) -> double& { return c.chaos_classical.v4; }),
      real("chaos.quantum.m", [](C& c) -> double& { return c.chaos_quantum.m; }),
      real("chaos.quantum.v2", [](C& c) -> double& { return c.chaos_quantum.v2; }),
      real("chaos.quantum.v22", [](C& c) -> double& { return c.chaos_quantum.v22; }),
      real("chaos.quantum.v4", [](C& c) -> double& { return c.chaos_quantum.v4; }),
      real_list("chaos.energies", [](C& c) -> std::vector<double>& { return c.energies; }),
      integer("chaos.n_ic", [](C& c) -> int& { return c.n_ic; }),
      real("chaos.t_end", [](C& c) -> double& { return c.t_end; }),
      real("chaos.dt", [](C& c) -> double& { return c.dt; }),
      real("chaos.threshold", [](C& c) -> double& { return c.threshold; }),
      integer("chaos.section_orbits", [](C& c) -> int& { return c.section_orbits; }),
      integer("chaos.section_crossings", [](C& c) -> int& { return c.section_crossings; }),
  };
  return f;
}

void flatten(const nlohmann::json& j, const std::string& prefix, std::map<std::string, std::string>& out) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it) flatten(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), out);
    return;
  }
  auto scalar = [&](const nlohmann::json& v) -> std::string {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_null()) return "";
    if (v.is_structured()) throw ConfigError(prefix, "nested lists are not supported");
    return v.dump();
  };
  if (j.is_array()) {
    std::string s;
    for (const auto& v : j) s += (s.empty() ? "" : ",") + scalar(v);
    out[prefix] = s;
  } else {
    out[prefix] = scalar(j);
  }
}

void require(bool ok, const std::string& key, const std::string& what) {
  if (!ok) throw ConfigError(key, what);
}

void require_positive_points(const std::vector<double>& v, const std::string& key) {
  require(!v.empty(), key, "must not be empty");
  for (double x : v) require(x > 0.0, key, "points must be > 0");
}

void require_positive_list(const std::vector<double>& v, const std::string& key) {
  require(!v.empty(), key, "must not be empty");
  for (double x : v) require(x > 0.0, key, "values must be > 0");
}

}  // namespace

std::string to_string(Experiment e) {
  for (const auto& [k, n] : kNames)
    if (k == e) return n;
  return "?";
}

Experiment experiment_from_string(const std::string& s) {
  for (const auto& [k, n] : kNames)
    if (n == s) return k;
  std::string known;
  for (const auto& [k, n] : kNames) known += (known.empty() ? "" : ", ") + n;
  throw ConfigError("experiment", "unknown experiment '" + s + "' (known: " + known + ")");
}

const std::vector<Experiment>& all_experiments() {
  static const std::vector<Experiment> v = [] {
    std::vector<Experiment> out;
    for (const auto& kn : kNames) out.push_back(kn.first);
    return out;
  }();
  return v;
}

std::map<std::string, std::string> parse_config_text(const std::string& text) {
  std::map<std::string, std::string> out;
  const std::string t = trim(text);
  if (!t.empty() && t.front() == '{') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(t);
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError("config", std::string("invalid JSON: ") + e.what());
    }
    flatten(j, "", out);
    return out;
  }
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config", "line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError("config", "line " + std::to_string(lineno) + ": empty key");
    if (out.count(key)) throw ConfigError(key, "given twice");
    out[key] = trim(line.substr(eq + 1));
  }
  return out;
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("config", "cannot open '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config_text(ss.str());
}

void apply_config(ExperimentConfig& cfg, const std::map<std::string, std::string>& kv) {
  for (const auto& [k, v] : kv) {
    bool found = false;
    for (const auto& f : fields()) {
      if (f.key == k) {
        f.set(cfg, v);
        found = true;
        break;
      }
    }
    if (!found) throw ConfigError(k, "unknown key");
  }
}

std::map<std::string, std::string> config_to_map(const ExperimentConfig& cfg) {
  std::map<std::string, std::string> out;
  for (const auto& f : fields()) out[f.key] = f.get(cfg);
  return out;
}

void validate_config(const ExperimentConfig& cfg) {
  require(!cfg.output_dir.empty(), "output_dir", "must not be empty");
  require(cfg.jobs >= 0, "jobs", "must be >= 0");
  require(cfg.c.hbar > 0.0, "hbar", "must be > 0");

  auto check1d = [&] {
    require(cfg.classical.m > 0.0, "classical.m", "must be > 0");
    require(cfg.classical.v2 > 0.0, "classical.v2", "must be > 0");
    require(cfg.classical.vm2 >= 0.0, "classical.vm2", "must be >= 0");
  };
  auto check_set = [&] {
    require_positive_points(cfg.initial_points, "fit.initial_points");
    require_positive_points(cfg.final_points, "fit.final_points");
  };

  switch (cfg.experiment) {
    case Experiment::fig1_potential_wave:
      check1d();
      require(cfg.classical.vm2 > 0.0, "classical.vm2", "must be > 0 for the inverse-square ground state");
      require(cfg.x_max > 0.0, "fig1.x_max", "must be > 0");
      require(cfg.n_x >= 2, "fig1.n", "must be >= 2");
      break;
    case Experiment::fig2_fit_vs_T:
      check1d();
      check_set();
      require_positive_list(cfg.fit_T_grid, "fit.T_grid");
      require(cfg.n_starts >= 0, "fit.n_starts", "must be >= 0");
      require(cfg.jitter >= 0.0, "fit.jitter", "must be >= 0");
      require(cfg.band_m_v2_lo <= cfg.band_m_v2_hi, "fit.band.m_v2_lo", "must not exceed fit.band.m_v2_hi");
      require(cfg.band_m_vm2_lo <= cfg.band_m_vm2_hi, "fit.band.m_vm2_lo", "must not exceed fit.band.m_vm2_hi");
      break;
    case Experiment::boundary_study:
      check1d();
      require(cfg.scenario == "all" || cfg.scenario == "vary-final" || cfg.scenario == "vary-initial" ||
                  cfg.scenario == "balanced",
              "boundary.scenario", "must be one of all, vary-final, vary-initial, balanced");
      require_positive_list(cfg.boundary_T_grid, "boundary.T_grid");
      require(cfg.n_starts >= 0, "fit.n_starts", "must be >= 0");
      require(cfg.balanced_residual_max > 0.0, "boundary.balanced_residual_max", "must be > 0");
      break;
    case Experiment::resolution_study:
      check1d();
      check_set();
      require(cfg.mesh_grid.size() >= 2, "resolution.mesh_grid", "needs at least two densities");
      for (std::size_t i = 1; i < cfg.mesh_grid.size(); ++i)
        require(cfg.mesh_grid[i] > cfg.mesh_grid[i - 1], "resolution.mesh_grid", "must be increasing");
      require_positive_list(cfg.resolution_T_grid, "resolution.T_grid");
      require(cfg.stability_tol > 0.0, "resolution.stability_tol", "must be > 0");
      require(cfg.resolution_factor > 0.0, "resolution.factor", "must be > 0");
      break;
    case Experiment::asymptotic_check:
      check1d();
      check_set();
      require(cfg.classical.vm2 > 0.0, "classical.vm2", "must be > 0");
      require(cfg.asym_T > 0.0, "asymptotic.T", "must be > 0");
      require(cfg.law_x_lo > 0.0, "asymptotic.x_lo", "must be > 0");
      require(cfg.law_x_hi > cfg.law_x_lo, "asymptotic.x_hi", "must exceed asymptotic.x_lo");
      require(cfg.law_n >= 2, "asymptotic.n", "must be >= 2");
      require(cfg.law_tube > 0.0, "asymptotic.tube", "must be > 0");
      break;
    case Experiment::fig3_chaos_scan:
      for (const auto& [p, name] : {std::pair{cfg.chaos_classical, std::string("chaos.classical")},
                                    std::pair{cfg.chaos_quantum, std::string("chaos.quantum")}}) {
        require(p.m > 0.0, name + ".m", "must be > 0");
        require(p.v2 > 0.0, name + ".v2", "must be > 0");
        require(p.v22 >= 0.0, name + ".v22", "must be >= 0");
        require(p.v4 >= 0.0, name + ".v4", "must be >= 0");
      }
      require_positive_list(cfg.energies, "chaos.energies");
      require(cfg.n_ic > 0, "chaos.n_ic", "must be > 0");
      require(cfg.t_end > 0.0, "chaos.t_end", "must be > 0");
      require(cfg.dt >= 0.0, "chaos.dt", "must be >= 0 (0 selects the step automatically)");
      require(cfg.section_orbits >= 0, "chaos.section_orbits", "must be >= 0");
      require(cfg.section_crossings > 0, "chaos.section_crossings", "must be > 0");
      break;
  }
}

}  // namespace qaction
