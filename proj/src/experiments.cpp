#include "qaction/experiments.hpp"

#include <gsl/gsl_version.h>
#include <openssl/evp.h>
#include <openssl/opensslv.h>

#include <Eigen/Core>
#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <boost/version.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>

#include "qaction/asymptotics.hpp"
#include "qaction/chaos2d.hpp"
#include "qaction/csv.hpp"
#include "qaction/fitter.hpp"
#include "qaction/parallel.hpp"
#include "qaction/propagator.hpp"

namespace qaction {

namespace {

constexpr const char* kVersion = "1.0.0";

using Json = nlohmann::json;
using Files = std::vector<std::pair<std::string, std::string>>;  // name, content

std::string num(double v) { return csv_number(v); }
std::string num(int v) { return std::to_string(v); }
std::string flag(bool b) { return b ? "1" : "0"; }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

int resolved_jobs(const ExperimentConfig& cfg) { return cfg.jobs > 0 ? cfg.jobs : default_jobs(); }

FitOptions fit_options(const ExperimentConfig& cfg) {
  FitOptions o;
  o.n_starts = cfg.n_starts;
  o.jitter = cfg.jitter;
  o.seed = cfg.seed;
  o.jobs = resolved_jobs(cfg);
  o.c = cfg.c;
  return o;
}

struct Output {
  Files files;
  std::vector<Check> checks;
  int failed_cells = 0;
  Json summary = Json::object();
  std::vector<std::string> notes;
};

// ---------------------------------------------------------------- fig1

void run_fig1(const ExperimentConfig& cfg, Output& out) {
  const SpectralData sd = ground_state(cfg.classical, cfg.c);
  const AsymptoticPrediction pred = asymptotic_parameters(cfg.classical, cfg.c);
  const ActionParams1D quantum = asymptotic_action(pred, cfg.classical.m);
  const ReconstructedWavefunction rec(quantum, cfg.c);

  CsvTable t({"x", "V", "V_quantum", "psi_exact", "psi_reconstructed"});
  for (int k = 1; k <= cfg.n_x; ++k) {
    const double x = cfg.x_max * k / cfg.n_x;
    t.row({num(x), num(potential_1d(cfg.classical, x)), num(potential_1d(quantum, x)),
           num(wavefunction(sd, cfg.classical, x, cfg.c)), num(rec(x))});
  }
  out.files.push_back({"fig1_potential_wave.csv", t.str()});

  // exact amplitudes G(x, T; y, 0) on the same x grid
  CsvTable g({"x", "y", "T", "G", "log_G"});
  for (double y : {0.5, 1.0, 2.0, 3.0})
    for (double T : {0.25, 0.5, 1.0, 2.0, 4.0})
      for (int k = 1; k <= cfg.n_x; ++k) {
        const PropagatorSample ps = euclidean_green(cfg.classical, cfg.x_max * k / cfg.n_x, y, T, cfg.c);
        g.row({num(ps.x), num(y), num(T), num(ps.value), num(ps.log_value)});
      }
  out.files.push_back({"fig1_propagator.csv", g.str()});
  out.files.push_back({"fig1_potential_wave.gp",
                       "# gnuplot -p fig1_potential_wave.gp\n"
                       "set datafile separator ','\nset key top right\nset xlabel 'x'\nset yrange [0:6]\n"
                       "plot 'fig1_potential_wave.csv' every ::1 using 1:2 with lines title 'V', \\\n"
                       "     '' every ::1 using 1:3 with lines dt 2 title 'quantum V', \\\n"
                       "     '' every ::1 using 1:4 with lines title 'psi exact', \\\n"
                       "     '' every ::1 using 1:5 with points pt 7 ps 0.3 title 'psi reconstructed'\n"});

  // sup-norm on [0.5, Lambda_sc] on a fine grid, relative to max psi
  double dev = 0.0, peak_val = 0.0;
  for (int k = 0; k <= 2000; ++k) {
    const double x = 0.5 + (sd.Lambda_sc - 0.5) * k / 2000.0;
    const double e = wavefunction(sd, cfg.classical, x, cfg.c);
    dev = std::max(dev, std::fabs(rec(x) - e));
    peak_val = std::max(peak_val, e);
  }
  dev /= peak_val;
  const auto peak = boost::math::tools::brent_find_minima([&](double x) { return -rec(x); }, 0.3 * rec.x_min(),
                                                          3.0 * rec.x_min(), 40);
  const double exact_peak = std::sqrt((0.5 + sd.gamma) * cfg.c.hbar / (cfg.classical.m * cfg.classical.omega()));
  out.checks.push_back({"reconstructed psi within 1% sup-norm on [0.5, Lambda_sc]", dev <= 0.01,
                        "relative sup deviation " + fmt("%.3e", dev)});
  out.checks.push_back({"reconstructed psi peak at the exact peak +- 1e-3", std::fabs(peak.first - exact_peak) <= 1e-3,
                        "peak " + fmt("%.9f", peak.first) + ", exact " + fmt("%.9f", exact_peak)});
  out.summary = {{"E_gr", sd.E_gr},       {"gamma", sd.gamma},           {"T_sc", sd.T_sc},
                 {"Lambda_sc", sd.Lambda_sc}, {"m_v2_quantum", pred.m_v2}, {"m_vm2_quantum", pred.m_vm2},
                 {"psi_sup_deviation", dev},  {"psi_peak", peak.first}};
}

// ---------------------------------------------------------------- fig2

void run_fig2(const ExperimentConfig& cfg, Output& out) {
  const SpectralData sd = ground_state(cfg.classical, cfg.c);
  const FitOptions opt = fit_options(cfg);
  CsvTable t({"T", "m_v2", "m_vm2", "residual_max_rel", "m", "v2", "vm2", "log_Z", "residual_rms", "spread_m_v2",
              "spread_m_vm2", "converged", "rank_deficient", "ok", "error"});
  Json rows = Json::array();
  for (double T : cfg.fit_T_grid) {
    FitResult f;
    std::string err;
    try {
      f = fit_quantum_action(cfg.classical, {cfg.initial_points, cfg.final_points, T}, opt);
    } catch (const std::exception& e) {
      err = e.what();
      ++out.failed_cells;
    }
    const bool ok = err.empty();
    t.row({num(T), ok ? num(f.m_v2) : "", ok ? num(f.m_vm2) : "", ok ? num(f.residual_max_rel) : "",
           ok ? num(f.params.m) : "", ok ? num(f.params.v2) : "", ok ? num(f.params.vm2) : "", ok ? num(f.log_Z) : "",
           ok ? num(f.residual_rms) : "", ok ? num(f.spread_m_v2) : "", ok ? num(f.spread_m_vm2) : "",
           flag(ok && f.converged), flag(ok && f.rank_deficient), flag(ok), err});
    rows.push_back({{"T", T}, {"ok", ok}, {"m_v2", f.m_v2}, {"m_vm2", f.m_vm2}, {"residual_max_rel", f.residual_max_rel}});
    if (T >= 5.0 * sd.T_sc - 1e-12) {
      const bool in = ok && f.m_v2 >= cfg.band_m_v2_lo && f.m_v2 <= cfg.band_m_v2_hi && f.m_vm2 >= cfg.band_m_vm2_lo &&
                      f.m_vm2 <= cfg.band_m_vm2_hi;
      out.checks.push_back({"products in band at T=" + num(T), in,
                            ok ? "m v2 = " + fmt("%.6f", f.m_v2) + ", m vm2 = " + fmt("%.6f", f.m_vm2) : err});
    }
  }
  out.files.push_back({"fig2_fit_vs_T.csv", t.str()});
  out.files.push_back({"fig2_fit_vs_T.gp",
                       "# gnuplot -p fig2_fit_vs_T.gp\n"
                       "set datafile separator ','\nset xlabel 'T'\nset key bottom right\n"
                       "plot 'fig2_fit_vs_T.csv' every ::1 using 1:2 with linespoints title 'm v2', \\\n"
                       "     '' every ::1 using 1:3 with linespoints title 'm vm2'\n"});
  const AsymptoticPrediction pred = asymptotic_parameters(cfg.classical, cfg.c);
  out.summary = {{"rows", rows}, {"T_sc", sd.T_sc}, {"predicted_m_v2", pred.m_v2}, {"predicted_m_vm2", pred.m_vm2}};
}

// ---------------------------------------------------------------- boundary study

void run_boundary(const ExperimentConfig& cfg, Output& out) {
  std::vector<BoundaryScenario> scenarios;
  if (cfg.scenario == "all" || cfg.scenario == "vary-final") scenarios.push_back(BoundaryScenario::vary_final);
  if (cfg.scenario == "all" || cfg.scenario == "vary-initial") scenarios.push_back(BoundaryScenario::vary_initial);
  if (cfg.scenario == "all" || cfg.scenario == "balanced") scenarios.push_back(BoundaryScenario::balanced);

  const SpectralData sd = ground_state(cfg.classical, cfg.c);
  const FitOptions opt = fit_options(cfg);
  CsvTable t({"scenario", "set", "T", "small_T_regime", "ok", "m_v2", "m_vm2", "m", "v2", "vm2", "log_Z",
              "residual_max_rel", "residual_rms", "rank_deficient", "error"});
  CsvTable spread({"scenario", "T", "small_T_regime", "n_sets", "spread_m_v2", "spread_m_vm2"});
  Json js = Json::array();
  for (BoundaryScenario sc : scenarios) {
    const auto rows = boundary_dependence_study(cfg.classical, sc, cfg.boundary_T_grid, opt);
    std::map<double, std::pair<std::vector<double>, std::vector<double>>> by_T;
    for (const auto& r : rows) {
      const FitResult& f = r.fit;
      t.row({to_string(sc), r.label, num(r.T), flag(r.small_T_regime), flag(r.ok), r.ok ? num(f.m_v2) : "",
             r.ok ? num(f.m_vm2) : "", r.ok ? num(f.params.m) : "", r.ok ? num(f.params.v2) : "",
             r.ok ? num(f.params.vm2) : "", r.ok ? num(f.log_Z) : "", r.ok ? num(f.residual_max_rel) : "",
             r.ok ? num(f.residual_rms) : "", flag(r.ok && f.rank_deficient), r.error});
      if (!r.ok) {
        ++out.failed_cells;
        continue;
      }
      by_T[r.T].first.push_back(f.m_v2);
      by_T[r.T].second.push_back(f.m_vm2);
      js.push_back({{"scenario", to_string(sc)}, {"set", r.label}, {"T", r.T}, {"residual_max_rel", f.residual_max_rel},
                    {"m_v2", f.m_v2}, {"m_vm2", f.m_vm2}});
      if (sc == BoundaryScenario::balanced && r.T >= 1.0 && r.T <= 2.0) {
        out.checks.push_back({"balanced residual_max_rel <= " + num(cfg.balanced_residual_max) + " at T=" + num(r.T),
                              f.residual_max_rel <= cfg.balanced_residual_max,
                              "residual_max_rel = " + fmt("%.3e", f.residual_max_rel)});
      }
    }
    if (sc == BoundaryScenario::balanced) continue;
    double worst_large = 0.0, least_small = HUGE_VAL;
    bool have_large = false, have_small = false;
    for (const auto& [T, v] : by_T) {
      const auto [a0, a1] = std::minmax_element(v.first.begin(), v.first.end());
      const auto [b0, b1] = std::minmax_element(v.second.begin(), v.second.end());
      const double s2 = *a1 - *a0, sm2 = *b1 - *b0;
      const bool small = T < 5.0 * sd.T_sc;
      spread.row({to_string(sc), num(T), flag(small), num(static_cast<int>(v.first.size())), num(s2), num(sm2)});
      if (small) {
        least_small = std::min(least_small, sm2);
        have_small = true;
      } else {
        worst_large = std::max(worst_large, sm2);
        have_large = true;
      }
    }
    if (have_small && have_large) {
      out.checks.push_back({to_string(sc) + ": set dependence weaker for T >= 5 T_sc than below", worst_large < least_small,
                            "max spread(m vm2) above " + fmt("%.3e", worst_large) + ", min below " +
                                fmt("%.3e", least_small)});
    }
  }
  out.files.push_back({"boundary_study.csv", t.str()});
  if (spread.rows() > 0) out.files.push_back({"boundary_spread.csv", spread.str()});
  out.files.push_back({"boundary_study.gp",
                       "# gnuplot -p boundary_study.gp\n"
                       "set datafile separator ','\nset xlabel 'T'\nset ylabel 'm vm2'\n"
                       "plot 'boundary_study.csv' every ::1 using 3:7 with points pt 7 title 'fits'\n"});
  out.summary = {{"rows", js}, {"T_sc", sd.T_sc}};
}

// ---------------------------------------------------------------- resolution study

void run_resolution(const ExperimentConfig& cfg, Output& out) {
  const ResolutionStudy st = resolution_study(cfg.classical, {cfg.initial_points, cfg.final_points, 1.0},
                                              cfg.mesh_grid, cfg.resolution_T_grid, fit_options(cfg),
                                              cfg.stability_tol);
  CsvTable cells({"T", "N_t", "ok", "m", "v2", "vm2", "m_v2", "m_vm2", "log_Z", "residual_max_rel",
                  "change_params", "change_products", "error"});
  for (const auto& c : st.cells) {
    const FitResult& f = c.fit;
    cells.row({num(c.T), num(c.mesh_density), flag(c.ok), c.ok ? num(f.params.m) : "", c.ok ? num(f.params.v2) : "",
               c.ok ? num(f.params.vm2) : "", c.ok ? num(f.m_v2) : "", c.ok ? num(f.m_vm2) : "",
               c.ok ? num(f.log_Z) : "", c.ok ? num(f.residual_max_rel) : "",
               c.change_params >= 0 ? num(c.change_params) : "", c.change >= 0 ? num(c.change) : "", c.error});
    if (!c.ok) ++out.failed_cells;
  }
  // 0 = not reached within the grid
  CsvTable sum({"T", "stable_N_t_params", "stable_N_t_products"});
  Json js = Json::array();
  for (const auto& s : st.summary) {
    sum.row({num(s.T), num(s.stable_mesh_density), num(s.stable_mesh_density_products)});
    js.push_back({{"T", s.T}, {"stable_N_t_params", s.stable_mesh_density},
                  {"stable_N_t_products", s.stable_mesh_density_products}});
  }
  out.files.push_back({"resolution_cells.csv", cells.str()});
  out.files.push_back({"resolution_summary.csv", sum.str()});
  out.files.push_back({"resolution_study.gp",
                       "# gnuplot -p resolution_study.gp\n"
                       "set datafile separator ','\nset logscale xy\nset xlabel 'N_t'\n"
                       "set ylabel 'relative change on doubling'\n"
                       "plot 'resolution_cells.csv' every ::1 using 2:11 with points pt 7 title 'parameters', \\\n"
                       "     '' every ::1 using 2:12 with points pt 6 title 'products'\n"});

  // A T whose parameters never settle inside the grid needs more than its
  // largest density: treat it as +infinity (a lower bound, not a value).
  const int grid_max = cfg.mesh_grid.back();
  auto need = [&](int n) { return n > 0 ? static_cast<double>(n) : HUGE_VAL; };
  auto show = [&](int n) { return n > 0 ? std::to_string(n) : "> " + std::to_string(grid_max); };
  std::string ladder;
  bool monotone = true;
  for (std::size_t i = 0; i < st.summary.size(); ++i) {
    ladder += (i ? ", " : "") + std::string("T=") + num(st.summary[i].T) + ": " + show(st.summary[i].stable_mesh_density);
    if (i > 0 && need(st.summary[i].stable_mesh_density) < need(st.summary[i - 1].stable_mesh_density)) monotone = false;
  }
  out.checks.push_back({"minimal stable N_t (parameters) nondecreasing in T", monotone, ladder});
  if (st.summary.size() >= 2) {
    const int lo = st.summary.front().stable_mesh_density, hi = st.summary.back().stable_mesh_density;
    const bool ok = lo > 0 && (hi > 0 ? hi >= cfg.resolution_factor * lo : grid_max >= cfg.resolution_factor * lo);
    out.checks.push_back({"N_t at T=" + num(st.summary.back().T) + " >= " + num(cfg.resolution_factor) + " x N_t at T=" +
                              num(st.summary.front().T),
                          ok, show(hi) + " vs " + show(lo)});
  }
  std::string prod;
  for (std::size_t i = 0; i < st.summary.size(); ++i)
    prod += (i ? ", " : "") + std::string("T=") + num(st.summary[i].T) + ": " +
            show(st.summary[i].stable_mesh_density_products);
  out.notes.push_back("stable N_t judged on the products only: " + prod);
  out.summary = {{"summary", js}, {"stability_tol", st.stability_tol}, {"grid_max", grid_max}};
}

// ---------------------------------------------------------------- asymptotic check

void run_asymptotic(const ExperimentConfig& cfg, Output& out) {
  const SpectralData sd = ground_state(cfg.classical, cfg.c);
  const AsymptoticPrediction pred = asymptotic_parameters(cfg.classical, cfg.c);
  const ActionParams1D predicted = asymptotic_action(pred, cfg.classical.m);
  FitResult f = fit_quantum_action(cfg.classical, {cfg.initial_points, cfg.final_points, cfg.asym_T}, fit_options(cfg));
  ActionParams1D fitted = f.params;
  // offset so that min V~ = E_gr, as for the prediction
  fitted.v0 = 0.0;
  fitted.v0 = sd.E_gr - potential_1d_min_value(fitted);

  std::vector<double> xs;
  for (int k = 0; k < cfg.law_n; ++k) {
    const double x = cfg.law_x_lo + (cfg.law_x_hi - cfg.law_x_lo) * k / (cfg.law_n - 1);
    if (std::fabs(x - pred.x_min_quantum) >= cfg.law_tube && std::fabs(x - potential_1d_min_location(fitted)) >= cfg.law_tube)
      xs.push_back(x);
  }
  const auto rp = transformation_law_residual(cfg.classical, predicted, sd.E_gr, xs, cfg.law_tube, cfg.c);
  const auto rf = transformation_law_residual(cfg.classical, fitted, sd.E_gr, xs, cfg.law_tube, cfg.c);
  const ReconstructedWavefunction wp(predicted, cfg.c), wf(fitted, cfg.c);
  CsvTable t({"x", "law_residual_predicted", "law_residual_fitted", "psi_exact", "psi_predicted", "psi_fitted"});
  double mp = 0.0, mf = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mp = std::max(mp, std::fabs(rp[i]));
    mf = std::max(mf, std::fabs(rf[i]));
    t.row({num(xs[i]), num(rp[i]), num(rf[i]), num(wavefunction(sd, cfg.classical, xs[i], cfg.c)), num(wp(xs[i])),
           num(wf(xs[i]))});
  }
  CsvTable s({"quantity", "predicted", "fitted", "relative_difference"});
  auto rel = [](double a, double b) { return std::fabs(a - b) / std::fabs(a); };
  s.row({"m_v2", num(pred.m_v2), num(f.m_v2), num(rel(pred.m_v2, f.m_v2))});
  s.row({"m_vm2", num(pred.m_vm2), num(f.m_vm2), num(rel(pred.m_vm2, f.m_vm2))});
  s.row({"x_min_quantum", num(pred.x_min_quantum), num(potential_1d_min_location(fitted)),
         num(rel(pred.x_min_quantum, potential_1d_min_location(fitted)))});
  s.row({"E_gr", num(sd.E_gr), "", ""});
  s.row({"T_sc", num(sd.T_sc), "", ""});
  s.row({"Lambda_sc", num(sd.Lambda_sc), "", ""});
  out.files.push_back({"asymptotic_law.csv", t.str()});
  out.files.push_back({"asymptotic_summary.csv", s.str()});
  out.files.push_back({"asymptotic_law.gp",
                       "# gnuplot -p asymptotic_law.gp\n"
                       "set datafile separator ','\nset xlabel 'x'\nset ylabel 'transformation-law residual'\n"
                       "plot 'asymptotic_law.csv' every ::1 using 1:2 with lines title 'predicted', \\\n"
                       "     '' every ::1 using 1:3 with lines title 'fitted'\n"});

  const double E_closed = cfg.c.hbar * cfg.classical.omega() * (1.0 + sd.gamma);
  out.checks.push_back({"E_gr equals hbar w (1 + gamma)", sd.E_gr == E_closed, "E_gr = " + fmt("%.15g", sd.E_gr)});
  out.checks.push_back({"transformation law holds for the predicted action", mp < 1e-8,
                        "max |residual| = " + fmt("%.3e", mp)});
  out.checks.push_back({"fitted products agree with the prediction to 1e-3 at T=" + num(cfg.asym_T),
                        rel(pred.m_v2, f.m_v2) < 1e-3 && rel(pred.m_vm2, f.m_vm2) < 1e-3,
                        "m v2 " + fmt("%.6f", f.m_v2) + " vs " + fmt("%.6f", pred.m_v2) + ", m vm2 " +
                            fmt("%.6f", f.m_vm2) + " vs " + fmt("%.6f", pred.m_vm2)});
  out.summary = {{"E_gr", sd.E_gr},
                 {"T_sc", sd.T_sc},
                 {"Lambda_sc", sd.Lambda_sc},
                 {"gamma", sd.gamma},
                 {"predicted", {{"m_v2", pred.m_v2}, {"m_vm2", pred.m_vm2}}},
                 {"fitted", {{"m", f.params.m}, {"m_v2", f.m_v2}, {"m_vm2", f.m_vm2}}},
                 {"law_residual_predicted_max", mp},
                 {"law_residual_fitted_max", mf}};
  out.notes.push_back("products fix only m~ v2~ and m~ vm2~; the prediction uses the split m~ = m");
}

// ---------------------------------------------------------------- fig3

void run_fig3(const ExperimentConfig& cfg, Output& out) {
  ChaosOptions opt;
  opt.t_end = cfg.t_end;
  opt.dt = cfg.dt;
  opt.threshold = cfg.threshold;
  opt.jobs = resolved_jobs(cfg);

  CsvTable rt({"set", "E", "n_ic", "n_chaotic", "R", "sigma", "R_minus_2sigma", "R_plus_2sigma", "R_half",
               "R_integrable", "threshold", "lambda_baseline", "dt", "t_end", "max_rel_energy_error", "m", "v2",
               "v22", "v4"});
  CsvTable lt({"set", "E", "index", "x", "px", "py", "lambda", "lambda_half", "chaotic"});
  CsvTable st({"set", "E", "orbit", "crossing", "x", "px"});
  Json js = Json::array();
  std::vector<ChaosScan> classical;

  for (const auto& [name, p] : {std::pair{std::string("classical"), cfg.chaos_classical},
                                std::pair{std::string("quantum"), cfg.chaos_quantum}}) {
    for (double E : cfg.energies) {
      ChaosScan s;
      try {
        s = chaotic_fraction(p, E, cfg.n_ic, cfg.seed, opt);
      } catch (const std::exception& e) {
        ++out.failed_cells;
        out.notes.push_back(name + " E=" + num(E) + ": " + e.what());
        continue;
      }
      double R_int = s.R_integrable;
      if (R_int < 0.0) {  // threshold was given: run the integrable limit explicitly
        ChaosOptions o = opt;
        R_int = chaotic_fraction(integrable_limit(p), E, cfg.n_ic, cfg.seed, o).R;
      }
      rt.row({name, num(E), num(s.n_total), num(s.n_chaotic), num(s.R), num(s.sigma),
              num(std::max(0.0, s.R - 2 * s.sigma)), num(std::min(1.0, s.R + 2 * s.sigma)), num(s.R_half), num(R_int),
              num(s.threshold), num(s.lambda_baseline), num(s.dt), num(s.t_end), num(s.max_rel_energy_error), num(p.m),
              num(p.v2), num(p.v22), num(p.v4)});
      for (std::size_t i = 0; i < s.per_ic.size(); ++i) {
        const auto& c = s.per_ic[i];
        lt.row({name, num(E), num(static_cast<int>(i)), num(c.state.x), num(c.state.px), num(c.state.py),
                num(c.lambda), num(c.lambda_half), flag(c.chaotic)});
      }
      const int n_orb = std::min<int>(cfg.section_orbits, static_cast<int>(s.per_ic.size()));
      const auto sections = parallel_map<std::vector<std::pair<double, double>>>(
          static_cast<std::size_t>(n_orb),
          [&](std::size_t i) { return poincare_section(p, s.per_ic[i].state, cfg.section_crossings, s.dt); },
          opt.jobs);
      for (int o = 0; o < n_orb; ++o)
        for (std::size_t k = 0; k < sections[o].size(); ++k)
          st.row({name, num(E), num(o), num(static_cast<int>(k)), num(sections[o][k].first),
                  num(sections[o][k].second)});
      js.push_back({{"set", name}, {"E", E}, {"R", s.R}, {"sigma", s.sigma}, {"R_integrable", R_int},
                    {"threshold", s.threshold}, {"max_rel_energy_error", s.max_rel_energy_error}});
      if (name == "classical") {
        s.R_integrable = R_int;
        classical.push_back(s);
      }
    }
  }
  out.files.push_back({"fig3_R.csv", rt.str()});
  out.files.push_back({"fig3_lyapunov.csv", lt.str()});
  out.files.push_back({"fig3_sections.csv", st.str()});
  out.files.push_back({"fig3_chaos_scan.gp",
                       "# gnuplot -p fig3_chaos_scan.gp\n"
                       "set datafile separator ','\nset xlabel 'E'\nset ylabel 'R'\nset yrange [0:1.05]\n"
                       "plot 'fig3_R.csv' every ::1 using 2:($1 eq 'classical' ? $5 : 1/0):6 with yerrorlines title 'classical', \\\n"
                       "     '' every ::1 using 2:($1 eq 'quantum' ? $5 : 1/0):6 with yerrorlines title 'quantum'\n"});

  if (classical.size() == cfg.energies.size() && !classical.empty()) {
    std::vector<std::size_t> order(classical.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return classical[a].E < classical[b].E; });
    bool mono = true;
    std::string curve;
    for (std::size_t k = 0; k < order.size(); ++k) {
      const ChaosScan& s = classical[order[k]];
      curve += (k ? ", " : "") + num(s.E) + ":" + fmt("%.3f", s.R);
      if (k > 0) {
        const ChaosScan& r = classical[order[k - 1]];
        if (s.R < r.R - 2.0 * std::sqrt(s.sigma * s.sigma + r.sigma * r.sigma)) mono = false;
      }
    }
    const ChaosScan& lo = classical[order.front()];
    const ChaosScan& hi = classical[order.back()];
    bool integrable_zero = true;
    for (const auto& s : classical) integrable_zero = integrable_zero && s.R_integrable == 0.0;
    out.checks.push_back({"classical R(E) nondecreasing within 2 sigma", mono, curve});
    out.checks.push_back({"R(E_low) < 0.1", lo.R < 0.1, "R(" + num(lo.E) + ") = " + fmt("%.3f", lo.R)});
    out.checks.push_back({"R(E_high) > 0.5", hi.R > 0.5, "R(" + num(hi.E) + ") = " + fmt("%.3f", hi.R)});
    out.checks.push_back({"integrable limit gives R = 0 at every E", integrable_zero, ""});
  }
  out.summary = {{"scans", js}};
  out.notes.push_back("quantum mass m~ is not given by the source; chaos.quantum.m = " + num(cfg.chaos_quantum.m) +
                      " is assumed");
}

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int n = 0;
  if (EVP_Digest(data.data(), data.size(), md, &n, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 failed");
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < n; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", md[i]);
    hex += buf;
  }
  return hex;
}

bool RunReport::checks_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

int RunReport::exit_status() const {
  if (failed_cells > 0) return 3;
  return checks_pass() ? 0 : 1;
}

RunReport run_experiment(const ExperimentConfig& cfg) {
  validate_config(cfg);
  const std::string started = utc_now();
  const auto t0 = std::chrono::steady_clock::now();

  Output out;
  switch (cfg.experiment) {
    case Experiment::fig1_potential_wave: run_fig1(cfg, out); break;
    case Experiment::fig2_fit_vs_T: run_fig2(cfg, out); break;
    case Experiment::boundary_study: run_boundary(cfg, out); break;
    case Experiment::resolution_study: run_resolution(cfg, out); break;
    case Experiment::asymptotic_check: run_asymptotic(cfg, out); break;
    case Experiment::fig3_chaos_scan: run_fig3(cfg, out); break;
  }

  RunReport rep;
  rep.experiment = cfg.experiment;
  rep.output_dir = cfg.output_dir;
  rep.checks = out.checks;
  rep.failed_cells = out.failed_cells;
  rep.summary = out.summary;
  rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  namespace fs = std::filesystem;
  fs::create_directories(cfg.output_dir);
  Json files = Json::array();
  for (const auto& [name, content] : out.files) {
    std::ofstream f(fs::path(cfg.output_dir) / name, std::ios::binary);
    f << content;
    if (!f) throw std::runtime_error("cannot write " + (fs::path(cfg.output_dir) / name).string());
    files.push_back({{"name", name}, {"bytes", content.size()}, {"sha256", sha256_hex(content)}});
    rep.files.push_back(name);
  }
  Json checks = Json::array();
  for (const auto& c : out.checks) checks.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
  Json config = Json::object();
  for (const auto& [k, v] : config_to_map(cfg)) config[k] = v;

  const Json manifest = {
      {"experiment", to_string(cfg.experiment)},
      {"version", kVersion},
      {"libraries",
       {{"gsl", GSL_VERSION},
        {"boost", BOOST_LIB_VERSION},
        {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                      std::to_string(EIGEN_MINOR_VERSION)},
        {"openssl", OPENSSL_VERSION_TEXT},
        {"compiler", __VERSION__}}},
      {"seed", cfg.seed},
      {"jobs", resolved_jobs(cfg)},
      {"config", config},
      {"started_utc", started},
      {"wall_time_s", rep.wall_time},
      {"checks", checks},
      {"all_checks_pass", rep.checks_pass()},
      {"failed_cells", rep.failed_cells},
      {"exit_status", rep.exit_status()},
      {"summary", out.summary},
      {"notes", out.notes},
      {"files", files},
  };
  std::ofstream mf(fs::path(cfg.output_dir) / "manifest.json", std::ios::binary);
  mf << manifest.dump(2) << "\n";
  if (!mf) throw std::runtime_error("cannot write manifest.json");
  rep.files.push_back("manifest.json");
  return rep;
}

}  // namespace qaction
