#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qaction/model.hpp"
#include "qaction/trajectory.hpp"

namespace qaction {

/// One target amplitude for the fit: ln G(x, T; y, 0).
struct LogAmplitude {
  double x = 0.0, y = 0.0, T = 0.0;
  double log_value = 0.0;
};

struct FitOptions {
  SolverMethod method = SolverMethod::quadrature;
  int mesh_density = 0;  // relaxation only
  // Fix vm2 = 0 and fit only (m, v2); chosen automatically for harmonic input.
  bool harmonic = false;
  int n_starts = 5;        // jittered restarts besides the plain start
  double jitter = 0.15;    // std-dev of the restart jitter in log coordinates
  std::uint64_t seed = 20240607;
  bool warm_start = true;  // coordinate descent before the simplex
  int simplex_max_iter = 3000;
  double simplex_size_tol = 1e-5;  // the least-squares polish takes it from there
  int polish_max_iter = 60;
  int jobs = 1;
  std::optional<ActionParams1D> initial;  // defaults to the classical action
  QuadratureSolverOptions quad;
  RelaxationOptions relax;
  PhysConst c;
};

struct FitResult {
  ActionParams1D params;  // quantum action in the v0 = 0 gauge
  double log_Z = 0.0;
  double m_v2 = 0.0, m_vm2 = 0.0;
  double residual_max_rel = 0.0;  // max |G_fit - G| / G
  double residual_rms = 0.0;      // rms of (G_fit - G) / G
  double objective = 0.0;         // sum of squared log residuals
  double gradient_norm = 0.0;     // finite-difference check at the optimum
  int n_samples = 0;
  double T = 0.0;
  bool converged = false;
  bool rank_deficient = false;
  double spread_m_v2 = 0.0, spread_m_vm2 = 0.0;  // max-min over restarts
  int evaluations = 0;
  std::vector<std::string> warnings;
};

/// ln Z - Sigma(q; x, y, T) / hbar.
double predict_log_green(const ActionParams1D& q, double log_Z, double x, double y, double T,
                         const PhysConst& c = {});

/// Same, with the action taken from the mesh solver at the given density.
double predict_log_green_relaxation(const ActionParams1D& q, double log_Z, double x, double y, double T,
                                    int mesh_density, const PhysConst& c = {});

/// Exact ln G for every (x_i, x_f) pair. Harmonic input (vm2 = 0) uses the
/// full-line oscillator kernel.
std::vector<LogAmplitude> exact_amplitudes(const ActionParams1D& classical, const BoundarySet& bset,
                                           const PhysConst& c = {});

/// Least-squares fit of ln Z - Sigma/hbar to the given log amplitudes (all at
/// one T). ln Z is profiled out exactly; v0 is fixed to 0.
FitResult fit_log_amplitudes(const std::vector<LogAmplitude>& data, const ActionParams1D& initial,
                             const FitOptions& opt = {});

/// fit_log_amplitudes on the exact amplitudes of the classical action.
FitResult fit_quantum_action(const ActionParams1D& classical, const BoundarySet& bset, const FitOptions& opt = {});

enum class BoundaryScenario { vary_final, vary_initial, balanced };
std::string to_string(BoundaryScenario s);

struct BoundaryStudyRow {
  BoundaryScenario scenario;
  std::string label;  // which point set within the scenario
  double T = 0.0;
  bool small_T_regime = false;  // T < 5 T_sc, where set dependence is expected
  bool ok = true;
  std::string error;
  FitResult fit;
};

/// Default point sets for each scenario (label, set without T).
std::vector<std::pair<std::string, BoundarySet>> boundary_scenario_sets(BoundaryScenario s);

std::vector<BoundaryStudyRow> boundary_dependence_study(const ActionParams1D& classical, BoundaryScenario scenario,
                                                        const std::vector<double>& T_grid,
                                                        const FitOptions& opt = {});

struct ResolutionCell {
  double T = 0.0;
  int mesh_density = 0;
  bool ok = true;
  std::string error;
  FitResult fit;
  // Max relative change against the next density in the grid, -1 if n/a:
  // of the products (m v2, m vm2), and of the raw parameters (m, v2, vm2).
  double change = -1.0;
  double change_params = -1.0;
};

struct ResolutionSummary {
  double T = 0.0;
  // Smallest density from which every further doubling in the grid stays
  // below the tolerance; 0 when none does.
  int stable_mesh_density = 0;         // judged on the raw parameters
  int stable_mesh_density_products = 0;
};

struct ResolutionStudy {
  std::vector<ResolutionCell> cells;
  std::vector<ResolutionSummary> summary;
  double stability_tol = 1e-3;
};

/// Fits with the mesh solver over a (T, N_t) grid. Each cell starts from the
/// quadrature fit at that T. The stable density at a T is the smallest N_t in
/// the grid whose parameters change by less than stability_tol (relative) when
/// the density is doubled, and keep doing so for all larger densities.
ResolutionStudy resolution_study(const ActionParams1D& classical, const BoundarySet& bset,
                                 const std::vector<int>& mesh_grid, const std::vector<double>& T_grid,
                                 const FitOptions& opt = {}, double stability_tol = 1e-3);

}  // namespace qaction
