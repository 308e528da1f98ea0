#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "qaction/model.hpp"

namespace qaction {

struct PhaseState2D {
  double x = 0.0, y = 0.0, px = 0.0, py = 0.0;
};

/// Raised when an orbit's relative energy error exceeds the requested bound.
class EnergyDriftError : public ConvergenceError {
public:
  using ConvergenceError::ConvergenceError;
};

double hamiltonian_2d(const ActionParams2D& p, const PhaseState2D& s);

/// One step of size h of the 4th-order Yoshida composition of leapfrog.
/// Symplectic and time-symmetric.
void yoshida_step(const ActionParams2D& p, PhaseState2D& s, double h);

/// 2 pi / w_max, with w_max the largest normal-mode frequency reachable on
/// the energy surface H = E; the default step is 1e-3 of it.
double characteristic_period(const ActionParams2D& p, double E);

struct Orbit {
  std::vector<double> times;
  std::vector<PhaseState2D> states;
  double max_rel_energy_error = 0.0;
};

/// Fixed-step orbit on [0, t_end], recording every `record_every` steps (and
/// the final state). Throws EnergyDriftError if |H - H0| > drift_tol |H0|.
Orbit integrate_orbit(const ActionParams2D& p, const PhaseState2D& s0, double t_end, double dt,
                      int record_every = 1, double drift_tol = 1e-8);

/// Successive (x, px) where the orbit crosses y = 0 with py > 0, the crossing
/// time bisected to 1e-10. Throws ConvergenceError after max_steps steps.
std::vector<std::pair<double, double>> poincare_section(const ActionParams2D& p, const PhaseState2D& s0,
                                                        int n_crossings, double dt, long max_steps = 50'000'000);

struct LyapunovEstimate {
  double lambda = 0.0;       // at t_end
  double lambda_half = 0.0;  // same run, at t_end / 2
  double max_rel_energy_error = 0.0;
};

/// Largest Lyapunov exponent by the tangent map of the same integrator
/// (exact Hessian), renormalized every renorm_interval.
LyapunovEstimate lyapunov_max(const ActionParams2D& p, const PhaseState2D& s0, double t_end, double dt,
                              double renorm_interval = 1.0, double drift_tol = 1e-8);

struct ChaosOptions {
  double t_end = 2000.0;
  double dt = 0.0;  // 0: 1e-3 characteristic periods
  double renorm_interval = 1.0;
  double drift_tol = 1e-8;
  double threshold = -1.0;  // < 0: calibrate against the integrable limit
  int jobs = 0;
};

/// n initial states on y = 0, py > 0 with H = E; (x, px) uniform over the
/// allowed region. Deterministic in (seed, index).
std::vector<PhaseState2D> sample_section_states(const ActionParams2D& p, double E, int n, std::uint64_t seed);

struct ThresholdCalibration {
  double lambda_baseline = 0.0;  // 95th percentile in the integrable limit
  double threshold = 0.0;
  double baseline_max = 0.0;
  // fraction of the integrable-limit states classified chaotic (0 when calibrated)
  double R_integrable = 0.0;
};

/// threshold = max(5 lambda_baseline, 3 / t_end, 3 ln(t_end) / t_end); the last
/// term sits above the ln(t)/t decay of regular (sheared) orbits.
/// The integrable limit drops the x^2 y^2 coupling (the separable quartic
/// term, if any, is kept).
ActionParams2D integrable_limit(const ActionParams2D& p);

ThresholdCalibration calibrate_threshold(const ActionParams2D& p, double E, int n_ic, std::uint64_t seed,
                                         const ChaosOptions& opt = {});

struct ChaosSample {
  PhaseState2D state;
  double lambda = 0.0;
  double lambda_half = 0.0;
  bool chaotic = false;
};

struct ChaosScan {
  double E = 0.0;
  int n_total = 0;
  int n_chaotic = 0;
  double R = 0.0;
  double R_half = 0.0;   // same classification using the t_end / 2 estimates
  double sigma = 0.0;    // binomial standard error of R
  std::vector<ChaosSample> per_ic;
  ActionParams2D params;
  std::uint64_t seed = 0;
  double threshold = 0.0;
  double lambda_baseline = 0.0;
  double R_integrable = -1.0;  // -1 when the threshold was given, not calibrated
  double dt = 0.0;
  double t_end = 0.0;
  double max_rel_energy_error = 0.0;
};

ChaosScan chaotic_fraction(const ActionParams2D& p, double E, int n_ic, std::uint64_t seed,
                           const ChaosOptions& opt = {});

}  // namespace qaction
