#include "qaction/chaos2d.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "qaction/parallel.hpp"

namespace qaction {

namespace {

// Yoshida (1990) triple-jump coefficients.
const double kCbrt2 = std::cbrt(2.0);
const double kW1 = 1.0 / (2.0 - kCbrt2);
const double kW0 = -kCbrt2 / (2.0 - kCbrt2);
const double kDrift[4] = {0.5 * kW1, 0.5 * (kW0 + kW1), 0.5 * (kW0 + kW1), 0.5 * kW1};
const double kKick[3] = {kW1, kW0, kW1};

struct Force {
  double fx, fy;
};

Force force(const ActionParams2D& p, double x, double y) {
  return {-(2.0 * p.v2 * x + 2.0 * p.v22 * x * y * y + 4.0 * p.v4 * x * x * x),
          -(2.0 * p.v2 * y + 2.0 * p.v22 * x * x * y + 4.0 * p.v4 * y * y * y)};
}

struct Tangent {
  double dx, dy, dpx, dpy;
  double norm() const { return std::sqrt(dx * dx + dy * dy + dpx * dpx + dpy * dpy); }
  void scale(double s) {
    dx *= s;
    dy *= s;
    dpx *= s;
    dpy *= s;
  }
};

// Same composition as yoshida_step, advancing the tangent vector with the
// exact linearization of every sub-map.
void yoshida_step_tangent(const ActionParams2D& p, PhaseState2D& s, Tangent& t, double h) {
  const double im = 1.0 / p.m;
  for (int i = 0; i < 4; ++i) {
    const double c = kDrift[i] * h * im;
    s.x += c * s.px;
    s.y += c * s.py;
    t.dx += c * t.dpx;
    t.dy += c * t.dpy;
    if (i == 3) break;
    const double d = kKick[i] * h;
    const double hxx = 2.0 * p.v2 + 2.0 * p.v22 * s.y * s.y + 12.0 * p.v4 * s.x * s.x;
    const double hyy = 2.0 * p.v2 + 2.0 * p.v22 * s.x * s.x + 12.0 * p.v4 * s.y * s.y;
    const double hxy = 4.0 * p.v22 * s.x * s.y;
    const Force f = force(p, s.x, s.y);
    s.px += d * f.fx;
    s.py += d * f.fy;
    t.dpx -= d * (hxx * t.dx + hxy * t.dy);
    t.dpy -= d * (hxy * t.dx + hyy * t.dy);
  }
}

void check_step(double t_end, double dt) {
  if (!(t_end > 0.0) || !std::isfinite(t_end)) throw DomainError("orbit: t_end must be > 0");
  if (!(dt > 0.0) || !(dt <= t_end)) throw DomainError("orbit: need 0 < dt <= t_end");
}

// x^2 at the turning point of the x axis, V(x, 0) = E.
double axis_extent2(const ActionParams2D& p, double E) {
  if (p.v4 > 0.0) return (-p.v2 + std::sqrt(p.v2 * p.v2 + 4.0 * p.v4 * E)) / (2.0 * p.v4);
  return E / p.v2;
}

}  // namespace

double hamiltonian_2d(const ActionParams2D& p, const PhaseState2D& s) {
  return 0.5 * (s.px * s.px + s.py * s.py) / p.m + potential_2d(p, s.x, s.y);
}

void yoshida_step(const ActionParams2D& p, PhaseState2D& s, double h) {
  const double im = 1.0 / p.m;
  for (int i = 0; i < 4; ++i) {
    const double c = kDrift[i] * h * im;
    s.x += c * s.px;
    s.y += c * s.py;
    if (i == 3) break;
    const Force f = force(p, s.x, s.y);
    s.px += kKick[i] * h * f.fx;
    s.py += kKick[i] * h * f.fy;
  }
}

double characteristic_period(const ActionParams2D& p, double E) {
  validate(p);
  if (!(p.v2 > 0.0)) throw DomainError("characteristic_period: v2 must be > 0");
  if (!(E > 0.0)) throw DomainError("characteristic_period: energy must be above the minimum");
  const double r2 = axis_extent2(p, E);
  const double w2 = (2.0 * p.v2 + 2.0 * p.v22 * r2 + 12.0 * p.v4 * r2) / p.m;
  return 2.0 * M_PI / std::sqrt(w2);
}

Orbit integrate_orbit(const ActionParams2D& p, const PhaseState2D& s0, double t_end, double dt, int record_every,
                      double drift_tol) {
  validate(p);
  check_step(t_end, dt);
  if (record_every < 1) throw DomainError("integrate_orbit: record_every must be >= 1");
  const long n = static_cast<long>(std::ceil(t_end / dt - 1e-9));
  const double h = t_end / static_cast<double>(n);
  const double h0 = hamiltonian_2d(p, s0);
  const double scale = std::max(std::fabs(h0), 1e-300);
  Orbit o;
  o.times.push_back(0.0);
  o.states.push_back(s0);
  PhaseState2D s = s0;
  for (long k = 1; k <= n; ++k) {
    yoshida_step(p, s, h);
    const double err = std::fabs(hamiltonian_2d(p, s) - h0) / scale;
    o.max_rel_energy_error = std::max(o.max_rel_energy_error, err);
    if (k % record_every == 0 || k == n) {
      o.times.push_back(static_cast<double>(k) * h);
      o.states.push_back(s);
    }
  }
  if (o.max_rel_energy_error > drift_tol)
    throw EnergyDriftError("integrate_orbit: relative energy error " + std::to_string(o.max_rel_energy_error) +
                           " exceeds tolerance; reduce dt");
  return o;
}

std::vector<std::pair<double, double>> poincare_section(const ActionParams2D& p, const PhaseState2D& s0,
                                                        int n_crossings, double dt, long max_steps) {
  validate(p);
  if (n_crossings < 1) throw DomainError("poincare_section: n_crossings must be >= 1");
  if (!(dt > 0.0)) throw DomainError("poincare_section: dt must be > 0");
  std::vector<std::pair<double, double>> pts;
  PhaseState2D s = s0;
  for (long k = 0; k < max_steps; ++k) {
    const PhaseState2D prev = s;
    yoshida_step(p, s, dt);
    if (!(prev.y < 0.0 && s.y >= 0.0)) continue;
    double lo = 0.0, hi = dt;
    PhaseState2D at = s;
    while (hi - lo > 1e-10) {
      const double mid = 0.5 * (lo + hi);
      at = prev;
      yoshida_step(p, at, mid);
      (at.y < 0.0 ? lo : hi) = mid;
    }
    at = prev;
    yoshida_step(p, at, 0.5 * (lo + hi));
    if (at.py <= 0.0) continue;
    pts.emplace_back(at.x, at.px);
    if (static_cast<int>(pts.size()) == n_crossings) return pts;
  }
  throw ConvergenceError("poincare_section: step budget exhausted after " + std::to_string(pts.size()) +
                         " crossings");
}

LyapunovEstimate lyapunov_max(const ActionParams2D& p, const PhaseState2D& s0, double t_end, double dt,
                              double renorm_interval, double drift_tol) {
  validate(p);
  check_step(t_end, dt);
  if (!(renorm_interval > 0.0) || renorm_interval > t_end)
    throw DomainError("lyapunov_max: need 0 < renorm_interval <= t_end");
  const long blocks = std::max(1L, std::lround(t_end / renorm_interval));
  const double block = t_end / static_cast<double>(blocks);
  const long sub = static_cast<long>(std::ceil(block / dt - 1e-9));
  const double h = block / static_cast<double>(sub);
  const double h0 = hamiltonian_2d(p, s0);
  const double scale = std::max(std::fabs(h0), 1e-300);

  PhaseState2D s = s0;
  Tangent t{0.5, 0.5, 0.5, 0.5};
  double sum = 0.0;
  LyapunovEstimate est;
  for (long b = 1; b <= blocks; ++b) {
    for (long k = 0; k < sub; ++k) yoshida_step_tangent(p, s, t, h);
    const double nrm = t.norm();
    sum += std::log(nrm);
    t.scale(1.0 / nrm);
    est.max_rel_energy_error = std::max(est.max_rel_energy_error, std::fabs(hamiltonian_2d(p, s) - h0) / scale);
    if (b == blocks / 2) est.lambda_half = sum / (static_cast<double>(b) * block);
  }
  if (est.max_rel_energy_error > drift_tol)
    throw EnergyDriftError("lyapunov_max: relative energy error " + std::to_string(est.max_rel_energy_error) +
                           " exceeds tolerance; reduce dt");
  est.lambda = sum / t_end;
  if (blocks < 2) est.lambda_half = est.lambda;
  return est;
}

std::vector<PhaseState2D> sample_section_states(const ActionParams2D& p, double E, int n, std::uint64_t seed) {
  validate(p);
  if (!(p.v2 > 0.0)) throw DomainError("sample_section_states: v2 must be > 0");
  if (!(E > 0.0)) throw DomainError("sample_section_states: allowed region is empty for E <= 0");
  if (n < 1) throw DomainError("sample_section_states: n must be >= 1");
  const double xmax = std::sqrt(axis_extent2(p, E));
  const double pmax = std::sqrt(2.0 * p.m * E);
  std::vector<PhaseState2D> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(i)};
    std::mt19937_64 rng(seq);
    // portable uniform on [0, 1): the top 53 bits
    auto u = [&] { return static_cast<double>(rng() >> 11) * 0x1p-53; };
    for (;;) {
      const double x = (2.0 * u() - 1.0) * xmax;
      const double px = (2.0 * u() - 1.0) * pmax;
      const double k = E - 0.5 * px * px / p.m - potential_2d(p, x, 0.0);
      if (k <= 0.0) continue;
      out[static_cast<std::size_t>(i)] = {x, 0.0, px, std::sqrt(2.0 * p.m * k)};
      break;
    }
  }
  return out;
}

ActionParams2D integrable_limit(const ActionParams2D& p) {
  ActionParams2D q = p;
  q.v22 = 0.0;
  return q;
}

namespace {

double resolve_dt(const ActionParams2D& p, double E, const ChaosOptions& opt) {
  return opt.dt > 0.0 ? opt.dt : 1e-3 * characteristic_period(p, E);
}

std::vector<LyapunovEstimate> scan_lyapunov(const ActionParams2D& p, const std::vector<PhaseState2D>& ics,
                                            double dt, const ChaosOptions& opt) {
  return parallel_map<LyapunovEstimate>(
      ics.size(), [&](std::size_t i) { return lyapunov_max(p, ics[i], opt.t_end, dt, opt.renorm_interval, opt.drift_tol); },
      opt.jobs);
}

}  // namespace

ThresholdCalibration calibrate_threshold(const ActionParams2D& p, double E, int n_ic, std::uint64_t seed,
                                         const ChaosOptions& opt) {
  const ActionParams2D base = integrable_limit(p);
  const auto ics = sample_section_states(base, E, n_ic, seed);
  const auto est = scan_lyapunov(base, ics, resolve_dt(base, E, opt), opt);
  std::vector<double> lam;
  for (const auto& e : est) lam.push_back(e.lambda);
  std::sort(lam.begin(), lam.end());
  const std::size_t k = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(lam.size()))) - 1;
  ThresholdCalibration c;
  c.lambda_baseline = lam[k];
  c.baseline_max = lam.back();
  // A regular orbit of a non-isochronous system has linearly growing tangent
  // vectors, so its finite-time estimate is ~ ln(a t) / t. The harmonic
  // integrable limit has no such shear and would put the threshold below it.
  const double shear_floor = 3.0 * std::log(opt.t_end) / opt.t_end;
  c.threshold = std::max({5.0 * c.lambda_baseline, 3.0 / opt.t_end, shear_floor});
  c.R_integrable = static_cast<double>(std::count_if(lam.begin(), lam.end(), [&](double l) { return l > c.threshold; })) /
                   static_cast<double>(lam.size());
  return c;
}

ChaosScan chaotic_fraction(const ActionParams2D& p, double E, int n_ic, std::uint64_t seed, const ChaosOptions& opt) {
  validate(p);
  ChaosScan scan;
  scan.E = E;
  scan.params = p;
  scan.seed = seed;
  scan.t_end = opt.t_end;
  scan.dt = resolve_dt(p, E, opt);
  const auto ics = sample_section_states(p, E, n_ic, seed);
  if (opt.threshold >= 0.0) {
    scan.threshold = opt.threshold;
  } else {
    const ThresholdCalibration c = calibrate_threshold(p, E, n_ic, seed, opt);
    scan.threshold = c.threshold;
    scan.lambda_baseline = c.lambda_baseline;
    scan.R_integrable = c.R_integrable;
  }
  const auto est = scan_lyapunov(p, ics, scan.dt, opt);
  int half = 0;
  for (std::size_t i = 0; i < ics.size(); ++i) {
    ChaosSample cs{ics[i], est[i].lambda, est[i].lambda_half, est[i].lambda > scan.threshold};
    scan.n_chaotic += cs.chaotic;
    half += est[i].lambda_half > scan.threshold;
    scan.max_rel_energy_error = std::max(scan.max_rel_energy_error, est[i].max_rel_energy_error);
    scan.per_ic.push_back(cs);
  }
  scan.n_total = n_ic;
  scan.R = static_cast<double>(scan.n_chaotic) / n_ic;
  scan.R_half = static_cast<double>(half) / n_ic;
  scan.sigma = std::sqrt(scan.R * (1.0 - scan.R) / n_ic);
  return scan;
}

}  // namespace qaction
