#include "qaction/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "qaction/asymptotics.hpp"
#include "qaction/chaos2d.hpp"
#include "qaction/fitter.hpp"
#include "qaction/propagator.hpp"
#include "qaction/specfun.hpp"

namespace qaction {

namespace {

const ActionParams1D kPaper = ActionParams1D::from_omega_g(1.0, 1.0, 1.0);
const double kInf = std::numeric_limits<double>::infinity();
const specfun::QuadratureSpec kQuad{1e-15, 1e-11, 4000};

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", v);
  return buf;
}

// Plain ascending series in long double; independent of the library's
// evaluation path.
long double bessel_series(long double nu, long double z) {
  long double term = std::pow(z / 2, nu) / std::tgamma(nu + 1), sum = term;
  for (int k = 1; k < 300; ++k) {
    term *= (z * z / 4) / (k * (nu + k));
    sum += term;
  }
  return sum;
}

template <class F>
VerifyEntry guarded(const std::string& name, F&& f) {
  try {
    return f();
  } catch (const std::exception& e) {
    return {name, false, std::string("threw: ") + e.what()};
  }
}

VerifyEntry bessel_oracle() {
  double worst = 0.0;
  for (double nu : {0.0, 0.5, 1.5, 2.5, 3.7})
    for (double z : {0.01, 1.0, 8.0, 10.0, 12.0, 15.0, 25.0, 35.0, 45.0})
      worst = std::max(worst, std::fabs(specfun::bessel_i(nu, z) / static_cast<double>(bessel_series(nu, z)) - 1.0));
  // I_{1/2}(z) = sqrt(2 / (pi z)) sinh z
  for (double z : {0.3, 3.0, 40.0})
    worst = std::max(worst, std::fabs(specfun::bessel_i(0.5, z) / (std::sqrt(2.0 / (M_PI * z)) * std::sinh(z)) - 1.0));
  return {"Bessel I_nu vs independent series", worst < 1e-10, "max rel err " + sci(worst)};
}

VerifyEntry chapman_kolmogorov() {
  const double tuples[][4] = {{1.0, 1.5, 0.4, 0.4}, {0.7, 2.4, 0.3, 0.9}, {2.8, 0.9, 0.6, 0.25}, {1.6, 1.6, 1.0, 0.5}};
  double worst = 0.0;
  for (const auto& t : tuples) {
    const double lhs = specfun::integrate(
        [&](double z) { return std::exp(log_euclidean_green(kPaper, t[0], z, t[2]) + log_euclidean_green(kPaper, z, t[1], t[3])); },
        0.0, kInf, kQuad);
    worst = std::max(worst, std::fabs(lhs / std::exp(log_euclidean_green(kPaper, t[0], t[1], t[2] + t[3])) - 1.0));
  }
  return {"Chapman-Kolmogorov semigroup", worst < 1e-6, "max rel residual " + sci(worst)};
}

VerifyEntry eigenfunction() {
  const SpectralData sd = ground_state(kPaper);
  double worst = 0.0;
  for (double T : {0.3, 1.0})
    for (double x : {0.6, 1.5, 2.7}) {
      const double lhs = specfun::integrate(
          [&](double y) { return std::exp(log_euclidean_green(kPaper, x, y, T)) * wavefunction(sd, kPaper, y); }, 0.0,
          kInf, kQuad);
      worst = std::max(worst, std::fabs(lhs / (std::exp(-sd.E_gr * T) * wavefunction(sd, kPaper, x)) - 1.0));
    }
  return {"ground state is an eigenfunction of the propagator", worst < 1e-6, "max rel residual " + sci(worst)};
}

VerifyEntry scales() {
  const SpectralData sd = ground_state(kPaper);
  const bool ok = sd.E_gr == 2.5 && std::fabs(sd.Lambda_sc - 2.35) <= 0.01;
  char buf[96];
  std::snprintf(buf, sizeof buf, "E_gr %.12g, T_sc %.6f, Lambda_sc %.6f", sd.E_gr, sd.T_sc, sd.Lambda_sc);
  return {"ground-state energy and scales", ok, buf};
}

VerifyEntry harmonic_round_trip() {
  const ActionParams1D osc{1.0, 0.5, 0.0, 0.0};
  FitOptions o;
  o.n_starts = 0;
  double worst = 0.0;
  for (double T : {0.5, 2.0}) {
    const FitResult f = fit_quantum_action(osc, {uniform_points(4, 5, 2), uniform_points(0.5, 3, 10), T}, o);
    worst = std::max({worst, std::fabs(f.params.m - 1.0), std::fabs(f.params.v2 / 0.5 - 1.0)});
  }
  return {"harmonic quantum action equals the classical one", worst < 1e-4, "max rel deviation " + sci(worst)};
}

VerifyEntry transformation_law() {
  const AsymptoticPrediction a = asymptotic_parameters(kPaper);
  std::vector<double> xs;
  for (int k = 0; k <= 40; ++k) {
    const double x = 0.2 + 0.1 * k;
    if (std::fabs(x - a.x_min_quantum) > 0.05) xs.push_back(x);
  }
  double worst = 0.0;
  for (double r : transformation_law_residual(kPaper, asymptotic_action(a, 1.0), a.E_gr, xs))
    worst = std::max(worst, std::fabs(r));
  return {"transformation law for the predicted quantum action", worst < 1e-10, "max |residual| " + sci(worst)};
}

VerifyEntry integrable_lyapunov() {
  const ActionParams2D flat{1.0, 0.5, 0.0, 0.0};
  const double E = 10.0, t_end = 500.0;
  double worst = 0.0;
  for (const auto& s : sample_section_states(flat, E, 4, 7))
    worst = std::max(worst, lyapunov_max(flat, s, t_end, 1e-3 * characteristic_period(flat, E)).lambda);
  return {"integrable-limit Lyapunov exponent vanishes", worst < 1e-2, "max lambda " + sci(worst) + " at t=500"};
}

}  // namespace

bool VerifyReport::all_pass() const {
  return std::all_of(entries.begin(), entries.end(), [](const VerifyEntry& e) { return e.pass; });
}

std::string VerifyReport::table() const {
  std::string out;
  char buf[256];
  for (const auto& e : entries) {
    std::snprintf(buf, sizeof buf, "%-4s  %-52s  %s\n", e.pass ? "PASS" : "FAIL", e.name.c_str(), e.detail.c_str());
    out += buf;
  }
  std::snprintf(buf, sizeof buf, "%zu/%zu checks passed\n",
                static_cast<std::size_t>(std::count_if(entries.begin(), entries.end(), [](auto& e) { return e.pass; })),
                entries.size());
  return out + buf;
}

VerifyReport verify() {
  VerifyReport r;
  r.entries.push_back(guarded("Bessel I_nu vs independent series", bessel_oracle));
  r.entries.push_back(guarded("Chapman-Kolmogorov semigroup", chapman_kolmogorov));
  r.entries.push_back(guarded("ground state is an eigenfunction of the propagator", eigenfunction));
  r.entries.push_back(guarded("ground-state energy and scales", scales));
  r.entries.push_back(guarded("harmonic quantum action equals the classical one", harmonic_round_trip));
  r.entries.push_back(guarded("transformation law for the predicted quantum action", transformation_law));
  r.entries.push_back(guarded("integrable-limit Lyapunov exponent vanishes", integrable_lyapunov));
  return r;
}

}  // namespace qaction
