#include <cmath>

#include "doctest.h"
#include "qaction/fitter.hpp"
#include "qaction/propagator.hpp"

using namespace qaction;

namespace {

const ActionParams1D kClassical{1.0, 0.5, 1.0, 0.0};
const ActionParams1D kOscillator{1.0, 0.5, 0.0, 0.0};

FitOptions quick() {
  FitOptions o;
  o.n_starts = 1;
  return o;
}

BoundarySet small_set(double T) { return {uniform_points(1.0, 2.0, 4), uniform_points(0.8, 2.6, 6), T}; }

}  // namespace

TEST_CASE("predict_log_green: oscillator kernel, constant path, v0 shift") {
  // Full-line oscillator: the classical action is exact with
  // Z = sqrt(m w / (2 pi hbar sinh wT)).
  for (double T : {0.3, 1.0, 2.5}) {
    const double logZ = 0.5 * std::log(1.0 / (2.0 * M_PI * std::sinh(T)));
    for (auto [x, y] : {std::pair{1.0, 2.0}, {0.4, 0.9}, {2.2, 1.7}}) {
      CHECK(predict_log_green(kOscillator, logZ, x, y, T) ==
            doctest::Approx(log_harmonic_green(kOscillator, x, y, T)).epsilon(1e-11));
    }
  }
  const double xm = potential_1d_min_location(kClassical);
  CHECK(predict_log_green(kClassical, 0.3, xm, xm, 2.0) ==
        doctest::Approx(0.3 - 2.0 * potential_1d(kClassical, xm)).epsilon(1e-13));

  ActionParams1D shifted = kClassical;
  shifted.v0 = 0.37;
  const double base = predict_log_green(kClassical, 0.0, 1.2, 2.3, 1.4);
  CHECK(predict_log_green(shifted, 0.0, 1.2, 2.3, 1.4) == doctest::Approx(base - 0.37 * 1.4).epsilon(1e-12));
  // gauge: (v0 + d, ln Z + d T) is the same amplitude
  CHECK(predict_log_green(shifted, 0.37 * 1.4, 1.2, 2.3, 1.4) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("predict_log_green via the mesh solver approaches the quadrature value") {
  const double a = predict_log_green(kClassical, 0.0, 1.0, 2.0, 1.0);
  const double b = predict_log_green_relaxation(kClassical, 0.0, 1.0, 2.0, 1.0, 2000);
  CHECK(std::fabs(a - b) < 1e-5);
}

TEST_CASE("oscillator input: the fitted action equals the classical one") {
  for (double T : {0.5, 1.0, 2.0, 4.0}) {
    const FitResult f = fit_quantum_action(kOscillator, {uniform_points(4, 5, 2), uniform_points(0.5, 3, 10), T});
    CAPTURE(T);
    CHECK(f.params.vm2 == 0.0);
    CHECK(f.params.m == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(f.params.v2 == doctest::Approx(0.5).epsilon(1e-4));
    CHECK(f.log_Z == doctest::Approx(0.5 * std::log(1.0 / (2.0 * M_PI * std::sinh(T)))).epsilon(1e-6));
    CHECK(f.residual_max_rel < 1e-8);
  }
}

TEST_CASE("round trip: data generated by a known quantum action is recovered") {
  const ActionParams1D truth{1.3, 0.4, 1.7, 0.0, ActionRole::quantum};
  const BoundarySet b = small_set(1.0);
  std::vector<LogAmplitude> data;
  for (double y : b.initial_points)
    for (double x : b.final_points) data.push_back({x, y, b.T, predict_log_green(truth, 0.7, x, y, b.T)});
  const FitResult f = fit_log_amplitudes(data, kClassical, quick());
  CHECK(f.m_v2 == doctest::Approx(1.3 * 0.4).epsilon(1e-8));
  CHECK(f.m_vm2 == doctest::Approx(1.3 * 1.7).epsilon(1e-8));
  // m is separable from the products (no common-scale flat direction)
  CHECK(f.params.m == doctest::Approx(1.3).epsilon(1e-6));
  CHECK(f.log_Z == doctest::Approx(0.7).epsilon(1e-8));
  CHECK(f.objective < 1e-18);
  CHECK(!f.rank_deficient);
}

TEST_CASE("fit result invariants and stationarity") {
  const FitResult f = fit_quantum_action(kClassical, small_set(1.5), quick());
  CHECK(f.converged);
  CHECK(f.n_samples == 24);
  CHECK(f.T == 1.5);
  CHECK(f.residual_max_rel >= f.residual_rms);
  CHECK(f.residual_rms >= 0.0);
  CHECK(f.m_v2 == doctest::Approx(f.params.m * f.params.v2).epsilon(1e-12));
  CHECK(f.m_vm2 == doctest::Approx(f.params.m * f.params.vm2).epsilon(1e-12));
  CHECK(f.params.v0 == 0.0);
  CHECK(f.gradient_norm < 1e-6 * (1.0 + f.objective));
}

TEST_CASE("gauge choice does not affect residuals") {
  const BoundarySet b = small_set(1.2);
  const FitResult f = fit_quantum_action(kClassical, b, quick());
  ActionParams1D shifted = f.params;
  shifted.v0 = 0.8;
  for (double y : b.initial_points) {
    for (double x : b.final_points) {
      const double exact = log_euclidean_green(kClassical, x, y, b.T);
      const double r0 = predict_log_green(f.params, f.log_Z, x, y, b.T) - exact;
      const double r1 = predict_log_green(shifted, f.log_Z + 0.8 * b.T, x, y, b.T) - exact;
      CHECK(r1 == doctest::Approx(r0).epsilon(1e-10));
    }
  }
}

TEST_CASE("fit is deterministic") {
  const FitResult a = fit_quantum_action(kClassical, small_set(2.0));
  const FitResult b = fit_quantum_action(kClassical, small_set(2.0));
  CHECK(a.params.m == b.params.m);
  CHECK(a.m_v2 == b.m_v2);
  CHECK(a.m_vm2 == b.m_vm2);
  CHECK(a.log_Z == b.log_Z);
  FitOptions threaded;
  threaded.jobs = 3;
  const FitResult c = fit_quantum_action(kClassical, small_set(2.0), threaded);
  CHECK(c.m_v2 == a.m_v2);
  CHECK(c.m_vm2 == a.m_vm2);
}

TEST_CASE("degenerate single-pair set is flagged, not fatal") {
  const FitResult f = fit_quantum_action(kClassical, {{1.0}, {2.0}, 1.0}, quick());
  CHECK(f.rank_deficient);
  CHECK(!f.warnings.empty());
  CHECK(f.residual_max_rel < 1e-12);
}

TEST_CASE("fit input validation") {
  CHECK_THROWS_AS(fit_quantum_action(kClassical, {{}, {1.0}, 1.0}), DomainError);
  CHECK_THROWS_AS(fit_log_amplitudes({}, kClassical), DomainError);
  CHECK_THROWS_AS(fit_log_amplitudes({{1, 2, 1, 0.0}, {1, 2, 2, 0.0}}, kClassical), DomainError);
}

TEST_CASE("boundary dependence: strong at small T, gone at large T") {
  FitOptions o;
  o.n_starts = 0;
  const auto rows = boundary_dependence_study(kClassical, BoundaryScenario::vary_final, {1.0, 4.0}, o);
  REQUIRE(rows.size() == 8);
  double lo1 = 1e9, hi1 = -1e9, lo4 = 1e9, hi4 = -1e9;
  for (const auto& r : rows) {
    REQUIRE(r.ok);
    CHECK(r.small_T_regime == (r.T < 2.0));
    double& lo = r.T < 2.0 ? lo1 : lo4;
    double& hi = r.T < 2.0 ? hi1 : hi4;
    lo = std::min(lo, r.fit.m_vm2);
    hi = std::max(hi, r.fit.m_vm2);
  }
  MESSAGE("m vm2 spread across final intervals: T=1 " << hi1 - lo1 << ", T=4 " << hi4 - lo4);
  CHECK(hi4 - lo4 < 0.02);
  CHECK(hi1 - lo1 > 100.0 * (hi4 - lo4));
  CHECK(hi1 - lo1 > 0.01);
  CHECK(boundary_scenario_sets(BoundaryScenario::vary_initial).size() == 5);
  CHECK(boundary_scenario_sets(BoundaryScenario::balanced).front().second.size() == 100);
}

TEST_CASE("resolution study bookkeeping") {
  const auto st = resolution_study(kClassical, small_set(1.0), {50, 100, 200, 400}, {1.0}, quick(), 1e-3);
  REQUIRE(st.cells.size() == 4);
  REQUIRE(st.summary.size() == 1);
  for (const auto& c : st.cells) CHECK(c.ok);
  CHECK(st.cells.back().change == -1.0);
  // second-order mesh error: successive changes shrink by about 4
  CHECK(st.cells[0].change / st.cells[1].change == doctest::Approx(4.0).epsilon(0.15));
  CHECK(st.summary[0].stable_mesh_density > 0);
  CHECK(st.summary[0].stable_mesh_density <= 200);
}
