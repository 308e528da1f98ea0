#include <cmath>

#include "doctest.h"
#include "qaction/asymptotics.hpp"
#include "qaction/propagator.hpp"
#include "qaction/specfun.hpp"

using namespace qaction;

namespace {

const ActionParams1D kClassical{1.0, 0.5, 1.0, 0.0};

std::vector<double> law_grid(double xm) {
  std::vector<double> g;
  for (double x : uniform_points(0.3, 3.0, 50))
    if (std::fabs(x - xm) >= 0.05) g.push_back(x);
  return g;
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::fabs(x));
  return m;
}

}  // namespace

TEST_CASE("asymptotic parameters") {
  const AsymptoticPrediction a = asymptotic_parameters(kClassical);
  CHECK(a.m_v2 == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(a.m_vm2 == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(a.E_gr == doctest::Approx(2.5).epsilon(1e-15));
  CHECK(a.x_min_quantum == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK(a.V_min_quantum == a.E_gr);

  const AsymptoticPrediction free = asymptotic_parameters({1.0, 0.5, 0.0, 0.0});
  CHECK(free.m_vm2 == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(free.E_gr == doctest::Approx(1.5).epsilon(1e-15));

  // x~min coincides with the exact ground-state peak sqrt(hbar (1/2 + gamma) / (m w))
  const ActionParams1D q = asymptotic_action(a, 1.0);
  CHECK(potential_1d_min_location(q) == doctest::Approx(std::sqrt((0.5 + 1.5) / 1.0)).epsilon(1e-14));
  // min V~ = E_gr, i.e. v0~ + 2 sqrt(v2~ vm2~) = E_gr
  CHECK(q.v0 + 2.0 * std::sqrt(q.v2 * q.vm2) == doctest::Approx(a.E_gr).epsilon(1e-14));
  CHECK(potential_1d_min_value(q) == doctest::Approx(a.E_gr).epsilon(1e-14));
  // any split gives the same x~min
  CHECK(potential_1d_min_location(asymptotic_action(a, 2.7)) == doctest::Approx(a.x_min_quantum).epsilon(1e-14));
}

TEST_CASE("transformation law holds identically for the matched action") {
  for (double g : {1.0, 0.3, 3.0}) {
    const ActionParams1D cl{1.0, 0.5, g, 0.0};
    const AsymptoticPrediction a = asymptotic_parameters(cl);
    for (double m : {1.0, 0.6}) {
      const auto r = transformation_law_residual(cl, asymptotic_action(a, m), a.E_gr, law_grid(a.x_min_quantum));
      CAPTURE(g);
      CHECK(r.size() >= 45);
      CHECK(max_abs(r) < 1e-10);
    }
  }
}

TEST_CASE("transformation law is violated by the classical action and by perturbations") {
  const AsymptoticPrediction a = asymptotic_parameters(kClassical);
  const ActionParams1D q = asymptotic_action(a, 1.0);
  const auto grid = law_grid(a.x_min_quantum);
  CHECK(max_abs(transformation_law_residual(kClassical, kClassical, a.E_gr,
                                            law_grid(potential_1d_min_location(kClassical)))) > 0.1);

  // response to vm2~ -> vm2~ (1 + e) is linear in e for small e
  auto excess = [&](double e) {
    ActionParams1D p = q;
    p.vm2 *= 1.0 + e;
    return max_abs(transformation_law_residual(kClassical, p, a.E_gr, grid, 0.0));
  };
  const double s1 = excess(0.01) / 0.01, s2 = excess(0.005) / 0.005;
  MESSAGE("max-residual slope: " << s1);
  CHECK(s1 > 1.0);
  CHECK(s1 == doctest::Approx(s2).epsilon(0.05));
  CHECK(excess(0.01) == excess(0.01));
}

TEST_CASE("transformation law rejects points at the quantum minimum") {
  const AsymptoticPrediction a = asymptotic_parameters(kClassical);
  const ActionParams1D q = asymptotic_action(a, 1.0);
  CHECK_THROWS_AS(transformation_law_residual(kClassical, q, a.E_gr, {std::sqrt(2.0) + 0.01}), DomainError);
  CHECK_THROWS_AS(transformation_law_residual(kClassical, q, a.E_gr, {-1.0}), DomainError);
}

TEST_CASE("reconstructed wave function matches the exact ground state") {
  const AsymptoticPrediction a = asymptotic_parameters(kClassical);
  const ReconstructedWavefunction psi(asymptotic_action(a, 1.0));
  const SpectralData sd = ground_state(kClassical);
  CHECK(psi.x_min() == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
  CHECK(psi.exponent(psi.x_min()) == 0.0);
  double worst = 0.0;
  for (double x : uniform_points(0.2, sd.Lambda_sc, 120)) {
    const double exact = wavefunction(sd, kClassical, x);
    worst = std::max(worst, std::fabs(psi(x) / exact - 1.0));
  }
  CHECK(worst < 1e-8);
  // normalized on x > 0
  const double n = specfun::integrate([&](double x) { return psi(x) * psi(x); }, 0.0, 30.0, {1e-12, 1e-10, 2000});
  CHECK(n == doctest::Approx(1.0).epsilon(1e-8));
  // strictly decreasing away from x~min on both sides
  double prev = psi(psi.x_min());
  for (double x = psi.x_min() + 0.05; x < 6.0; x += 0.05) {
    const double v = psi(x);
    CHECK(v < prev);
    prev = v;
  }
  prev = psi(psi.x_min());
  for (double x = psi.x_min() - 0.05; x > 0.05; x -= 0.05) {
    const double v = psi(x);
    CHECK(v < prev);
    prev = v;
  }
  CHECK(reconstruct_wavefunction(asymptotic_action(a, 1.0), 1.1) == doctest::Approx(psi(1.1)).epsilon(1e-12));
  CHECK_THROWS_AS(psi(0.0), DomainError);
}

TEST_CASE("oscillator quantum action reconstructs the Gaussian") {
  const ActionParams1D q{1.3, 0.7, 0.0, 0.0, ActionRole::quantum};
  const ReconstructedWavefunction psi(q);
  const double mw = q.m * q.omega();
  for (double x : {0.1, 0.5, 1.0, 2.0}) {
    const double gauss = std::pow(mw / M_PI, 0.25) * std::exp(-0.5 * mw * x * x);
    CHECK(psi(x) == doctest::Approx(gauss).epsilon(1e-9));
  }
}
