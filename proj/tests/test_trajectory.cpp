#include <chrono>
#include <cmath>
#include <random>

#include "doctest.h"
#include "qaction/trajectory.hpp"

using namespace qaction;

namespace {

const ActionParams1D kHarmonic{1.0, 0.5, 0.0, 0.0};
const ActionParams1D kQuantum{1.0, 0.5, 2.0, 0.0, ActionRole::quantum};
const ActionParams1D kClassical{1.0, 0.5, 1.0, 0.0};

// Closed-form Euclidean harmonic path x(t) = (y sinh w(T-t) + x sinh wt) / sinh wT.
struct HarmonicPath {
  double m, w, x, y, T;
  double pos(double t) const { return (y * std::sinh(w * (T - t)) + x * std::sinh(w * t)) / std::sinh(w * T); }
  double vel(double t) const {
    return w * (-y * std::cosh(w * (T - t)) + x * std::cosh(w * t)) / std::sinh(w * T);
  }
  double energy() const { return 0.5 * m * vel(0) * vel(0) - 0.5 * m * w * w * y * y; }
  double action() const {
    return 0.5 * m * w * ((x * x + y * y) * std::cosh(w * T) - 2.0 * x * y) / std::sinh(w * T);
  }
  bool turns() const {
    // velocity changes sign inside (0, T)
    return vel(0) * vel(T) < 0.0;
  }
};

}  // namespace

TEST_CASE("harmonic closed-form action") {
  const HarmonicPath h{1.0, 1.0, 1.0, 2.0, 1.0};
  CHECK(h.action() == doctest::Approx(1.5807519572696888).epsilon(1e-14));
  const ActionValue av = quadrature_action(kHarmonic, 1.0, 2.0, 1.0);
  CHECK(av.action == doctest::Approx(1.5807519572696888).epsilon(1e-10));
  CHECK(av.energy == doctest::Approx(h.energy()).epsilon(1e-9));
}

TEST_CASE("transit_time reproduces closed-form harmonic times") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> dx(0.2, 3.0), dt(0.2, 3.0);
  for (int i = 0; i < 20; ++i) {
    const HarmonicPath h{1.0, 1.0, dx(rng), dx(rng), dt(rng)};
    const double t = transit_time(kHarmonic, h.energy(), h.x, h.y, h.turns());
    CAPTURE(h.x);
    CAPTURE(h.y);
    CAPTURE(h.T);
    CHECK(t == doctest::Approx(h.T).epsilon(1e-9));
    const ActionValue av = quadrature_action(kHarmonic, h.x, h.y, h.T);
    CHECK(av.action == doctest::Approx(h.action()).epsilon(1e-9));
    CHECK((av.branch == PathBranch::turning) == h.turns());
  }
}

TEST_CASE("transit_time limits and errors") {
  // x = y: the direct time shrinks to zero as E grows
  double prev = 1e300;
  for (double E = 1.0; E < 1e7; E *= 10.0) {
    const double t = transit_time(kClassical, E, 1.5, 1.5 + 1e-3, false);
    CHECK(t < prev);
    prev = t;
  }
  CHECK(prev < 1e-6);
  CHECK(transit_time(kClassical, 3.0, 1.5, 1.5, false) == 0.0);
  // Stationary point: approaching E = -V(xmin) the crossing time diverges.
  const double vmin = potential_1d_min_value(kClassical);
  const double t1 = transit_time(kClassical, -vmin + 1e-4, 1.0, 1.4, false);
  const double t2 = transit_time(kClassical, -vmin + 1e-8, 1.0, 1.4, false);
  CHECK(t2 > t1 + 2.0);
  CHECK_THROWS_AS(transit_time(kClassical, -vmin - 0.1, 1.0, 1.4, false), DomainError);
  CHECK_THROWS_AS(transit_time(kClassical, -vmin + 0.1, 1.0, 1.4, true), DomainError);
  const BranchTimes bt = branch_times(kClassical, 2.0, 3.0);
  CHECK(bt.has_turning);
  CHECK(bt.direct_max > 0.0);
  CHECK(std::isinf(branch_times(kClassical, 1.0, 3.0).direct_max));
}

TEST_CASE("turning time is monotone and joins the direct branch") {
  const BranchTimes bt = branch_times(kQuantum, 2.0, 3.0);
  const double e_star = -potential_1d(kQuantum, 2.0);
  CHECK(transit_time(kQuantum, e_star, 2.0, 3.0, true) == doctest::Approx(bt.direct_max).epsilon(1e-10));
  CHECK(transit_time(kQuantum, e_star, 2.0, 3.0, false) == doctest::Approx(bt.direct_max).epsilon(1e-10));
  double prev = 0.0;
  const double vmin = potential_1d_min_value(kQuantum);
  for (double f = 0.99; f > 1e-6; f *= 0.5) {
    const double E = -vmin + f * (e_star + vmin);
    const double t = transit_time(kQuantum, E, 2.0, 3.0, true);
    CHECK(t > prev);
    prev = t;
  }
}

TEST_CASE("constant solution at the minimum") {
  const double xm = potential_1d_min_location(kQuantum);
  for (double T : {0.5, 3.0, 20.0}) {
    const ActionValue av = quadrature_action(kQuantum, xm, xm, T);
    CHECK(av.branch == PathBranch::constant);
    CHECK(av.action == doctest::Approx(T * potential_1d(kQuantum, xm)).epsilon(1e-14));
    const EuclideanTrajectory r = solve_trajectory_relaxation(kQuantum, xm, xm, T, 200);
    CHECK(r.action == doctest::Approx(T * potential_1d(kQuantum, xm)).epsilon(1e-12));
    for (double v : r.positions) CHECK(v == doctest::Approx(xm).epsilon(1e-14));
  }
}

TEST_CASE("quadrature path conserves Euclidean energy and hits the boundary values") {
  for (auto [x, y, T] : {std::tuple{1.0, 2.0, 1.0}, std::tuple{0.5, 3.0, 2.5}, std::tuple{2.5, 2.0, 4.0}}) {
    const EuclideanTrajectory tr = solve_trajectory_quadrature(kQuantum, x, y, T, 2001);
    CHECK(tr.positions.front() == y);
    CHECK(tr.positions.back() == x);
    for (std::size_t k = 0; k < tr.positions.size(); ++k) {
      const double v = tr.velocities[k];
      CHECK(std::fabs(0.5 * v * v - potential_1d(kQuantum, tr.positions[k]) - tr.energy) <
            1e-6 * (1.0 + std::fabs(tr.energy)));
    }
  }
}

TEST_CASE("finite-difference energy check on a fine mesh") {
  const EuclideanTrajectory tr = solve_trajectory_quadrature(kQuantum, 1.0, 2.0, 1.0, 8001);
  const double dt = tr.times[1] - tr.times[0];
  double worst = 0.0;
  for (std::size_t k = 1; k + 1 < tr.positions.size(); ++k) {
    const double v = (tr.positions[k + 1] - tr.positions[k - 1]) / (2.0 * dt);
    worst = std::max(worst, std::fabs(0.5 * v * v - potential_1d(kQuantum, tr.positions[k]) - tr.energy));
  }
  CHECK(worst < 1e-6 * (1.0 + std::fabs(tr.energy)));
}

TEST_CASE("action symmetry under exchange of endpoints") {
  for (auto [x, y, T] : {std::tuple{1.0, 2.0, 1.0}, std::tuple{0.4, 4.5, 3.0}, std::tuple{2.0, 3.0, 2.0}}) {
    CHECK(quadrature_action(kQuantum, x, y, T).action ==
          doctest::Approx(quadrature_action(kQuantum, y, x, T).action).epsilon(1e-11));
    CHECK(solve_trajectory_relaxation(kQuantum, x, y, T, 400).action ==
          doctest::Approx(solve_trajectory_relaxation(kQuantum, y, x, T, 400).action).epsilon(1e-11));
  }
}

TEST_CASE("relaxation converges to the closed-form harmonic path") {
  const HarmonicPath h{1.0, 1.0, 1.0, 2.0, 1.0};
  const EuclideanTrajectory r = solve_trajectory_relaxation(kHarmonic, 1.0, 2.0, 1.0, 1000);
  double worst = 0.0;
  for (std::size_t k = 0; k < r.positions.size(); ++k) worst = std::max(worst, std::fabs(r.positions[k] - h.pos(r.times[k])));
  CHECK(worst < 1e-6);
  CHECK(r.action == doctest::Approx(h.action()).epsilon(1e-6));
}

TEST_CASE("relaxation is second order and agrees with quadrature") {
  const double s250 = solve_trajectory_relaxation(kQuantum, 1.0, 2.0, 1.0, 250).action;
  const double s500 = solve_trajectory_relaxation(kQuantum, 1.0, 2.0, 1.0, 500).action;
  const double s1000 = solve_trajectory_relaxation(kQuantum, 1.0, 2.0, 1.0, 1000).action;
  const double s2000 = solve_trajectory_relaxation(kQuantum, 1.0, 2.0, 1.0, 2000).action;
  const double r1 = (s250 - s500) / (s500 - s1000);
  const double r2 = (s500 - s1000) / (s1000 - s2000);
  CHECK(r1 == doctest::Approx(4.0).epsilon(0.05));
  CHECK(r2 == doctest::Approx(4.0).epsilon(0.05));
  const double sq = quadrature_action(kQuantum, 1.0, 2.0, 1.0).action;
  CHECK(std::fabs(s2000 - sq) < 1e-5);
  // O(N_t^-2) approach to the quadrature value
  CHECK(std::fabs(s1000 - sq) / std::fabs(s2000 - sq) == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("relaxation from a straight-line guess gives the same path") {
  RelaxationOptions lin;
  lin.seed_from_quadrature = false;
  const double a = solve_trajectory_relaxation(kQuantum, 0.5, 3.0, 2.0, 500, lin).action;
  const double b = solve_trajectory_relaxation(kQuantum, 0.5, 3.0, 2.0, 500).action;
  CHECK(a == doctest::Approx(b).epsilon(1e-12));
}

TEST_CASE("extremal action is a minimum over perturbed discrete paths") {
  const EuclideanTrajectory r = solve_trajectory_relaxation(kQuantum, 1.0, 2.5, 1.5, 400);
  const double dt = r.times[1] - r.times[0];
  const double base = discrete_action(kQuantum, r.positions, dt);
  CHECK(base == doctest::Approx(r.action).epsilon(1e-14));
  const double sq = quadrature_action(kQuantum, 1.0, 2.5, 1.5).action;
  std::mt19937_64 rng(5);
  std::normal_distribution<double> nd(0.0, 1e-3);
  for (int trial = 0; trial < 20; ++trial) {
    auto path = r.positions;
    for (std::size_t k = 1; k + 1 < path.size(); ++k) path[k] += nd(rng);
    const double s = discrete_action(kQuantum, path, dt);
    CHECK(s > base);
    // the continuum optimum lies below every perturbed discrete path as well
    CHECK(s > sq - 1e-5);
  }
}

TEST_CASE("long transition times stay resolvable") {
  // E + V(xmin) shrinks like exp(-w T); the offset parametrization keeps it finite.
  for (double T : {8.0, 14.0, 30.0}) {
    const ActionValue a = quadrature_action(kQuantum, 0.6, 4.5, T);
    const ActionValue b = quadrature_action(kQuantum, 2.0, 3.0, T);
    CHECK(std::isfinite(a.action));
    CHECK(b.branch == PathBranch::turning);
    // action grows like V_min T plus a T-independent part
    const ActionValue a2 = quadrature_action(kQuantum, 0.6, 4.5, T + 1.0);
    CHECK(a2.action - a.action == doctest::Approx(potential_1d_min_value(kQuantum)).epsilon(1e-6));
  }
}

TEST_CASE("relaxation errors") {
  CHECK_THROWS_AS(solve_trajectory_relaxation(kQuantum, 1.0, 2.0, 1.0, 7), DomainError);
  RelaxationOptions one;
  one.max_iterations = 1;
  one.seed_from_quadrature = false;
  CHECK_THROWS_AS(solve_trajectory_relaxation(kQuantum, 0.3, 4.0, 3.0, 200, one), ConvergenceError);
}

TEST_CASE("quadrature solve is fast enough for fitting loops") {
  const auto t0 = std::chrono::steady_clock::now();
  int n = 0;
  for (double x = 0.5; x <= 3.0; x += 0.25) {
    for (double y : {4.0, 5.0}) {
      (void)quadrature_action(kQuantum, x, y, 2.0);
      ++n;
    }
  }
  const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  MESSAGE("mean quadrature solve: " << ms / n << " ms");
  CHECK(ms / n < 50.0);
}
