#include "qaction/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <tuple>

namespace qaction {

std::string to_string(SolverMethod m) { return m == SolverMethod::quadrature ? "quadrature" : "relaxation"; }

std::string to_string(PathBranch b) {
  switch (b) {
    case PathBranch::direct: return "direct";
    case PathBranch::turning: return "turning";
    case PathBranch::constant: return "constant";
  }
  return "unknown";
}

namespace {

// One leg of a Euclidean path, measured from an anchor point
//   x_a = xmin + side * delta
// outward to z = x_a + side * s, s in [0, length].  Along the leg
//   E + V(z) = eta + s F(s),
// with F written in factored form so that neither the anchor offset delta nor
// the energy offset eta is ever lost to cancellation against V(xmin).
struct Leg {
  int side = 1;
  double delta = 0.0;
  double length = 0.0;
};

struct Shape {
  double m, v2, vm2, xm;
};

Shape shape_of(const ActionParams1D& p) { return {p.m, p.v2, p.vm2, potential_1d_min_location(p)}; }

double reduced_slope(const Shape& sh, const Leg& leg, double s) {
  if (sh.vm2 == 0.0) return sh.v2 * (2.0 * leg.delta + s);
  const double sg = leg.side;
  const double xa = sh.xm + sg * leg.delta;
  const double z = xa + sg * s;
  return (2.0 * xa + sg * s) * sh.v2 * (leg.delta * (2.0 * sh.xm + sg * leg.delta) + s * xa) *
         (z * xa + sh.xm * sh.xm) / (z * z * xa * xa);
}

// V(x_a) - V(xmin) for the anchor of `leg`.
double anchor_excess(const Shape& sh, double delta, int side) {
  if (sh.vm2 == 0.0) return sh.v2 * delta * delta;
  const double xa = sh.xm + side * delta;
  const double d = delta * (2.0 * sh.xm + side * delta);
  return sh.v2 * d * d / (xa * xa);
}

// d(leg time)/du with s = u^2.
double leg_time_density(const Shape& sh, const Leg& leg, double eta, double u) {
  const double s = u * u;
  const double f = reduced_slope(sh, leg, s);
  if (eta == 0.0) return 2.0 / std::sqrt(2.0 * f / sh.m);
  return 2.0 * u / std::sqrt(2.0 * (eta + s * f) / sh.m);
}

double leg_time(const Shape& sh, const Leg& leg, double eta, const specfun::QuadratureSpec& q) {
  if (leg.length <= 0.0) return 0.0;
  return specfun::integrate([&](double u) { return leg_time_density(sh, leg, eta, u); }, 0.0,
                            std::sqrt(leg.length), q);
}

// int sqrt(2 m (E + V)) dz along the leg.
double leg_action(const Shape& sh, const Leg& leg, double eta, const specfun::QuadratureSpec& q) {
  if (leg.length <= 0.0) return 0.0;
  return specfun::integrate(
      [&](double u) {
        const double s = u * u;
        return 2.0 * u * std::sqrt(2.0 * sh.m * (eta + s * reduced_slope(sh, leg, s)));
      },
      0.0, std::sqrt(leg.length), q);
}

int side_of(double z, double xm) { return z > xm ? 1 : (z < xm ? -1 : 0); }

// The solved path: anchor offset, energy offset and the two legs (toward y and toward x).
struct PathSolution {
  PathBranch branch = PathBranch::direct;
  double eta = 0.0;
  Leg leg_y, leg_x;
  double anchor_excess = 0.0;  // V(x_a) - V(xmin)
};

// Geometry of the endpoints relative to the minimum.
struct Endpoints {
  int side_y, side_x;
  bool same_side;
  double dy, dx;  // |y - xm|, |x - xm|
};

Endpoints classify(const Shape& sh, double x, double y) {
  Endpoints e;
  e.side_y = side_of(y, sh.xm);
  e.side_x = side_of(x, sh.xm);
  e.dy = std::fabs(y - sh.xm);
  e.dx = std::fabs(x - sh.xm);
  e.same_side = e.side_y != 0 && e.side_y == e.side_x;
  return e;
}

// Paths with the anchor at distance delta from xmin on the common side.
PathSolution same_side_path(const Endpoints& e, double delta, double eta, PathBranch b) {
  PathSolution s;
  s.branch = b;
  s.eta = eta;
  s.leg_y = {e.side_y, delta, std::max(0.0, e.dy - delta)};
  s.leg_x = {e.side_x, delta, std::max(0.0, e.dx - delta)};
  return s;
}

PathSolution crossing_path(const Endpoints& e, double eta) {
  PathSolution s;
  s.branch = PathBranch::direct;
  s.eta = eta;
  s.leg_y = {e.side_y == 0 ? 1 : e.side_y, 0.0, e.dy};
  s.leg_x = {e.side_x == 0 ? 1 : e.side_x, 0.0, e.dx};
  return s;
}

double path_time(const Shape& sh, const PathSolution& ps, const specfun::QuadratureSpec& q) {
  return leg_time(sh, ps.leg_y, ps.eta, q) + leg_time(sh, ps.leg_x, ps.eta, q);
}

// Root of a decreasing function h on [lo, hi] with h(lo) > 0 > h(hi), by the
// Illinois variant of regula falsi.
double illinois(const std::function<double(double)>& h, double lo, double hlo, double hi, double hhi, double ftol,
                double xtol) {
  int side = 0;
  for (int it = 0; it < 200; ++it) {
    double c = (lo * hhi - hi * hlo) / (hhi - hlo);
    if (!(c > lo && c < hi)) c = 0.5 * (lo + hi);
    const double hc = h(c);
    if (std::fabs(hc) <= ftol || hi - lo <= xtol) return c;
    if (hc > 0.0) {
      lo = c;
      hlo = hc;
      if (side == 1) hhi *= 0.5;
      side = 1;
    } else {
      hi = c;
      hhi = hc;
      if (side == -1) hlo *= 0.5;
      side = -1;
    }
  }
  return 0.5 * (lo + hi);
}

// Solves T(eta) = T over eta in (0, inf) for a path family in which the
// transit time decreases in eta.  Returns eta = 0 when even the eta -> 0 limit
// is not long enough (only possible when the eta = 0 time is finite).
double solve_eta(const Shape& sh, const std::function<PathSolution(double)>& make, double T,
                 const QuadratureSolverOptions& opt) {
  auto h = [&](double logeta) { return path_time(sh, make(std::exp(logeta)), opt.quad) - T; };
  double p0 = std::log(std::max(1e-12, sh.v2 + 1e-300));
  double h0 = h(p0);
  double lo, hlo, hi, hhi;
  if (h0 > 0.0) {
    lo = p0;
    hlo = h0;
    hi = p0;
    do {
      hi += 4.0;
      hhi = h(hi);
      if (hi > 700.0) throw ConvergenceError("quadrature solver: cannot make the path short enough");
    } while (hhi > 0.0);
  } else {
    hi = p0;
    hhi = h0;
    lo = p0;
    do {
      lo -= 4.0;
      if (lo < -690.0) return 0.0;
      hlo = h(lo);
    } while (hlo <= 0.0);
  }
  return std::exp(illinois(h, lo, hlo, hi, hhi, opt.time_rel_tol * T, 1e-15));
}

PathSolution solve_path(const ActionParams1D& p, double x, double y, double T, const QuadratureSolverOptions& opt) {
  const Shape sh = shape_of(p);
  const Endpoints e = classify(sh, x, y);
  if (e.side_x == 0 && e.side_y == 0) {
    PathSolution s;
    s.branch = PathBranch::constant;
    return s;
  }
  if (!e.same_side) {
    return crossing_path(e, solve_eta(sh, [&](double eta) { return crossing_path(e, eta); }, T, opt));
  }
  const double dnear = std::min(e.dx, e.dy);
  const double t_star = path_time(sh, same_side_path(e, dnear, 0.0, PathBranch::direct), opt.quad);
  if (T < t_star) {
    auto make = [&](double eta) { return same_side_path(e, dnear, eta, PathBranch::direct); };
    PathSolution s = make(solve_eta(sh, make, T, opt));
    s.anchor_excess = anchor_excess(sh, dnear, e.side_y);
    return s;
  }
  // Turning branch: anchor offset delta in (0, dnear], time decreasing in delta.
  auto h = [&](double logd) {
    return path_time(sh, same_side_path(e, std::exp(logd), 0.0, PathBranch::turning), opt.quad) - T;
  };
  const double hi = std::log(dnear);
  const double hhi = t_star - T;
  double lo = hi, hlo;
  do {
    lo -= 2.0;
    if (lo < -690.0) throw ConvergenceError("quadrature solver: turning point too close to the minimum");
    hlo = h(lo);
  } while (hlo <= 0.0);
  const double delta = hhi == 0.0 ? dnear : std::exp(illinois(h, lo, hlo, hi, hhi, opt.time_rel_tol * T, 1e-15));
  PathSolution s = same_side_path(e, delta, 0.0, PathBranch::turning);
  s.anchor_excess = anchor_excess(sh, delta, e.side_y);
  return s;
}

void check_inputs(const ActionParams1D& p, double x, double y, double T) {
  validate(p);
  if (!(p.v2 > 0.0)) throw DomainError("trajectory solver requires a confining potential (v2 > 0)");
  if (p.vm2 > 0.0 && !(x > 0.0 && y > 0.0)) throw DomainError("trajectory endpoints must be > 0 when vm2 > 0");
  if (!(T > 0.0) || !std::isfinite(T)) throw DomainError("transition time must be positive");
}

ActionValue evaluate(const ActionParams1D& p, const PathSolution& ps, double T, const QuadratureSolverOptions& opt) {
  const Shape sh = shape_of(p);
  const double vmin = potential_1d_min_value(p);
  ActionValue av;
  av.branch = ps.branch;
  if (ps.branch == PathBranch::constant) {
    av.energy = -vmin;
    av.action = vmin * T;
    return av;
  }
  av.energy = ps.eta - vmin - ps.anchor_excess;
  const double kinetic_like = leg_action(sh, ps.leg_y, ps.eta, opt.quad) + leg_action(sh, ps.leg_x, ps.eta, opt.quad);
  av.action = kinetic_like + (vmin + ps.anchor_excess - ps.eta) * T;
  return av;
}

// Finds u in [0, sqrt(L)] with leg time tau(u) = target, processing targets in
// increasing order; (u0, tau0) is the last solved point.
double invert_leg_time(const Shape& sh, const Leg& leg, double eta, double target, double& u0, double& tau0,
                       const specfun::QuadratureSpec& q) {
  const double umax = std::sqrt(leg.length);
  auto tau_at = [&](double u) {
    return tau0 + specfun::integrate([&](double w) { return leg_time_density(sh, leg, eta, w); }, u0, u, q);
  };
  double lo = u0, hi = umax;
  double u = std::clamp(u0 + (target - tau0) / std::max(leg_time_density(sh, leg, eta, std::max(u0, 1e-300)), 1e-300),
                        lo, hi);
  for (int it = 0; it < 100; ++it) {
    const double f = tau_at(u) - target;
    if (std::fabs(f) <= 1e-13 * (1.0 + std::fabs(target))) break;
    (f < 0.0 ? lo : hi) = u;
    const double g = leg_time_density(sh, leg, eta, std::max(u, 1e-300));
    double next = u - f / g;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (hi - lo <= 1e-15 * (1.0 + umax)) break;
    u = next;
  }
  const double tau_new = tau_at(u);
  u0 = u;
  tau0 = tau_new;
  return u;
}

}  // namespace

double transit_time(const ActionParams1D& p, double E, double x, double y, bool via_turning_point,
                    const QuadratureSolverOptions& opt) {
  check_inputs(p, x, y, 1.0);
  const Shape sh = shape_of(p);
  const Endpoints e = classify(sh, x, y);
  const double vmin = potential_1d_min_value(p);
  const double eps = E + vmin;  // E + V(xmin)
  if (!via_turning_point) {
    if (!e.same_side) {
      if (!(eps > 0.0)) throw DomainError("transit_time: no direct path across the minimum at this energy");
      return path_time(sh, crossing_path(e, eps), opt.quad);
    }
    const double dnear = std::min(e.dx, e.dy);
    double eta = eps + anchor_excess(sh, dnear, e.side_y);
    if (eta < 0.0 && eta > -1e-13 * (1.0 + std::fabs(E))) eta = 0.0;
    if (!(eta >= 0.0)) throw DomainError("transit_time: energy too low for a direct path");
    return path_time(sh, same_side_path(e, dnear, eta, PathBranch::direct), opt.quad);
  }
  if (!e.same_side) throw DomainError("transit_time: a turning path needs both endpoints on one side of the minimum");
  // Anchor where V(x_a) = -E on the endpoints' side, so V(x_a) - V(xmin) = -eps.
  if (!(eps < 0.0)) throw DomainError("transit_time: turning point would sit at or beyond the minimum");
  double delta;
  const double c = std::sqrt(-eps / sh.v2);
  if (sh.vm2 == 0.0) {
    delta = c;
  } else {
    const double xa = 0.5 * (e.side_y * c + std::sqrt(c * c + 4.0 * sh.xm * sh.xm));
    delta = std::fabs(xa - sh.xm);
  }
  const double dnear = std::min(e.dx, e.dy);
  if (delta > dnear * (1.0 + 1e-12)) throw DomainError("transit_time: turning point lies beyond an endpoint");
  delta = std::min(delta, dnear);
  return path_time(sh, same_side_path(e, delta, 0.0, PathBranch::turning), opt.quad);
}

BranchTimes branch_times(const ActionParams1D& p, double x, double y, const QuadratureSolverOptions& opt) {
  check_inputs(p, x, y, 1.0);
  const Shape sh = shape_of(p);
  const Endpoints e = classify(sh, x, y);
  BranchTimes bt;
  if (!e.same_side) {
    bt.direct_max = std::numeric_limits<double>::infinity();
    return bt;
  }
  bt.has_turning = true;
  bt.direct_max = path_time(sh, same_side_path(e, std::min(e.dx, e.dy), 0.0, PathBranch::direct), opt.quad);
  return bt;
}

ActionValue quadrature_action(const ActionParams1D& p, double x, double y, double T,
                              const QuadratureSolverOptions& opt) {
  check_inputs(p, x, y, T);
  return evaluate(p, solve_path(p, x, y, T, opt), T, opt);
}

EuclideanTrajectory solve_trajectory_quadrature(const ActionParams1D& p, double x, double y, double T, int n_samples,
                                                const QuadratureSolverOptions& opt) {
  check_inputs(p, x, y, T);
  if (n_samples < 2) throw DomainError("solve_trajectory_quadrature: need at least 2 samples");
  const PathSolution ps = solve_path(p, x, y, T, opt);
  const ActionValue av = evaluate(p, ps, T, opt);
  const Shape sh = shape_of(p);

  EuclideanTrajectory tr;
  tr.method = SolverMethod::quadrature;
  tr.branch = ps.branch;
  tr.energy = av.energy;
  tr.action = av.action;
  const auto n = static_cast<std::size_t>(n_samples);
  tr.times.resize(n);
  tr.positions.resize(n);
  tr.velocities.resize(n);
  for (std::size_t k = 0; k < n; ++k) tr.times[k] = T * static_cast<double>(k) / static_cast<double>(n - 1);

  if (ps.branch == PathBranch::constant) {
    std::fill(tr.positions.begin(), tr.positions.end(), sh.xm);
    std::fill(tr.velocities.begin(), tr.velocities.end(), 0.0);
    return tr;
  }

  const double tau_y = leg_time(sh, ps.leg_y, ps.eta, opt.quad);
  auto place = [&](const Leg& leg, double u, int toward) {
    // toward = -1 moves in to the anchor, +1 moves out; returns (z, zdot).
    const double s = u * u;
    const double xa = sh.xm + leg.side * leg.delta;
    const double speed = std::sqrt(2.0 * (ps.eta + s * reduced_slope(sh, leg, s)) / sh.m);
    return std::pair<double, double>{xa + leg.side * s, toward * leg.side * speed};
  };

  // Leg toward x: leg time grows with t.
  {
    double u0 = 0.0, tau0 = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double t = tr.times[k];
      if (t < tau_y) continue;
      const double target = std::min(t - tau_y, T - tau_y);
      const double u = ps.leg_x.length > 0.0 ? invert_leg_time(sh, ps.leg_x, ps.eta, target, u0, tau0, opt.quad) : 0.0;
      std::tie(tr.positions[k], tr.velocities[k]) = place(ps.leg_x, u, +1);
    }
  }
  // Leg toward y: leg time tau_y - t shrinks with t, so walk backwards.
  {
    double u0 = 0.0, tau0 = 0.0;
    for (std::size_t k = n; k-- > 0;) {
      const double t = tr.times[k];
      if (t >= tau_y) continue;
      const double u = invert_leg_time(sh, ps.leg_y, ps.eta, tau_y - t, u0, tau0, opt.quad);
      std::tie(tr.positions[k], tr.velocities[k]) = place(ps.leg_y, u, -1);
    }
  }
  tr.positions.front() = y;
  tr.positions.back() = x;
  return tr;
}

double discrete_action(const ActionParams1D& p, const std::vector<double>& positions, double dt) {
  // Neumaier-compensated sum: long meshes otherwise lose digits.
  double sum = 0.0, comp = 0.0;
  for (std::size_t k = 0; k + 1 < positions.size(); ++k) {
    const double v = (positions[k + 1] - positions[k]) / dt;
    const double term =
        dt * (0.5 * p.m * v * v + 0.5 * (potential_1d(p, positions[k]) + potential_1d(p, positions[k + 1])));
    const double t = sum + term;
    comp += std::fabs(sum) >= std::fabs(term) ? (sum - t) + term : (term - t) + sum;
    sum = t;
  }
  return sum + comp;
}

EuclideanTrajectory solve_trajectory_relaxation(const ActionParams1D& p, double x, double y, double T,
                                                int mesh_density, const RelaxationOptions& opt) {
  check_inputs(p, x, y, T);
  if (mesh_density <= 0) throw DomainError("relaxation: mesh density must be positive");
  const long n_intervals = std::lround(mesh_density * T);
  if (n_intervals < 8) throw DomainError("relaxation: fewer than 8 mesh intervals");
  const auto n = static_cast<std::size_t>(n_intervals);
  const double dt = T / static_cast<double>(n);

  EuclideanTrajectory tr;
  tr.method = SolverMethod::relaxation;
  tr.mesh_density = mesh_density;
  tr.times.resize(n + 1);
  tr.positions.resize(n + 1);
  for (std::size_t k = 0; k <= n; ++k) tr.times[k] = dt * static_cast<double>(k);

  // Initial guess.
  bool seeded = false;
  if (opt.seed_from_quadrature) {
    try {
      const EuclideanTrajectory seed = solve_trajectory_quadrature(p, x, y, T, std::max(2, opt.seed_samples));
      tr.branch = seed.branch;
      const double h = T / static_cast<double>(seed.times.size() - 1);
      for (std::size_t k = 0; k <= n; ++k) {
        const double pos = tr.times[k] / h;
        const auto j = std::min(static_cast<std::size_t>(pos), seed.times.size() - 2);
        const double w = pos - static_cast<double>(j);
        tr.positions[k] = (1.0 - w) * seed.positions[j] + w * seed.positions[j + 1];
      }
      seeded = true;
    } catch (const std::exception&) {
      seeded = false;
    }
  }
  if (!seeded) {
    for (std::size_t k = 0; k <= n; ++k) tr.positions[k] = y + (x - y) * tr.times[k] / T;
  }
  tr.positions.front() = y;
  tr.positions.back() = x;

  const double c = p.m / (dt * dt);
  std::vector<double> rhs(n + 1), diag(n + 1), cprime(n + 1), step(n + 1);
  auto& xs = tr.positions;
  bool converged = false;
  double prev_step = std::numeric_limits<double>::infinity();
  for (int it = 0; it < opt.max_iterations; ++it) {
    tr.iterations = it + 1;
    // Newton system J d = -R with J = c tridiag(1, -2, 1) - diag(V'').
    for (std::size_t k = 1; k < n; ++k) {
      rhs[k] = -(c * (xs[k + 1] - 2.0 * xs[k] + xs[k - 1]) - potential_1d_deriv(p, xs[k]));
      diag[k] = -2.0 * c - potential_1d_second_deriv(p, xs[k]);
    }
    // Thomas algorithm, off-diagonals all equal to c.
    cprime[1] = c / diag[1];
    step[1] = rhs[1] / diag[1];
    for (std::size_t k = 2; k < n; ++k) {
      const double denom = diag[k] - c * cprime[k - 1];
      cprime[k] = c / denom;
      step[k] = (rhs[k] - c * step[k - 1]) / denom;
    }
    for (std::size_t k = n - 1; k-- > 1;) step[k] -= cprime[k] * step[k + 1];

    double lambda = 1.0;
    if (p.vm2 > 0.0) {
      for (;;) {
        bool ok = true;
        for (std::size_t k = 1; k < n; ++k) {
          if (!(xs[k] + lambda * step[k] > 0.0)) {
            ok = false;
            break;
          }
        }
        if (ok) break;
        lambda *= 0.5;
        if (lambda < 1e-12) throw PositivityError("relaxation: Newton iterate cannot stay in x > 0");
      }
    }
    double max_step = 0.0, max_x = 0.0;
    for (std::size_t k = 1; k < n; ++k) {
      xs[k] += lambda * step[k];
      max_step = std::max(max_step, std::fabs(lambda * step[k]));
      max_x = std::max(max_x, std::fabs(xs[k]));
    }
    if (!std::isfinite(max_step)) throw ConvergenceError("relaxation: Newton iteration diverged");
    if (lambda == 1.0 && max_step <= opt.step_tol * (1.0 + max_x)) {
      converged = true;
      break;
    }
    // On fine meshes the residual carries roundoff ~ m eps x / dt^2, so the
    // steps bottom out well above step_tol; stop once they stop shrinking.
    if (lambda == 1.0 && max_step <= 1e-6 * (1.0 + max_x) && max_step > 0.25 * prev_step) {
      converged = true;
      break;
    }
    prev_step = lambda == 1.0 ? max_step : std::numeric_limits<double>::infinity();
  }
  if (!converged) {
    std::ostringstream os;
    os << "relaxation: no convergence after " << opt.max_iterations << " Newton iterations";
    throw ConvergenceError(os.str());
  }
  tr.action = discrete_action(p, xs, dt);
  // Euclidean energy from the first interval's midpoint (diagnostic only).
  const double v0 = (xs[1] - xs[0]) / dt;
  tr.energy = 0.5 * p.m * v0 * v0 - potential_1d(p, 0.5 * (xs[0] + xs[1]));
  if (!seeded) tr.branch = PathBranch::direct;
  return tr;
}

}  // namespace qaction
