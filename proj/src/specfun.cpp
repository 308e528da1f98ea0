#include "qaction/specfun.hpp"

#include <array>
#include <atomic>
#include <cfloat>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>
#include <vector>

#include "qaction/model.hpp"

namespace qaction::specfun {

namespace {

std::atomic<double> g_crossover_override{0.0};

constexpr double kLogMax = 709.78;  // ln(DBL_MAX)

// ln I_nu(z) from the ascending series (z/2)^nu / Gamma(nu+1) * sum_k t_k,
// with t_0 = 1, t_k = t_{k-1} (z^2/4) / (k (nu + k)).  All terms are positive;
// the partial sum is rescaled when it grows large so that z up to the
// crossover never overflows.
double log_bessel_series(double nu, double z) {
  const double q = 0.25 * z * z;
  double log_scale = nu * std::log(0.5 * z) - std::lgamma(nu + 1.0);
  double sum = 1.0, term = 1.0;
  for (int k = 1; k < 100000; ++k) {
    term *= q / (k * (nu + k));
    sum += term;
    if (sum > 1e280) {
      sum *= 1e-280;
      term *= 1e-280;
      log_scale += 280.0 * std::log(10.0);
    }
    if (term < 1e-17 * sum && k > 0.5 * z) break;
  }
  return log_scale + std::log(sum);
}

// ln[e^{-z} I_nu(z)] from the large-argument expansion
//   e^{-z} I_nu(z) ~ (2 pi z)^{-1/2} sum_k (-1)^k a_k(nu) / z^k,
//   a_k = prod_{j<=k} (4 nu^2 - (2j-1)^2) / (k! 8^k).
// Terminates exactly for half-integer orders.
double log_bessel_scaled_asymptotic(double nu, double z) {
  const double mu = 4.0 * nu * nu;
  double sum = 1.0, term = 1.0, prev = std::numeric_limits<double>::infinity();
  for (int k = 1; k < 500; ++k) {
    const double odd = 2.0 * k - 1.0;
    term *= -(mu - odd * odd) / (k * 8.0 * z);
    const double mag = std::fabs(term);
    if (mag == 0.0) break;
    if (mag > prev) break;  // asymptotic series started to diverge
    sum += term;
    prev = mag;
    if (mag < 1e-17 * std::fabs(sum)) break;
  }
  return std::log(sum) - 0.5 * std::log(2.0 * M_PI * z);
}

void check_bessel_args(double nu, double z) {
  if (!(nu >= 0.0) || !std::isfinite(nu)) throw DomainError("bessel_i: order must be >= 0");
  if (!(z >= 0.0) || std::isnan(z)) throw DomainError("bessel_i: argument must be >= 0");
}

// ln I_nu(z) - z, the common core of every entry point.
double log_bessel_scaled(double nu, double z) {
  if (z >= bessel_crossover(nu)) return log_bessel_scaled_asymptotic(nu, z);
  return log_bessel_series(nu, z) - z;
}

}  // namespace

namespace detail {
void set_bessel_crossover_override(double z) { g_crossover_override.store(z); }
double bessel_crossover_override() { return g_crossover_override.load(); }
}  // namespace detail

double bessel_crossover(double nu) {
  const double forced = g_crossover_override.load();
  if (forced > 0.0) return forced;
  return std::max(30.0, nu * nu);
}

double log_bessel_i(double nu, double z) {
  check_bessel_args(nu, z);
  if (z == 0.0) return nu == 0.0 ? 0.0 : -std::numeric_limits<double>::infinity();
  return log_bessel_scaled(nu, z) + z;
}

double bessel_i_scaled(double nu, double z) {
  check_bessel_args(nu, z);
  if (z == 0.0) return nu == 0.0 ? 1.0 : 0.0;
  return std::exp(log_bessel_scaled(nu, z));
}

double bessel_i(double nu, double z) {
  const double l = log_bessel_i(nu, z);
  if (l > kLogMax) throw std::overflow_error("bessel_i: result exceeds double range");
  return std::exp(l);
}

double reg_lower_gamma(double a, double x) {
  if (!(a > 0.0)) throw DomainError("reg_lower_gamma: a must be > 0");
  if (!(x >= 0.0)) throw DomainError("reg_lower_gamma: x must be >= 0");
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  const double log_pref = -x + a * std::log(x) - std::lgamma(a);
  if (x < a + 1.0) {
    double ap = a, term = 1.0 / a, sum = term;
    for (int n = 0; n < 10000; ++n) {
      ap += 1.0;
      term *= x / ap;
      sum += term;
      if (std::fabs(term) < std::fabs(sum) * 1e-17) break;
    }
    return std::min(1.0, sum * std::exp(log_pref));
  }
  // Continued fraction for Q(a, x), modified Lentz.
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
  for (int i = 1; i < 10000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-16) break;
  }
  return std::max(0.0, 1.0 - std::exp(log_pref) * h);
}

double reg_lower_gamma_inverse(double a, double p, double tol) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("reg_lower_gamma_inverse: p must be in (0,1)");
  double lo = 0.0, hi = std::max(1.0, a);
  while (reg_lower_gamma(a, hi) < p) hi *= 2.0;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (reg_lower_gamma(a, mid) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

namespace {

// Kronrod 15 / Gauss 7 nodes and weights on [-1, 1].
constexpr std::array<double, 8> kXgk = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                                        0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                                        0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                                        0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                                        0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                                        0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                                        0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                                       0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a, b, value, error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

template <class F>
Segment gauss_kronrod(const F& f, double a, double b) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  const double fc = f(c);
  double kron = fc * kWgk[7];
  double gauss = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kXgk[static_cast<std::size_t>(j)];
    const double s = f(c - dx) + f(c + dx);
    kron += kWgk[static_cast<std::size_t>(j)] * s;
    if (j % 2 == 1) gauss += kWg[static_cast<std::size_t>(j / 2)] * s;
  }
  kron *= h;
  gauss *= h;
  double err = std::fabs(kron - gauss);
  if (!std::isfinite(kron)) err = std::numeric_limits<double>::infinity();
  return {a, b, kron, err};
}

template <class F>
double adaptive(const F& f, double a, double b, const QuadratureSpec& spec) {
  if (a == b) return 0.0;
  std::priority_queue<Segment> heap;
  Segment first = gauss_kronrod(f, a, b);
  double total = first.value, total_err = first.error;
  heap.push(first);
  for (int it = 0; it < spec.max_subdivisions; ++it) {
    if (total_err <= std::max(spec.abs_tol, spec.rel_tol * std::fabs(total))) return total;
    Segment worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      // Interval cannot be split further in floating point; accept it.
      heap.push({worst.a, worst.b, worst.value, 0.0});
      total_err -= worst.error;
      continue;
    }
    Segment l = gauss_kronrod(f, worst.a, mid);
    Segment r = gauss_kronrod(f, mid, worst.b);
    total += l.value + r.value - worst.value;
    total_err += l.error + r.error - worst.error;
    heap.push(l);
    heap.push(r);
    if (!std::isfinite(total)) throw ConvergenceError("integrate: integrand is not finite");
  }
  // Recompute the sums to shed accumulated rounding before the final test.
  total = 0.0;
  total_err = 0.0;
  while (!heap.empty()) {
    total += heap.top().value;
    total_err += heap.top().error;
    heap.pop();
  }
  if (total_err <= std::max(spec.abs_tol, spec.rel_tol * std::fabs(total))) return total;
  throw ConvergenceError("integrate: max_subdivisions exhausted (estimated error " + std::to_string(total_err) +
                         ", value " + std::to_string(total) + ")");
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b, const QuadratureSpec& spec,
                 Singular singular) {
  if (!(spec.abs_tol > 0.0 && spec.rel_tol > 0.0)) throw DomainError("integrate: tolerances must be > 0");
  if (spec.max_subdivisions <= 0) throw DomainError("integrate: max_subdivisions must be > 0");
  if (std::isnan(a) || std::isnan(b)) throw DomainError("integrate: NaN bound");
  if (b < a) return -integrate(f, b, a, spec,
                               singular == Singular::lower   ? Singular::upper
                               : singular == Singular::upper ? Singular::lower
                                                             : singular);
  if (a == b) return 0.0;
  if (std::isinf(a)) throw DomainError("integrate: lower bound must be finite");

  const bool sing_lo = singular == Singular::lower || singular == Singular::both;
  const bool sing_hi = singular == Singular::upper || singular == Singular::both;

  if (std::isinf(b)) {
    if (sing_lo) {
      return integrate(f, a, a + 1.0, spec, Singular::lower) + integrate(f, a + 1.0, b, spec, Singular::none);
    }
    // x = a + t / (1 - t), t in [0, 1).
    auto g = [&](double t) {
      const double s = 1.0 - t;
      return f(a + t / s) / (s * s);
    };
    return adaptive(g, 0.0, 1.0, spec);
  }
  if (sing_lo && sing_hi) {
    const double mid = 0.5 * (a + b);
    return integrate(f, a, mid, spec, Singular::lower) + integrate(f, mid, b, spec, Singular::upper);
  }
  if (sing_lo) {
    auto g = [&](double u) { return 2.0 * u * f(a + u * u); };
    return adaptive(g, 0.0, std::sqrt(b - a), spec);
  }
  if (sing_hi) {
    auto g = [&](double u) { return 2.0 * u * f(b - u * u); };
    return adaptive(g, 0.0, std::sqrt(b - a), spec);
  }
  return adaptive(f, a, b, spec);
}

}  // namespace qaction::specfun
