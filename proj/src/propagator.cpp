#include "qaction/propagator.hpp"

#include <cmath>

#include "qaction/specfun.hpp"

namespace qaction {

namespace {

// ln sinh(t) for t > 0 without overflow.
double log_sinh(double t) {
  if (t > 20.0) return t - M_LN2 + std::log1p(-std::exp(-2.0 * t));
  return std::log(std::sinh(t));
}

void require_oscillator(const ActionParams1D& p) {
  validate(p);
  if (!(p.v2 > 0.0)) throw DomainError("propagator requires v2 > 0");
}

}  // namespace

double gamma_index(const ActionParams1D& p, const PhysConst& c) {
  validate(p);
  validate(c);
  return 0.5 * std::sqrt(1.0 + 8.0 * p.m * p.vm2 / (c.hbar * c.hbar));
}

double log_euclidean_green(const ActionParams1D& p, double x, double y, double T, const PhysConst& c) {
  require_oscillator(p);
  if (!(x > 0.0) || !(y > 0.0)) throw DomainError("euclidean_green: x and y must be > 0");
  if (!(T > 0.0)) throw DomainError("euclidean_green: T must be > 0");
  const double w = p.omega();
  const double a = p.m * w / c.hbar;
  const double wt = w * T;
  const double ls = log_sinh(wt);
  const double coth = 1.0 / std::tanh(wt);
  const double z = a * x * y * std::exp(-ls);
  const double gamma = gamma_index(p, c);
  // ln I_g(z) = z + ln[e^{-z} I_g(z)]; the z term combines with the Gaussian
  // exponent into -(a/2)(x^2+y^2)coth + a x y / sinh, which is kept as is.
  return std::log(a) - ls + 0.5 * std::log(x * y) - 0.5 * a * (x * x + y * y) * coth + z +
         std::log(specfun::bessel_i_scaled(gamma, z));
}

PropagatorSample euclidean_green(const ActionParams1D& p, double x, double y, double T, const PhysConst& c) {
  PropagatorSample s;
  s.x = x;
  s.y = y;
  s.T = T;
  s.log_value = log_euclidean_green(p, x, y, T, c);
  s.value = std::exp(s.log_value);
  return s;
}

double log_harmonic_green(const ActionParams1D& p, double x, double y, double T, const PhysConst& c) {
  require_oscillator(p);
  if (!(T > 0.0)) throw DomainError("harmonic_green: T must be > 0");
  const double w = p.omega();
  const double a = p.m * w / c.hbar;
  const double wt = w * T;
  const double ls = log_sinh(wt);
  const double coth = 1.0 / std::tanh(wt);
  const double csch = std::exp(-ls);
  return 0.5 * (std::log(a / (2.0 * M_PI)) - ls) - 0.5 * a * ((x * x + y * y) * coth - 2.0 * x * y * csch) -
         p.v0 * T / c.hbar;
}

double ground_state_quantile(const ActionParams1D& p, double fraction, const PhysConst& c) {
  require_oscillator(p);
  const double gamma = gamma_index(p, c);
  const double a = p.m * p.omega() / c.hbar;
  // With t = a x^2 the cumulative probability is P(gamma + 1, a x^2).
  const double t = specfun::reg_lower_gamma_inverse(gamma + 1.0, fraction, 1e-12);
  return std::sqrt(t / a);
}

SpectralData ground_state(const ActionParams1D& p, const PhysConst& c) {
  require_oscillator(p);
  SpectralData sd;
  sd.gamma = gamma_index(p, c);
  const double w = p.omega();
  const double a = p.m * w / c.hbar;
  sd.E_gr = c.hbar * w * (1.0 + sd.gamma);
  sd.T_sc = 1.0 / sd.E_gr;
  // int_0^inf x^(1+2g) e^(-a x^2) dx = Gamma(g+1) / (2 a^(g+1)).
  sd.Z0 = 2.0 * std::exp((sd.gamma + 1.0) * std::log(a) - std::lgamma(sd.gamma + 1.0));
  sd.Lambda_sc = ground_state_quantile(p, 0.95, c);
  return sd;
}

double wavefunction(const SpectralData& sd, const ActionParams1D& p, double x, const PhysConst& c) {
  if (!(x > 0.0)) throw DomainError("wavefunction: x must be > 0");
  const double a = p.m * p.omega() / c.hbar;
  return std::exp(0.5 * std::log(sd.Z0) + (0.5 + sd.gamma) * std::log(x) - 0.5 * a * x * x);
}

}  // namespace qaction
