#include "qaction/asymptotics.hpp"

#include <cmath>

#include "qaction/propagator.hpp"
#include "qaction/specfun.hpp"

namespace qaction {

AsymptoticPrediction asymptotic_parameters(const ActionParams1D& classical, const PhysConst& c) {
  validate(classical);
  if (!(classical.v2 > 0.0)) throw DomainError("asymptotic_parameters: v2 must be > 0");
  const double w = classical.omega();
  const double gamma = gamma_index(classical, c);
  AsymptoticPrediction a;
  a.m_v2 = 0.5 * classical.m * classical.m * w * w;
  a.m_vm2 = 0.5 * c.hbar * c.hbar * (0.5 + gamma) * (0.5 + gamma);
  a.E_gr = c.hbar * w * (1.0 + gamma);
  a.x_min_quantum = std::pow(a.m_vm2 / a.m_v2, 0.25);
  a.V_min_quantum = a.E_gr;
  return a;
}

ActionParams1D asymptotic_action(const AsymptoticPrediction& a, double m) {
  ActionParams1D q;
  q.role = ActionRole::quantum;
  q.m = m;
  q.v2 = a.m_v2 / m;
  q.vm2 = a.m_vm2 / m;
  q.v0 = a.V_min_quantum - 2.0 * std::sqrt(q.v2 * q.vm2);
  validate(q);
  return q;
}

std::vector<double> transformation_law_residual(const ActionParams1D& classical, const ActionParams1D& quantum,
                                                double E_gr, const std::vector<double>& x_grid, double tube,
                                                const PhysConst& c) {
  validate(classical);
  validate(quantum);
  if (!(quantum.v2 > 0.0)) throw DomainError("transformation law: quantum potential needs v2 > 0");
  const double xm = potential_1d_min_location(quantum);
  std::vector<double> out;
  out.reserve(x_grid.size());
  for (double x : x_grid) {
    if (!(x > 0.0)) throw DomainError("transformation law: grid points must be > 0");
    if (std::fabs(x - xm) < tube) throw DomainError("transformation law: grid point inside the tube around x~min");
    const double W = 2.0 * quantum.m * potential_1d_excess(quantum, x);
    const double dW = 2.0 * quantum.m * potential_1d_deriv(quantum, x);
    const double sgn = x > xm ? 1.0 : -1.0;
    const double lhs = 2.0 * classical.m * (potential_1d(classical, x) - E_gr);
    out.push_back(lhs - (W - 0.5 * c.hbar * dW / std::sqrt(W) * sgn));
  }
  return out;
}

namespace {
const specfun::QuadratureSpec kQuad{1e-13, 1e-11, 4000};
}

ReconstructedWavefunction::ReconstructedWavefunction(const ActionParams1D& quantum, const PhysConst& c)
    : q_(quantum), c_(c) {
  validate(q_);
  validate(c_);
  if (!(q_.v2 > 0.0)) throw DomainError("reconstruct_wavefunction: quantum potential needs v2 > 0");
  x_min_ = potential_1d_min_location(q_);
  // Width of the Gaussian that the quadratic part of W produces at x~min.
  const double sigma = std::sqrt(c_.hbar / std::sqrt(q_.m * potential_1d_second_deriv(q_, x_min_)));
  cutoff_ = x_min_ + 16.0 * sigma;
  auto dens = [&](double x) { return std::exp(-2.0 * exponent(x)); };
  double norm2 = specfun::integrate(dens, x_min_, cutoff_, kQuad);
  if (q_.vm2 > 0.0) {
    norm2 += specfun::integrate(dens, 0.0, x_min_, kQuad);
  } else {
    norm2 *= 2.0;
  }
  log_norm_ = 0.5 * std::log(norm2);
}

double ReconstructedWavefunction::exponent(double x) const {
  if (!(x > 0.0)) throw DomainError("reconstruct_wavefunction: x must be > 0");
  const double m = q_.m;
  const double e = specfun::integrate([&](double z) { return std::sqrt(2.0 * m * potential_1d_excess(q_, z)); },
                                      x_min_, x, kQuad);
  return std::fabs(e) / c_.hbar;
}

double ReconstructedWavefunction::operator()(double x) const { return std::exp(-exponent(x) - log_norm_); }

double reconstruct_wavefunction(const ActionParams1D& quantum, double x, const PhysConst& c) {
  if (!(x > 0.0)) throw DomainError("reconstruct_wavefunction: x must be > 0");
  return ReconstructedWavefunction(quantum, c)(x);
}

}  // namespace qaction
