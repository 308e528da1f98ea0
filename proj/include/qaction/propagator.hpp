#pragma once

#include "qaction/model.hpp"

namespace qaction {

/// One exact transition amplitude G(x, T; y, 0).
struct PropagatorSample {
  double x = 0.0;  // final point
  double y = 0.0;  // initial point
  double T = 0.0;
  double value = 0.0;
  double log_value = 0.0;
};

/// Ground-state data and the dynamically generated time and length scales.
struct SpectralData {
  double E_gr = 0.0;
  double gamma = 0.0;
  double Z0 = 0.0;
  double T_sc = 0.0;
  double Lambda_sc = 0.0;
};

/// Bessel order (1 + 8 m g / hbar^2)^(1/2) / 2 of the inverse-square propagator.
double gamma_index(const ActionParams1D& p, const PhysConst& c = {});

/// ln G_E(x, T; y, 0) for V = m w^2 x^2 / 2 + g / x^2 on x > 0.  Evaluated in
/// log space through the scaled Bessel function, so it stays finite for
/// arbitrarily large T and x y.
double log_euclidean_green(const ActionParams1D& p, double x, double y, double T, const PhysConst& c = {});

/// The same amplitude packaged with its inputs.  `value` underflows to zero
/// (and `log_value` stays exact) when the amplitude is below double range.
PropagatorSample euclidean_green(const ActionParams1D& p, double x, double y, double T, const PhysConst& c = {});

/// ln of the full-line harmonic oscillator (Mehler) kernel; the exact
/// amplitude for vm2 = 0 when the particle is not confined to x > 0.
double log_harmonic_green(const ActionParams1D& p, double x, double y, double T, const PhysConst& c = {});

/// Ground state from the T -> infinity limit of the propagator:
/// E_gr = hbar w (1 + gamma), psi = Z0^(1/2) x^(1/2+gamma) exp(-m w x^2 / 2 hbar),
/// T_sc = 1 / E_gr and Lambda_sc enclosing 95% of |psi|^2.
SpectralData ground_state(const ActionParams1D& p, const PhysConst& c = {});

/// Radius enclosing probability `fraction` of the ground state.
double ground_state_quantile(const ActionParams1D& p, double fraction, const PhysConst& c = {});

double wavefunction(const SpectralData& sd, const ActionParams1D& p, double x, const PhysConst& c = {});

}  // namespace qaction
