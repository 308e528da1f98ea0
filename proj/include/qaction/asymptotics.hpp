#pragma once

#include <vector>

#include "qaction/model.hpp"

namespace qaction {

/// Large-T quantum action implied by matching the transformation law for the
/// ansatz  V~ = v2~ x^2 + vm2~ x^-2 + v0~.  Only the products with m~ are fixed.
struct AsymptoticPrediction {
  double m_v2 = 0.0;   // m~ v2~ = m^2 w^2 / 2
  double m_vm2 = 0.0;  // m~ vm2~ = hbar^2 (1/2 + gamma)^2 / 2
  double E_gr = 0.0;   // hbar w (1 + gamma)
  double x_min_quantum = 0.0;
  double V_min_quantum = 0.0;  // = E_gr under the offset convention below
};

AsymptoticPrediction asymptotic_parameters(const ActionParams1D& classical, const PhysConst& c = {});

/// Splits the products with the convention m~ = m (the law cannot fix the
/// split) and sets v0~ so that min V~ = E_gr.
ActionParams1D asymptotic_action(const AsymptoticPrediction& a, double m);

/// Residual  2m(V - E_gr) - [W - (hbar/2) W' / sqrt(W) sgn(x - x~min)]  with
/// W = 2 m~ (V~ - V~min), at each grid point. Points closer than `tube` to
/// x~min are rejected (W vanishes there).
std::vector<double> transformation_law_residual(const ActionParams1D& classical, const ActionParams1D& quantum,
                                                double E_gr, const std::vector<double>& x_grid, double tube = 0.05,
                                                const PhysConst& c = {});

/// psi(x) = exp(-int_{x~min}^x sqrt(W(x')) dx' / hbar) / N, normalized on
/// x > 0 (on the full line when vm2~ = 0, using the even extension).
class ReconstructedWavefunction {
public:
  explicit ReconstructedWavefunction(const ActionParams1D& quantum, const PhysConst& c = {});
  double operator()(double x) const;
  /// exponent int_{x~min}^x sqrt(W) dx' / hbar, by quadrature
  double exponent(double x) const;
  double x_min() const { return x_min_; }
  double norm_cutoff() const { return cutoff_; }

private:
  ActionParams1D q_;
  PhysConst c_;
  double x_min_ = 0.0;
  double cutoff_ = 0.0;
  double log_norm_ = 0.0;
};

double reconstruct_wavefunction(const ActionParams1D& quantum, double x, const PhysConst& c = {});

}  // namespace qaction
