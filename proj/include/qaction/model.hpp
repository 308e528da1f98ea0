#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace qaction {

/// Thrown when an argument lies outside the domain of a function.
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// Thrown when an iterative procedure fails to converge or bracket.
class ConvergenceError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct PhysConst {
  double hbar = 1.0;
};

enum class ActionRole { classical, quantum };

/// Mass and potential coefficients of a 1-D action of classical form,
///   V(x) = v2 x^2 + vm2 x^-2 + v0.
/// The same type carries both the classical parameters and the fitted
/// (renormalized) quantum parameters; `role` is informational only.
struct ActionParams1D {
  double m = 1.0;
  double v2 = 0.5;
  double vm2 = 1.0;
  double v0 = 0.0;
  ActionRole role = ActionRole::classical;

  double omega() const { return std::sqrt(2.0 * v2 / m); }
  double g() const { return vm2; }

  /// Builds the parameters from oscillator frequency and inverse-square coupling.
  static ActionParams1D from_omega_g(double m, double omega, double g) {
    return {m, 0.5 * m * omega * omega, g, 0.0, ActionRole::classical};
  }
};

/// 2-D potential v2 (x^2+y^2) + v22 x^2 y^2 + v4 (x^4+y^4).
struct ActionParams2D {
  double m = 1.0;
  double v2 = 0.5;
  double v22 = 0.05;
  double v4 = 0.0;
  ActionRole role = ActionRole::classical;
};

struct BoundarySet {
  std::vector<double> initial_points;
  std::vector<double> final_points;
  double T = 1.0;

  std::size_t size() const { return initial_points.size() * final_points.size(); }
};

/// `n` points uniformly spaced over [lo, hi], endpoints included (a single
/// point sits at the midpoint).
std::vector<double> uniform_points(double lo, double hi, int n);

void validate(const PhysConst& c);
void validate(const ActionParams1D& p);
void validate(const ActionParams2D& p);
void validate(const BoundarySet& b);

double potential_1d(const ActionParams1D& p, double x);
double potential_1d_deriv(const ActionParams1D& p, double x);
double potential_1d_second_deriv(const ActionParams1D& p, double x);

/// Location of the minimum on x > 0: (vm2/v2)^(1/4), or 0 for the pure
/// oscillator (vm2 = 0).
double potential_1d_min_location(const ActionParams1D& p);
double potential_1d_min_value(const ActionParams1D& p);

/// V(z) - V(xmin), evaluated without cancellation: v2 (z^2 - xmin^2)^2 / z^2.
double potential_1d_excess(const ActionParams1D& p, double z);

double potential_2d(const ActionParams2D& p, double x, double y);

std::string to_string(ActionRole r);

}  // namespace qaction
