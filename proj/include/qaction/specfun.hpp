#pragma once

#include <functional>

namespace qaction::specfun {

struct QuadratureSpec {
  double abs_tol = 1e-12;
  double rel_tol = 1e-10;
  int max_subdivisions = 2000;
};

/// Endpoints at which the integrand may carry an integrable (x-a)^(-1/2)
/// singularity.  A flagged endpoint is removed by the substitution
/// x = a + u^2 (resp. x = b - u^2) before adaptive integration.
enum class Singular { none = 0, lower = 1, upper = 2, both = 3 };

/// Modified Bessel function of the first kind I_nu(z) for real nu >= 0, z >= 0.
/// Throws DomainError for negative arguments and std::overflow_error when the
/// value is not representable; use bessel_i_scaled or log_bessel_i for large z.
double bessel_i(double nu, double z);

/// exp(-z) I_nu(z).
double bessel_i_scaled(double nu, double z);

/// ln I_nu(z); finite for every z > 0.
double log_bessel_i(double nu, double z);

/// Argument above which the large-z expansion replaces the ascending series.
double bessel_crossover(double nu);

namespace detail {
/// Fault-injection hook for verification runs: a positive value forces the
/// series/asymptotic crossover to that argument.  Zero restores the default.
void set_bessel_crossover_override(double z);
double bessel_crossover_override();
}  // namespace detail

/// Regularized lower incomplete gamma P(a, x).
double reg_lower_gamma(double a, double x);

/// x with P(a, x) = p, found by bisection to absolute tolerance `tol`.
double reg_lower_gamma_inverse(double a, double p, double tol = 1e-12);

/// Adaptive 15-point Gauss-Kronrod quadrature over [a, b].  `b` may be
/// +infinity.  Throws ConvergenceError when max_subdivisions is exhausted.
double integrate(const std::function<double(double)>& f, double a, double b,
                 const QuadratureSpec& spec = {}, Singular singular = Singular::none);

}  // namespace qaction::specfun
