#include "qaction/model.hpp"

#include <algorithm>

namespace qaction {

std::vector<double> uniform_points(double lo, double hi, int n) {
  if (n <= 0) throw DomainError("uniform_points: n must be positive");
  std::vector<double> pts(static_cast<std::size_t>(n));
  if (n == 1) {
    pts[0] = 0.5 * (lo + hi);
    return pts;
  }
  for (int i = 0; i < n; ++i) pts[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
  return pts;
}

void validate(const PhysConst& c) {
  if (!(c.hbar > 0.0) || !std::isfinite(c.hbar)) throw DomainError("hbar must be positive");
}

void validate(const ActionParams1D& p) {
  if (!(p.m > 0.0) || !std::isfinite(p.m)) throw DomainError("mass m must be positive");
  if (!(p.v2 >= 0.0) || !std::isfinite(p.v2)) throw DomainError("v2 must be >= 0");
  if (!(p.vm2 >= 0.0) || !std::isfinite(p.vm2)) throw DomainError("vm2 must be >= 0");
  if (!std::isfinite(p.v0)) throw DomainError("v0 must be finite");
}

void validate(const ActionParams2D& p) {
  if (!(p.m > 0.0) || !std::isfinite(p.m)) throw DomainError("mass m must be positive");
  if (!(p.v2 >= 0.0)) throw DomainError("v2 must be >= 0");
  if (!(p.v22 >= 0.0)) throw DomainError("v22 must be >= 0");
  if (!(p.v4 >= 0.0)) throw DomainError("v4 must be >= 0");
}

void validate(const BoundarySet& b) {
  if (b.initial_points.empty()) throw DomainError("boundary set: initial_points is empty");
  if (b.final_points.empty()) throw DomainError("boundary set: final_points is empty");
  if (!(b.T > 0.0) || !std::isfinite(b.T)) throw DomainError("boundary set: T must be positive");
  auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
  if (!std::all_of(b.initial_points.begin(), b.initial_points.end(), positive))
    throw DomainError("boundary set: initial_points must be > 0");
  if (!std::all_of(b.final_points.begin(), b.final_points.end(), positive))
    throw DomainError("boundary set: final_points must be > 0");
}

double potential_1d(const ActionParams1D& p, double x) {
  if (p.vm2 > 0.0 && !(x > 0.0)) throw DomainError("potential_1d: x must be > 0 when vm2 > 0");
  double v = p.v2 * x * x + p.v0;
  if (p.vm2 > 0.0) v += p.vm2 / (x * x);
  return v;
}

double potential_1d_deriv(const ActionParams1D& p, double x) {
  double d = 2.0 * p.v2 * x;
  if (p.vm2 > 0.0) d -= 2.0 * p.vm2 / (x * x * x);
  return d;
}

double potential_1d_second_deriv(const ActionParams1D& p, double x) {
  double d = 2.0 * p.v2;
  if (p.vm2 > 0.0) d += 6.0 * p.vm2 / (x * x * x * x);
  return d;
}

double potential_1d_min_location(const ActionParams1D& p) {
  if (p.vm2 == 0.0) return 0.0;
  if (p.v2 <= 0.0) throw DomainError("potential has no minimum on x > 0 when v2 = 0");
  return std::pow(p.vm2 / p.v2, 0.25);
}

double potential_1d_min_value(const ActionParams1D& p) {
  return 2.0 * std::sqrt(p.v2 * p.vm2) + p.v0;
}

double potential_1d_excess(const ActionParams1D& p, double z) {
  if (p.vm2 == 0.0) return p.v2 * z * z;
  const double xm2 = std::sqrt(p.vm2 / p.v2);
  const double d = z * z - xm2;
  return p.v2 * d * d / (z * z);
}

double potential_2d(const ActionParams2D& p, double x, double y) {
  const double x2 = x * x, y2 = y * y;
  return p.v2 * (x2 + y2) + p.v22 * x2 * y2 + p.v4 * (x2 * x2 + y2 * y2);
}

std::string to_string(ActionRole r) { return r == ActionRole::classical ? "classical" : "quantum"; }

}  // namespace qaction
