#pragma once

#include <string>
#include <vector>

#include "qaction/model.hpp"
#include "qaction/specfun.hpp"

namespace qaction {

/// Raised by the relaxation solver when a Newton iterate leaves x > 0.
class PositivityError : public ConvergenceError {
public:
  using ConvergenceError::ConvergenceError;
};

enum class SolverMethod { quadrature, relaxation };

/// Which family of Euclidean paths connects the endpoints.
///  - direct: monotone path between the endpoints,
///  - turning: path that moves toward the potential minimum, stops, and returns,
///  - constant: both endpoints sit at the minimum.
enum class PathBranch { direct, turning, constant };

std::string to_string(SolverMethod m);
std::string to_string(PathBranch b);

/// Extremal path of the Euclidean action  int dt [m xdot^2 / 2 + V(x)]  from
/// y at t = 0 to x at t = T.  `energy` is the conserved (m/2) xdot^2 - V.
struct EuclideanTrajectory {
  std::vector<double> times;
  std::vector<double> positions;
  std::vector<double> velocities;  // empty for the relaxation method
  double energy = 0.0;
  double action = 0.0;
  SolverMethod method = SolverMethod::quadrature;
  PathBranch branch = PathBranch::direct;
  int mesh_density = 0;  // meshpoints per unit time (relaxation only)
  int iterations = 0;
};

/// Energy and action without the sampled path; what the fitter needs.
struct ActionValue {
  double energy = 0.0;
  double action = 0.0;
  PathBranch branch = PathBranch::direct;
};

struct QuadratureSolverOptions {
  double time_rel_tol = 1e-10;
  specfun::QuadratureSpec quad{1e-14, 1e-12, 4000};
};

/// Time to travel from y to x at Euclidean energy E, either directly or, when
/// `via_turning_point` is set, through the single turning point V(x_t) = -E
/// that lies between the endpoints and the potential minimum.
/// Throws DomainError when no such real path exists at this energy.
double transit_time(const ActionParams1D& p, double E, double x, double y, bool via_turning_point,
                    const QuadratureSolverOptions& opt = {});

/// Range of transit times reachable on each branch for the given endpoints.
struct BranchTimes {
  double direct_max = 0.0;   // direct branch covers (0, direct_max)
  bool has_turning = false;  // turning branch covers [direct_max, inf)
};
BranchTimes branch_times(const ActionParams1D& p, double x, double y, const QuadratureSolverOptions& opt = {});

/// Energy and action of the extremal path by energy-conservation quadrature.
ActionValue quadrature_action(const ActionParams1D& p, double x, double y, double T,
                              const QuadratureSolverOptions& opt = {});

/// As quadrature_action, plus the path sampled at n_samples uniform times
/// (including both ends) with the matching velocities.
EuclideanTrajectory solve_trajectory_quadrature(const ActionParams1D& p, double x, double y, double T,
                                                int n_samples = 101, const QuadratureSolverOptions& opt = {});

struct RelaxationOptions {
  int max_iterations = 100;
  double step_tol = 1e-13;
  bool seed_from_quadrature = true;
  int seed_samples = 65;
};

/// Discrete extremal path on round(N_t T) uniform intervals, found by damped
/// Newton iteration on  m (x_{k+1} - 2 x_k + x_{k-1}) / dt^2 = V'(x_k).
/// The action is the trapezoidal discretization whose stationarity condition
/// is exactly that equation.
EuclideanTrajectory solve_trajectory_relaxation(const ActionParams1D& p, double x, double y, double T,
                                                int mesh_density, const RelaxationOptions& opt = {});

/// Discrete action of an arbitrary mesh path with uniform step dt.
double discrete_action(const ActionParams1D& p, const std::vector<double>& positions, double dt);

}  // namespace qaction
