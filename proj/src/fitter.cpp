#include "qaction/fitter.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multifit_nlinear.h>
#include <gsl/gsl_multimin.h>

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>

#include "qaction/parallel.hpp"
#include "qaction/propagator.hpp"

namespace qaction {

double predict_log_green(const ActionParams1D& q, double log_Z, double x, double y, double T, const PhysConst& c) {
  return log_Z - quadrature_action(q, x, y, T).action / c.hbar;
}

double predict_log_green_relaxation(const ActionParams1D& q, double log_Z, double x, double y, double T,
                                    int mesh_density, const PhysConst& c) {
  return log_Z - solve_trajectory_relaxation(q, x, y, T, mesh_density).action / c.hbar;
}

std::vector<LogAmplitude> exact_amplitudes(const ActionParams1D& classical, const BoundarySet& bset,
                                           const PhysConst& c) {
  validate(bset);
  std::vector<LogAmplitude> out;
  out.reserve(bset.size());
  for (double y : bset.initial_points) {
    for (double x : bset.final_points) {
      const double lg = classical.vm2 == 0.0 ? log_harmonic_green(classical, x, y, bset.T, c)
                                             : log_euclidean_green(classical, x, y, bset.T, c);
      out.push_back({x, y, bset.T, lg});
    }
  }
  return out;
}

namespace {

constexpr double kBad = 1e300;

// Coordinates: theta = (ln m, ln m v2 [, ln m vm2]). The products are what the
// amplitudes pin down best, so they get their own axes.
struct Problem {
  const std::vector<LogAmplitude>& data;
  const FitOptions& opt;
  int dim;
  int evaluations = 0;

  ActionParams1D params(const double* th) const {
    ActionParams1D q;
    q.role = ActionRole::quantum;
    q.m = std::exp(th[0]);
    q.v2 = std::exp(th[1]) / q.m;
    q.vm2 = dim == 3 ? std::exp(th[2]) / q.m : 0.0;
    q.v0 = 0.0;
    return q;
  }

  // r_i = ln G_i + Sigma_i / hbar; the optimal ln Z is their mean.
  std::vector<double> raw(const double* th) {
    ++evaluations;
    const ActionParams1D q = params(th);
    return parallel_map<double>(
        data.size(),
        [&](std::size_t i) {
          const LogAmplitude& d = data[i];
          const double s = opt.method == SolverMethod::quadrature
                               ? quadrature_action(q, d.x, d.y, d.T, opt.quad).action
                               : solve_trajectory_relaxation(q, d.x, d.y, d.T, opt.mesh_density, opt.relax).action;
          return d.log_value + s / opt.c.hbar;
        },
        opt.jobs);
  }

  static double mean(const std::vector<double>& r) {
    double s = 0.0;
    for (double v : r) s += v;
    return s / static_cast<double>(r.size());
  }

  bool centered(const double* th, std::vector<double>& out) {
    try {
      out = raw(th);
    } catch (const std::exception&) {
      return false;
    }
    const double mu = mean(out);
    for (double& v : out) {
      v -= mu;
      if (!std::isfinite(v)) return false;
    }
    return true;
  }

  double objective(const double* th) {
    std::vector<double> r;
    if (!centered(th, r)) return kBad;
    double s = 0.0;
    for (double v : r) s += v * v;
    return s;
  }
};

using Vec = std::vector<double>;

void coordinate_descent(Problem& pb, Vec& th) {
  double f0 = pb.objective(th.data());
  for (int sweep = 0; sweep < 2; ++sweep) {
    for (int k = 0; k < pb.dim; ++k) {
      Vec t = th;
      auto f = [&](double v) {
        t[k] = v;
        return pb.objective(t.data());
      };
      std::uintmax_t iters = 40;
      const auto best = boost::math::tools::brent_find_minima(f, th[k] - 1.0, th[k] + 1.0, 16, iters);
      if (best.second < f0) {
        th[k] = best.first;
        f0 = best.second;
      }
    }
  }
}

double simplex_trampoline(const gsl_vector* v, void* ctx) {
  return static_cast<Problem*>(ctx)->objective(v->data);
}

void simplex(Problem& pb, Vec& th) {
  gsl_multimin_function fn{&simplex_trampoline, static_cast<std::size_t>(pb.dim), &pb};
  gsl_vector* x = gsl_vector_alloc(pb.dim);
  gsl_vector* step = gsl_vector_alloc(pb.dim);
  for (int k = 0; k < pb.dim; ++k) {
    gsl_vector_set(x, k, th[k]);
    gsl_vector_set(step, k, 0.05);
  }
  gsl_multimin_fminimizer* s = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, pb.dim);
  gsl_multimin_fminimizer_set(s, &fn, x, step);
  for (int it = 0; it < pb.opt.simplex_max_iter; ++it) {
    if (gsl_multimin_fminimizer_iterate(s) != GSL_SUCCESS) break;
    if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(s), pb.opt.simplex_size_tol) == GSL_SUCCESS) break;
  }
  for (int k = 0; k < pb.dim; ++k) th[k] = gsl_vector_get(s->x, k);
  gsl_multimin_fminimizer_free(s);
  gsl_vector_free(step);
  gsl_vector_free(x);
}

constexpr double kJacStep = 1e-5;

// Central-difference Jacobian of the centered residuals; rows = samples.
bool jacobian(Problem& pb, const Vec& th, Eigen::MatrixXd& J) {
  const int n = static_cast<int>(pb.data.size());
  J.resize(n, pb.dim);
  Vec rp, rm;
  for (int k = 0; k < pb.dim; ++k) {
    Vec a = th, b = th;
    a[k] += kJacStep;
    b[k] -= kJacStep;
    if (!pb.centered(a.data(), rp) || !pb.centered(b.data(), rm)) return false;
    for (int i = 0; i < n; ++i) J(i, k) = (rp[i] - rm[i]) / (2.0 * kJacStep);
  }
  return true;
}

int lm_f(const gsl_vector* x, void* ctx, gsl_vector* f) {
  auto* pb = static_cast<Problem*>(ctx);
  Vec r;
  if (!pb->centered(x->data, r)) return GSL_EDOM;
  for (std::size_t i = 0; i < r.size(); ++i) gsl_vector_set(f, i, r[i]);
  return GSL_SUCCESS;
}

int lm_df(const gsl_vector* x, void* ctx, gsl_matrix* jac) {
  auto* pb = static_cast<Problem*>(ctx);
  Eigen::MatrixXd J;
  if (!jacobian(*pb, Vec(x->data, x->data + pb->dim), J)) return GSL_EDOM;
  for (Eigen::Index i = 0; i < J.rows(); ++i)
    for (Eigen::Index k = 0; k < J.cols(); ++k) gsl_matrix_set(jac, i, k, J(i, k));
  return GSL_SUCCESS;
}

// Levenberg-Marquardt polish; returns false if it could not run or failed.
bool polish(Problem& pb, Vec& th) {
  const std::size_t n = pb.data.size(), p = static_cast<std::size_t>(pb.dim);
  if (n <= p) return false;
  gsl_multifit_nlinear_fdf fdf{};
  fdf.f = &lm_f;
  fdf.df = &lm_df;
  fdf.n = n;
  fdf.p = p;
  fdf.params = &pb;
  gsl_multifit_nlinear_parameters par = gsl_multifit_nlinear_default_parameters();
  gsl_multifit_nlinear_workspace* w = gsl_multifit_nlinear_alloc(gsl_multifit_nlinear_trust, &par, n, p);
  gsl_vector_view x0 = gsl_vector_view_array(th.data(), p);
  bool ok = gsl_multifit_nlinear_init(&x0.vector, &fdf, w) == GSL_SUCCESS;
  if (ok) {
    int info = 0;
    const int status = gsl_multifit_nlinear_driver(pb.opt.polish_max_iter, 1e-13, 1e-14, 0.0, nullptr, nullptr,
                                                   &info, w);
    ok = status == GSL_SUCCESS || status == GSL_EMAXITER || status == GSL_ENOPROG;
    const gsl_vector* xs = gsl_multifit_nlinear_position(w);
    Vec cand(xs->data, xs->data + p);
    if (ok && pb.objective(cand.data()) <= pb.objective(th.data())) th = cand;
  }
  gsl_multifit_nlinear_free(w);
  return ok;
}

double gradient_norm(Problem& pb, const Vec& th) {
  constexpr double h = 1e-6;
  double s = 0.0;
  for (int k = 0; k < pb.dim; ++k) {
    Vec a = th, b = th;
    a[k] += h;
    b[k] -= h;
    const double g = (pb.objective(a.data()) - pb.objective(b.data())) / (2.0 * h);
    s += g * g;
  }
  return std::sqrt(s);
}

struct Attempt {
  Vec th;
  double f = kBad;
  bool polished = false;
};

Attempt run_start(Problem& pb, Vec th) {
  Attempt a;
  if (pb.opt.warm_start) coordinate_descent(pb, th);
  if (pb.opt.simplex_max_iter > 0) simplex(pb, th);
  a.polished = polish(pb, th);
  a.th = th;
  a.f = pb.objective(th.data());
  return a;
}

}  // namespace

FitResult fit_log_amplitudes(const std::vector<LogAmplitude>& data, const ActionParams1D& initial,
                             const FitOptions& opt) {
  gsl_set_error_handler_off();
  if (data.empty()) throw DomainError("fit: no amplitudes to fit");
  for (const auto& d : data) {
    if (d.T != data.front().T) throw DomainError("fit: all amplitudes must share one transition time");
    if (!std::isfinite(d.log_value)) throw DomainError("fit: non-finite target amplitude");
  }
  validate(initial);
  validate(opt.c);
  const bool harmonic = opt.harmonic || initial.vm2 == 0.0;
  if (!(initial.v2 > 0.0)) throw DomainError("fit: initial action needs v2 > 0");

  Problem pb{data, opt, harmonic ? 2 : 3};
  Vec th0{std::log(initial.m), std::log(initial.m * initial.v2)};
  if (!harmonic) th0.push_back(std::log(initial.m * initial.vm2));

  std::vector<Attempt> attempts;
  attempts.push_back(run_start(pb, th0));
  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> jit(0.0, opt.jitter);
  for (int s = 0; s < opt.n_starts; ++s) {
    Vec th = th0;
    for (double& v : th) v += jit(rng);
    attempts.push_back(run_start(pb, th));
  }
  const auto best = std::min_element(attempts.begin(), attempts.end(),
                                     [](const Attempt& a, const Attempt& b) { return a.f < b.f; });

  FitResult fr;
  fr.n_samples = static_cast<int>(data.size());
  fr.T = data.front().T;
  fr.objective = best->f;
  if (!(best->f < kBad)) throw ConvergenceError("fit: no start produced a solvable action");
  fr.params = pb.params(best->th.data());
  fr.m_v2 = fr.params.m * fr.params.v2;
  fr.m_vm2 = fr.params.m * fr.params.vm2;

  double lo2 = fr.m_v2, hi2 = fr.m_v2, lom = fr.m_vm2, him = fr.m_vm2;
  for (const auto& a : attempts) {
    if (!(a.f < kBad)) continue;
    const ActionParams1D q = pb.params(a.th.data());
    lo2 = std::min(lo2, q.m * q.v2);
    hi2 = std::max(hi2, q.m * q.v2);
    lom = std::min(lom, q.m * q.vm2);
    him = std::max(him, q.m * q.vm2);
  }
  fr.spread_m_v2 = hi2 - lo2;
  fr.spread_m_vm2 = him - lom;

  const Vec r = pb.raw(best->th.data());
  fr.log_Z = Problem::mean(r);
  double ss = 0.0;
  for (double v : r) {
    // ln G_fit - ln G = ln Z - Sigma - ln G = -(r_i - ln Z)
    const double rel = std::fabs(std::expm1(fr.log_Z - v));
    fr.residual_max_rel = std::max(fr.residual_max_rel, rel);
    ss += rel * rel;
  }
  fr.residual_rms = std::sqrt(ss / static_cast<double>(r.size()));

  fr.gradient_norm = gradient_norm(pb, best->th);
  Eigen::MatrixXd J;
  if (jacobian(pb, best->th, J)) {
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J.transpose() * J);
    const double lmax = es.eigenvalues().maxCoeff(), lmin = es.eigenvalues().minCoeff();
    fr.rank_deficient = !(lmax > 0.0) || lmin < 1e-12 * lmax;
  } else {
    fr.rank_deficient = true;
  }
  if (fr.rank_deficient)
    fr.warnings.push_back("rank deficient: the boundary set does not separate all parameters");
  if (static_cast<int>(data.size()) < pb.dim + 1)
    fr.warnings.push_back("fewer samples than parameters + normalization");
  fr.converged = fr.gradient_norm < 1e-6 * (1.0 + fr.objective) || best->polished;
  fr.evaluations = pb.evaluations;
  return fr;
}

FitResult fit_quantum_action(const ActionParams1D& classical, const BoundarySet& bset, const FitOptions& opt) {
  validate(classical);
  FitOptions o = opt;
  if (classical.vm2 == 0.0) o.harmonic = true;
  ActionParams1D init = opt.initial.value_or(classical);
  if (o.harmonic) init.vm2 = 0.0;
  init.v0 = 0.0;
  return fit_log_amplitudes(exact_amplitudes(classical, bset, opt.c), init, o);
}

std::string to_string(BoundaryScenario s) {
  switch (s) {
    case BoundaryScenario::vary_final: return "vary-final";
    case BoundaryScenario::vary_initial: return "vary-initial";
    case BoundaryScenario::balanced: return "balanced";
  }
  return "?";
}

std::vector<std::pair<std::string, BoundarySet>> boundary_scenario_sets(BoundaryScenario s) {
  std::vector<std::pair<std::string, BoundarySet>> out;
  char buf[64];
  switch (s) {
    case BoundaryScenario::vary_final:
      for (auto [lo, hi] : {std::pair{2.0, 3.0}, {5.0, 6.0}, {9.0, 10.0}, {2.0, 10.0}}) {
        std::snprintf(buf, sizeof buf, "xf in [%g,%g]", lo, hi);
        out.push_back({buf, BoundarySet{{0.3}, uniform_points(lo, hi, 100), 1.0}});
      }
      break;
    case BoundaryScenario::vary_initial:
      for (double xi : {0.1, 0.2, 0.3, 0.4, 0.5}) {
        std::snprintf(buf, sizeof buf, "xi = %g", xi);
        out.push_back({buf, BoundarySet{{xi}, uniform_points(2.0, 3.0, 100), 1.0}});
      }
      break;
    case BoundaryScenario::balanced:
      out.push_back({"balanced", BoundarySet{uniform_points(1.5, 2.5, 10), uniform_points(1.1, 2.1, 10), 1.0}});
      break;
  }
  return out;
}

std::vector<BoundaryStudyRow> boundary_dependence_study(const ActionParams1D& classical, BoundaryScenario scenario,
                                                        const std::vector<double>& T_grid, const FitOptions& opt) {
  validate(classical);
  const double t_sc = ground_state(classical, opt.c).T_sc;
  std::vector<BoundaryStudyRow> rows;
  for (const auto& [label, base] : boundary_scenario_sets(scenario)) {
    for (double T : T_grid) {
      BoundaryStudyRow row;
      row.scenario = scenario;
      row.label = label;
      row.T = T;
      row.small_T_regime = T < 5.0 * t_sc;
      BoundarySet b = base;
      b.T = T;
      try {
        row.fit = fit_quantum_action(classical, b, opt);
      } catch (const std::exception& e) {
        row.ok = false;
        row.error = e.what();
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

ResolutionStudy resolution_study(const ActionParams1D& classical, const BoundarySet& bset,
                                 const std::vector<int>& mesh_grid, const std::vector<double>& T_grid,
                                 const FitOptions& opt, double stability_tol) {
  validate(classical);
  if (mesh_grid.empty() || T_grid.empty()) throw DomainError("resolution_study: empty grid");
  if (!std::is_sorted(mesh_grid.begin(), mesh_grid.end())) throw DomainError("resolution_study: N_t grid must be ascending");
  ResolutionStudy st;
  st.stability_tol = stability_tol;
  for (double T : T_grid) {
    BoundarySet b = bset;
    b.T = T;
    FitOptions q = opt;
    q.method = SolverMethod::quadrature;
    const FitResult start = fit_quantum_action(classical, b, q);

    // Mesh fits: local polish from the converged continuum optimum.
    FitOptions r = opt;
    r.method = SolverMethod::relaxation;
    r.initial = start.params;
    r.n_starts = 0;
    r.warm_start = false;
    r.simplex_max_iter = 0;
    const std::size_t first = st.cells.size();
    for (int nt : mesh_grid) {
      ResolutionCell cell;
      cell.T = T;
      cell.mesh_density = nt;
      r.mesh_density = nt;
      try {
        cell.fit = fit_quantum_action(classical, b, r);
      } catch (const std::exception& e) {
        cell.ok = false;
        cell.error = e.what();
      }
      st.cells.push_back(std::move(cell));
    }
    auto rel = [](double a, double b) { return std::fabs(a - b) / std::fabs(b); };
    for (std::size_t i = first; i + 1 < st.cells.size(); ++i) {
      const auto &a = st.cells[i].fit, &b2 = st.cells[i + 1].fit;
      if (!st.cells[i].ok || !st.cells[i + 1].ok) continue;
      st.cells[i].change = std::max(rel(a.m_v2, b2.m_v2), rel(a.m_vm2, b2.m_vm2));
      st.cells[i].change_params =
          std::max({rel(a.params.m, b2.params.m), rel(a.params.v2, b2.params.v2), rel(a.params.vm2, b2.params.vm2)});
    }
    auto stable_from = [&](double ResolutionCell::*field) {
      int found = 0;
      for (std::size_t i = st.cells.size() - 1; i-- > first;) {
        const double ch = st.cells[i].*field;
        if (ch < 0.0 || ch >= stability_tol) break;
        found = st.cells[i].mesh_density;
      }
      return found;
    };
    ResolutionSummary sum{T, stable_from(&ResolutionCell::change_params), stable_from(&ResolutionCell::change)};
    st.summary.push_back(sum);
  }
  return st;
}

}  // namespace qaction
