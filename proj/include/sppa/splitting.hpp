#pragma once

// Symplectic splitting methods (augmented Lagrangian, Douglas-Rachford,
// ADMM, PDHG) and their classical counterparts.

#include <functional>
#include <utility>

#include "sppa/common.hpp"
#include "sppa/operators.hpp"
#include "sppa/schedules.hpp"
#include "sppa/solvers.hpp"

namespace sppa {

/// min f(x) s.t. Ax = b, with diagonal dual metric H (entries > 0).
/// The x-subproblem oracle returns
///   argmin_x f(x) - <lt, Ax - b> + (cprime/2) ||Ax - b||_H^2
/// for a given multiplier estimate lt and penalty cprime.
struct EqualityConstrainedProblem {
  std::function<Vector(const Vector& lt, double cprime)> subproblem;
  std::function<double(const Vector&)> objective;  // f, for gap monitors
  Matrix A;
  Vector b;
  Vector H;  // empty means identity
};

Vector equality_metric(const EqualityConstrainedProblem& p);

/// Perturbation-function oracle for the generic augmented Lagrangian step:
/// returns the minimizing pair (x, u) of phi(x, u) - <lt, u> + (cprime/2)||u||_H^2.
struct PerturbationOracle {
  std::function<std::pair<Vector, Vector>(const Vector& lt, double cprime)> solve;
  Vector H;  // empty means identity
};

/// Symplectic augmented Lagrangian step. State: x = multiplier lambda, z its
/// momentum mirror. With b_k, c_k, a_k from the schedule and c' = c_k/(b_k+1):
///   lt      = (z_k + b_k lambda_k) / (b_k + 1)
///   x_{k+1} = subproblem(lt, c')
///   lambda_{k+1} = lt - c' H (A x_{k+1} - b)
///   z_{k+1} = z_k - a_k H (A x_{k+1} - b)
/// aux stores "primal", "constraint" (Ax - b), and "lambda_tilde".
SolverState salm_step(const EqualityConstrainedProblem& p, const Schedule& sched,
                      const SolverState& s);

/// Same updates driven by a perturbation oracle supplying (x_{k+1}, u_{k+1});
/// the z-update z_{k+1} = z_k + (a_k/c_k)(b_k+1)(lambda_{k+1} - lt) reduces to
/// the equality-constrained rule when u = Ax - b.
SolverState salm_generic_step(const PerturbationOracle& o, const Schedule& sched,
                              const SolverState& s);

/// Symplectic Douglas-Rachford step:
///   xt      = r/(k+r) z_k + k/(k+r) x_k
///   u       = J_{rho B}(xt),  v = J_{rho A}(2u - xt)
///   x_{k+1} = xt + v - u     (= T_{rho A, rho B}(xt))
///   z_{k+1} = z_k + (C/r)(x_{k+1} - xt)
/// aux stores "x_tilde", "u", "v".
SolverState sdr_step(const ProxMap& res_a, const ProxMap& res_b, double rho,
                     const MonotoneParams& p, const SolverState& s);

/// min f(x) + g(y) s.t. Ax + By = c. The subproblem oracles absorb the
/// penalty shape:
///   f_subproblem(w, q, rho) = argmin_x f(x) + <w, Ax> + (rho/2)||Ax + q||^2
///   g_subproblem(w, q, rho) = argmin_y g(y) + <w, By> + (rho/2)||By + q||^2
struct AdmmProblem {
  std::function<Vector(const Vector& w, const Vector& q, double rho)> f_subproblem;
  std::function<Vector(const Vector& w, const Vector& q, double rho)> g_subproblem;
  Matrix A;
  Matrix B;
  Vector c;
  double rho = 1.0;
};

/// Symplectic ADMM, the dual Douglas-Rachford form. State: x = dual u.
///   ut      = r/(k+r) z_k + k/(k+r) u_k
///   x_{k+1} = f_subproblem(ut, -c, rho)
///   y_{k+1} = g_subproblem(ut, 2(A x_{k+1} - c), rho)
///   u_{k+1} = ut + rho (A x_{k+1} + B y_{k+1} - c)
///   z_{k+1} = z_k + (C/r) rho (A x_{k+1} + B y_{k+1} - c)
/// aux stores "primal_x", "primal_y", "u_tilde", "residual" (Ax + By - c).
/// The identity u_{k+1} - ut_{k+1} = rho * residual makes the dual residual
/// directly observable.
SolverState sadmm_step(const AdmmProblem& p, const MonotoneParams& params,
                       const SolverState& s);

/// Reordered variant interleaving the multiplier updates. State: x = lambda;
/// aux["primal_y"] seeds y_0 (zero when absent). Rate assertions are not
/// armed for this variant.
SolverState sadmm_step_v2(const AdmmProblem& p, const MonotoneParams& params,
                          const SolverState& s);

/// Saddle problem min_x max_y f(x) + <y, K x> - g(y); prox_f and prox_g are
/// evaluated at steps mu1, mu2.
struct SaddleProblem {
  ProxMap prox_f;  // dimension n (primal)
  ProxMap prox_g;  // dimension m (dual)
  Matrix K;        // m x n coupling
  double mu1 = 0.0;
  double mu2 = 0.0;
  double norm_K = 0.0;  // spectral norm, for the step-size check
};

/// Symplectic PDHG on the stacked variable u = (x; y):
///   ut = r/(k+r) z_k + k/(k+r) u_k
///   x_{k+1} = prox_f(mu1, xt - mu1 K^T yt)
///   y_{k+1} = prox_g(mu2, yt + mu2 K (2 x_{k+1} - xt))
///   z_{k+1} = z_k + (C/r)(u_{k+1} - ut)
/// In guarantee mode (C <= 1) the configuration is rejected unless
/// mu1 mu2 ||K||^2 < 1. aux stores "u_tilde".
SolverState spdhg_step(const SaddleProblem& p, const MonotoneParams& params,
                       const SolverState& s);

// ---- classical baselines ----

/// x_{k+1} = argmin f - <lambda_k, Ax-b> + (rho/2)||Ax-b||_H^2;
/// lambda_{k+1} = lambda_k - rho H (A x_{k+1} - b).
SolverState classical_alm_step(const EqualityConstrainedProblem& p, double rho,
                               const SolverState& s);

/// Plain Douglas-Rachford iteration x_{k+1} = T_{rho A, rho B}(x_k).
SolverState classical_dr_step(const ProxMap& res_a, const ProxMap& res_b, double rho,
                              const SolverState& s);

/// Classical ADMM with multiplier ascent; aux["primal_y"] seeds y_0.
SolverState classical_admm_step(const AdmmProblem& p, const SolverState& s);

/// Chambolle-Pock primal-dual step on the stacked variable.
SolverState classical_pdhg_step(const SaddleProblem& p, const SolverState& s);

}  // namespace sppa
