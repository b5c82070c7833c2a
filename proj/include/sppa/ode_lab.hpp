#pragma once

// Continuous-time side: gradient flow, Yosida-regularized flow, and the
// high-resolution ODE systems behind the symplectic solvers, with their
// Lyapunov functionals evaluated along stored trajectories.

#include <functional>
#include <string>
#include <vector>

#include "sppa/common.hpp"
#include "sppa/operators.hpp"
#include "sppa/schedules.hpp"
#include "sppa/solvers.hpp"

namespace sppa {

struct IntegratorConfig {
  double h = 1e-3;        // step size
  double horizon = 20.0;  // terminal time
  double blow_up = 1e12;  // ||X|| beyond this aborts with a diagnostic
};

void check_integrator_config(const IntegratorConfig& cfg);

/// Sampled trajectory. Z is empty for first-order flows. Samples sit at
/// t0 = h, t0 + h, ... (the singular coefficients at t = 0 are never hit).
struct Trajectory {
  std::vector<double> t;
  std::vector<Vector> X;
  std::vector<Vector> Z;
};

/// X' = -c(t) grad f(X), implicit midpoint with fixed-point inner solves.
Trajectory integrate_gradient_flow(const std::function<Vector(const Vector&)>& grad,
                                   const std::function<double(double)>& c,
                                   const Vector& x0, const IntegratorConfig& cfg);

/// X' = -A_tilde(X) = J_A(X) - X, classic RK4 (the right-hand side is
/// globally 1-Lipschitz).
Trajectory integrate_yosida_flow(const ProxMap& resolvent, const Vector& x0,
                                 const IntegratorConfig& cfg);

/// High-resolution convex system, the DAE solved for X':
///   X' = (Z - X - c(t) grad f(X)) / b(t),   Z' = -a(t) grad f(X),
/// implicit midpoint; integration starts at t0 = h with X = Z = x0 so the
/// b(t) -> 0 endpoint is never evaluated.
Trajectory integrate_hr_convex(const std::function<Vector(const Vector&)>& grad,
                               const ContinuousSchedule& cs, const Vector& x0,
                               const IntegratorConfig& cfg);

/// High-resolution monotone system with a(t) = 1 + t/r:
///   X' = (r/t)(Z - X - a(t) A_tilde(X)),   Z' = -(C/r) A_tilde(X),
/// RK4 on the Yosida right-hand side, starting at t0 = h.
Trajectory integrate_hr_monotone(const ProxMap& resolvent, const MonotoneParams& p,
                                 const Vector& x0, const IntegratorConfig& cfg);

/// Halpern limit ODE t X' + X + 2t A_tilde(X) = x0, integrated directly
/// (RK4), starting at t0 = h.
Trajectory integrate_halpern_ode(const ProxMap& resolvent, const Vector& x0,
                                 const IntegratorConfig& cfg);

// ---- Lyapunov functionals, evaluated pointwise on samples ----

/// E = (int_0^t c) f_gap + 1/2 ||X - xstar||^2; c_int supplies the integral.
double lyapunov_gradient_flow(double c_int, double f_gap, const Vector& X,
                              const Vector& xstar);

/// E = t ||A_tilde(X)||^2 + 1/2 ||X - xstar||^2.
double lyapunov_yosida_flow(double t, const ProxMap& resolvent, const Vector& X,
                            const Vector& xstar);

/// E = A(t) f_gap + 1/2 ||Z - xstar||^2.
double lyapunov_hr_convex(double t, const ContinuousSchedule& cs, double f_gap,
                          const Vector& Z, const Vector& xstar);

/// Four-term functional of the monotone system (a(t) = 1 + t/r):
/// E = Ct(r + t - Ct)/2 ||At||^2 + Crt <At, X - xstar>
///     + 1/2 ||Ct At - r Z + r xstar||^2 + (r^3 - 2r^2)/2 ||Z - xstar||^2.
double lyapunov_hr_monotone(double t, const ProxMap& resolvent, const MonotoneParams& p,
                            const Vector& X, const Vector& Z, const Vector& xstar);

/// E = t^2 ||A_tilde(X)||^2 + t <A_tilde(X), X - x0>, the Halpern functional
/// (anchored at x0, not xstar).
double lyapunov_halpern_ode(double t, const ProxMap& resolvent, const Vector& X,
                            const Vector& x0);

enum class ContinuousLyapunovKind {
  gradient_flow,
  yosida_flow,
  hr_convex,
  hr_monotone,
  halpern_ode,
};

/// Maps a kind name to the enum; unknown names raise a domain error.
ContinuousLyapunovKind parse_lyapunov_kind(const std::string& kind);

/// Applies fn over the samples of a trajectory.
std::vector<double> monitor_series(
    const Trajectory& traj,
    const std::function<double(double t, const Vector& X, const Vector& Z)>& fn);

/// Index of the first sample where the series rises by more than
/// rel_tol * max(1, |previous|); -1 when nonincreasing throughout.
long first_increase(const std::vector<double>& series, double rel_tol);

}  // namespace sppa
