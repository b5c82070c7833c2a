#pragma once

// Discrete-time solvers: proximal point, Halpern, and the symplectic
// proximal point family, plus their Lyapunov functions and the run loop.

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sppa/common.hpp"
#include "sppa/operators.hpp"
#include "sppa/schedules.hpp"

namespace sppa {

struct SolverState {
  long k = 0;
  Vector x;
  Vector z;
  std::map<std::string, Vector> aux;
};

/// Fresh state with x = z = x0 and schedule clock 0.
SolverState make_state(const Vector& x0);

/// Parameters of the monotone-inclusion solvers. r >= 2 always; C <= 1 is
/// guarantee mode (rate assertions sound), C > 1 exploratory.
struct MonotoneParams {
  double C = 1.0;
  double r = 2.0;
  bool guarantee_mode() const { return C <= 1.0; }
};

void check_params(const MonotoneParams& p);

/// Classical proximal point step x_{k+1} = prox_{c_k f}(x_k); z untouched.
/// Stores the previous iterate in aux["x_prev"].
SolverState ppa_convex_step(const ProxMap& prox_f, double c_k, const SolverState& s);

/// Halpern-anchored resolvent step
///   x_{k+1} = J_A(y_k),
///   y_{k+1} = x_{k+1} + k/(k+2) (x_{k+1} - x_k) - k/(k+2) (x_k - y_{k-1}),
/// with y_{-1} := y_0 = x_0. aux carries "y" and "y_prev".
SolverState halpern_step(const ProxMap& resolvent, const SolverState& s);

/// Symplectic proximal point step for convex minimization:
///   y_{k+1} = z_k/(b_k+1) + b_k x_k/(b_k+1)
///   x_{k+1} = prox_{(c_k/(b_k+1)) f}(y_{k+1})
///   z_{k+1} = z_k + (a_k/c_k)(b_k+1)(x_{k+1} - y_{k+1})
/// The schedule's validity conditions are checked at the current index.
/// aux stores "y", "x_prev", and the implicit subgradient "subgrad"
/// (b_k x_k + z_k - (b_k+1) x_{k+1}) / c_k.
SolverState sppa_convex_step(const ProxMap& prox_f, const Schedule& sched,
                             const SolverState& s);

/// Symplectic step for the monotone inclusion 0 in A(x):
///   xt_{k+1} = r/(k+r) z_k + k/(k+r) x_k
///   x_{k+1}  = J_A(xt_{k+1})
///   z_{k+1}  = z_k + (C/r)(x_{k+1} - xt_{k+1})
/// aux stores "x_tilde" and "x_prev".
SolverState sppa_monotone_step(const ProxMap& resolvent, const MonotoneParams& p,
                               const SolverState& s);

/// Variant driven by the Yosida approximation: the resolvent index is
/// 1 + r a_k/(k+r) and the z-update weight C(k+r)/(r^2 a_k). The true
/// Yosida residual A_tilde(x_{k+1}) is recovered without an extra
/// resolvent call and stored in aux["yosida_residual"].
SolverState sppa_yosida_step(const ProxMap& resolvent, const MonotoneParams& p,
                             double a_k, const SolverState& s);

/// E(k) = A_k f_gap + 1/2 ||z_k - xstar||^2 for the convex symplectic
/// solver. f_gap must be f(x_k) - f(xstar); a gap below -1e-9 signals a
/// broken reference and raises a domain error.
double lyapunov_convex(const SolverState& s, const Schedule& sched, double f_gap,
                       const Vector& xstar);

struct LyapunovMonotoneTerms {
  double residual_term = 0.0;  // C k [k + r - C(k+1)] / 2 ||v||^2
  double inner_term = 0.0;     // C r k <v, x - xstar>
  double mix_term = 0.0;       // 1/2 ||C k v - r z + r xstar||^2
  double z_term = 0.0;         // (r^3 - 2 r^2)/2 ||z - xstar||^2
  double total = 0.0;
};

/// Four-term Lyapunov function of the monotone solvers. The residual v is
/// aux["yosida_residual"] when present, else aux["x_tilde"] - x (a member
/// of A(x_k)); at k = 0 it is zero and E(0) = (r^3 - r^2)/2 ||x0 - xstar||^2.
LyapunovMonotoneTerms lyapunov_monotone(const SolverState& s, const MonotoneParams& p,
                                        const Vector& xstar);

struct TraceRecord {
  long k = 0;
  std::optional<double> objective_gap;
  std::optional<double> residual_sq;
  std::optional<double> inner_product;
  std::optional<double> lyapunov;
  double wall_time = 0.0;  // seconds since run start; excluded from replays
};

using Stepper = std::function<SolverState(const SolverState&)>;

struct Monitor {
  std::string name;
  std::function<void(const SolverState&, TraceRecord&)> fill;
};

/// Invariant checks run after the monitors; a returned message marks a
/// failed invariant but never stops the run.
struct InvariantCheck {
  std::string name;
  std::function<std::optional<std::string>(const SolverState&, const TraceRecord&)> check;
};

struct InvariantFailure {
  long k = 0;
  std::string name;
  std::string message;
};

struct RunResult {
  std::vector<TraceRecord> trace;
  std::vector<InvariantFailure> failures;
  SolverState final_state;
};

/// Drives a stepper for `iters` iterations. When restart_every > 0, every
/// restart_every-th step is followed by a restart: z <- x, the schedule
/// clock k <- 0, aux cleared, x preserved. One TraceRecord per step.
RunResult run(const Stepper& stepper, SolverState state, long iters,
              long restart_every, const std::vector<Monitor>& monitors,
              const std::vector<InvariantCheck>& checks = {});

/// Check that record.lyapunov never increases by more than
/// rel_tol * max(1, |previous|). Restart-aware via the record index.
InvariantCheck lyapunov_nonincrease_check(double rel_tol = 1e-9);

/// Check field <= bound(k) + tol, where field picks a TraceRecord metric.
InvariantCheck upper_envelope_check(std::string name,
                                    std::optional<double> TraceRecord::*field,
                                    std::function<double(long)> bound, double tol);

}  // namespace sppa
