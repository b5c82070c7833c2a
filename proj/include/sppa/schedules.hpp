#pragma once

// Discrete and continuous parameter schedules for the symplectic solvers,
// with the validity conditions A_k = a_k b_k, A_{k+1} - A_k <= a_k, c_k >= a_k.

#include <functional>
#include <string>

#include "sppa/common.hpp"

namespace sppa {

struct Schedule {
  std::string name;
  std::function<double(long)> A;  // accumulated weight, A_0 = 0
  std::function<double(long)> a;  // step weight, positive
  std::function<double(long)> b;  // averaging weight, b_0 = 0
  std::function<double(long)> c;  // prox weight, c_k >= a_k
};

struct ScheduleReport {
  bool valid = true;
  long first_violation = -1;
  std::string condition;  // which condition failed, empty when valid
};

/// Checks the validity conditions for k = 0 .. horizon. Comparisons use a
/// relative tolerance of 1e-12; conditions whose operands overflow to
/// infinity are skipped (they cannot be assessed in double precision).
ScheduleReport validate(const Schedule& s, long horizon);

/// A_k = (c/2) k(k+1), a_k = c(k+1), b_k = k/2, c_k = c(k+2).
/// The derived prox step c_k / (b_k + 1) is the constant 2c.
Schedule constant_index_schedule(double c);

/// Rising factorial: A_k = k^(p) = k(k+1)...(k+p-1), a_k = p (k+1)^(p-1),
/// b_k = k/p, c_k = a_k. Requires integer p >= 2.
Schedule rising_factorial_schedule(int p);

/// A_k = rho^k - 1, a_k = rho^k (rho - 1), b_k = (1 - rho^-k) / (rho - 1),
/// c_k = a_k. Requires rho > 1.
Schedule exponential_schedule(double rho);

/// a_k = (k+1)/4, b_k = k/2, c_k = (k+2)/2, A_k = k(k+1)/8: the schedule
/// used by the augmented-Lagrangian LASSO benchmark. A_{k+1} - A_k = a_k
/// holds with equality, so the duality-gap bound applies.
Schedule salm_lasso_schedule();

/// Builds a schedule by name: "constant_index" (param c), "rising_factorial"
/// (param p), "exponential" (param rho), "salm_lasso" (param ignored).
Schedule make_schedule(const std::string& name, double param);

struct ContinuousSchedule {
  std::string name;
  std::function<double(double)> A;   // A(0) = 0
  std::function<double(double)> dA;  // analytic derivative of A
  std::function<double(double)> a;
  std::function<double(double)> b;   // b(0) = 0
  std::function<double(double)> c;   // c(0) = 0
};

/// Checks A(0)=b(0)=c(0)=0, A = a b, and dA <= a on a uniform grid over
/// [0, horizon] with the given number of samples.
ScheduleReport validate_continuous(const ContinuousSchedule& s, double horizon,
                                   long samples = 1000);

/// A(t) = t^p, a(t) = p t^(p-1), b(t) = t/p, c(t) = t.
ContinuousSchedule polynomial_continuous_schedule(double p);

/// A(t) = e^(lambda t) - 1, a(t) = lambda e^(lambda t),
/// b(t) = (1 - e^(-lambda t))/lambda, c(t) = t.
ContinuousSchedule exponential_continuous_schedule(double lambda);

}  // namespace sppa
