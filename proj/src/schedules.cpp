#include "sppa/schedules.hpp"

#include <cmath>

namespace sppa {

namespace {

constexpr double kRelTol = 1e-12;

bool approx_eq(double x, double y) {
  if (std::isinf(x) && std::isinf(y)) return (x > 0) == (y > 0);
  return std::abs(x - y) <= kRelTol * std::max({1.0, std::abs(x), std::abs(y)});
}

}  // namespace

ScheduleReport validate(const Schedule& s, long horizon) {
  if (horizon < 0) throw std::invalid_argument("validate: horizon must be >= 0");
  ScheduleReport rep;
  auto fail = [&rep](long k, const std::string& cond) {
    rep.valid = false;
    rep.first_violation = k;
    rep.condition = cond;
  };
  if (!approx_eq(s.A(0), 0.0)) {
    fail(0, "A(0) = 0");
    return rep;
  }
  if (!approx_eq(s.b(0), 0.0)) {
    fail(0, "b(0) = 0");
    return rep;
  }
  for (long k = 0; k <= horizon; ++k) {
    double A = s.A(k), a = s.a(k), b = s.b(k), c = s.c(k);
    if (std::isnan(A) || std::isnan(a) || std::isnan(b) || std::isnan(c)) {
      fail(k, "finite values");
      return rep;
    }
    if (!(a > 0.0)) {
      fail(k, "a > 0");
      return rep;
    }
    if (b < 0.0 || !(c > 0.0)) {
      fail(k, b < 0.0 ? "b >= 0" : "c > 0");
      return rep;
    }
    double ab = a * b;
    if (!approx_eq(A, ab) && !(std::isinf(A) && std::isinf(ab))) {
      fail(k, "A = a b");
      return rep;
    }
    double A_next = s.A(k + 1);
    // The increment condition cannot be assessed once A overflows.
    if (std::isfinite(A) && std::isfinite(A_next)) {
      double slack = a - (A_next - A);
      double tol = kRelTol * std::max({1.0, std::abs(a), std::abs(A), std::abs(A_next)});
      if (slack < -tol) {
        fail(k, "A(k+1) - A(k) <= a");
        return rep;
      }
    }
    if (std::isfinite(a) || std::isfinite(c)) {
      if (c - a < -kRelTol * std::max(1.0, std::abs(a))) {
        fail(k, "c >= a");
        return rep;
      }
    }
  }
  return rep;
}

Schedule constant_index_schedule(double c) {
  if (!(c > 0.0))
    throw std::invalid_argument("constant_index_schedule: c must be positive");
  Schedule s;
  s.name = "constant_index";
  s.A = [c](long k) { return 0.5 * c * static_cast<double>(k) * static_cast<double>(k + 1); };
  s.a = [c](long k) { return c * static_cast<double>(k + 1); };
  s.b = [](long k) { return 0.5 * static_cast<double>(k); };
  s.c = [c](long k) { return c * static_cast<double>(k + 2); };
  return s;
}

namespace {

// k^(p) = k (k+1) ... (k+p-1)
double rising_factorial(long k, int len) {
  double prod = 1.0;
  for (int i = 0; i < len; ++i) prod *= static_cast<double>(k + i);
  return prod;
}

}  // namespace

Schedule rising_factorial_schedule(int p) {
  if (p < 2) throw std::invalid_argument("rising_factorial_schedule: p must be >= 2");
  Schedule s;
  s.name = "rising_factorial";
  s.A = [p](long k) { return rising_factorial(k, p); };
  s.a = [p](long k) { return p * rising_factorial(k + 1, p - 1); };
  s.b = [p](long k) { return static_cast<double>(k) / p; };
  s.c = s.a;
  return s;
}

Schedule exponential_schedule(double rho) {
  if (!(rho > 1.0))
    throw std::invalid_argument("exponential_schedule: rho must be > 1");
  Schedule s;
  s.name = "exponential";
  s.A = [rho](long k) { return std::pow(rho, static_cast<double>(k)) - 1.0; };
  s.a = [rho](long k) { return std::pow(rho, static_cast<double>(k)) * (rho - 1.0); };
  // (rho^k - 1) / (rho^k (rho - 1)) in overflow-safe form
  s.b = [rho](long k) {
    return (1.0 - std::pow(rho, -static_cast<double>(k))) / (rho - 1.0);
  };
  s.c = s.a;
  return s;
}

Schedule salm_lasso_schedule() {
  Schedule s;
  s.name = "salm_lasso";
  s.A = [](long k) { return static_cast<double>(k) * static_cast<double>(k + 1) / 8.0; };
  s.a = [](long k) { return static_cast<double>(k + 1) / 4.0; };
  s.b = [](long k) { return static_cast<double>(k) / 2.0; };
  s.c = [](long k) { return static_cast<double>(k + 2) / 2.0; };
  return s;
}

Schedule make_schedule(const std::string& name, double param) {
  if (name == "constant_index") return constant_index_schedule(param);
  if (name == "rising_factorial") {
    int p = static_cast<int>(std::lround(param));
    if (std::abs(param - p) > 1e-9)
      throw std::invalid_argument("make_schedule: rising_factorial needs integer p");
    return rising_factorial_schedule(p);
  }
  if (name == "exponential") return exponential_schedule(param);
  if (name == "salm_lasso") return salm_lasso_schedule();
  throw std::invalid_argument("make_schedule: unknown schedule '" + name + "'");
}

ScheduleReport validate_continuous(const ContinuousSchedule& s, double horizon,
                                   long samples) {
  if (!(horizon > 0.0) || samples < 2)
    throw std::invalid_argument("validate_continuous: bad horizon or sample count");
  ScheduleReport rep;
  auto fail = [&rep](long i, const std::string& cond) {
    rep.valid = false;
    rep.first_violation = i;
    rep.condition = cond;
  };
  if (!approx_eq(s.A(0.0), 0.0) || !approx_eq(s.b(0.0), 0.0) || !approx_eq(s.c(0.0), 0.0)) {
    fail(0, "A(0) = b(0) = c(0) = 0");
    return rep;
  }
  for (long i = 1; i < samples; ++i) {
    double t = horizon * static_cast<double>(i) / static_cast<double>(samples - 1);
    double A = s.A(t), a = s.a(t), b = s.b(t);
    if (!approx_eq(A, a * b)) {
      fail(i, "A = a b");
      return rep;
    }
    double dA = s.dA(t);
    if (dA - a > 1e-9 * std::max(1.0, std::abs(a))) {
      fail(i, "dA <= a");
      return rep;
    }
  }
  return rep;
}

ContinuousSchedule polynomial_continuous_schedule(double p) {
  if (!(p >= 1.0))
    throw std::invalid_argument("polynomial_continuous_schedule: p must be >= 1");
  ContinuousSchedule s;
  s.name = "polynomial";
  s.A = [p](double t) { return std::pow(t, p); };
  s.dA = [p](double t) { return p * std::pow(t, p - 1.0); };
  s.a = s.dA;
  s.b = [p](double t) { return t / p; };
  s.c = [](double t) { return t; };
  return s;
}

ContinuousSchedule exponential_continuous_schedule(double lambda) {
  if (!(lambda > 0.0))
    throw std::invalid_argument("exponential_continuous_schedule: lambda must be > 0");
  ContinuousSchedule s;
  s.name = "exponential";
  s.A = [lambda](double t) { return std::expm1(lambda * t); };
  s.dA = [lambda](double t) { return lambda * std::exp(lambda * t); };
  s.a = s.dA;
  s.b = [lambda](double t) { return -std::expm1(-lambda * t) / lambda; };
  s.c = [](double t) { return t; };
  return s;
}

}  // namespace sppa
