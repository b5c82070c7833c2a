#include "sppa/ode_lab.hpp"

#include <cmath>

namespace sppa {

void check_integrator_config(const IntegratorConfig& cfg) {
  if (!(cfg.h > 0.0) || !std::isfinite(cfg.h))
    throw std::invalid_argument("integrator: step size must be positive");
  if (!(cfg.horizon > cfg.h))
    throw std::invalid_argument("integrator: horizon must exceed the step size");
  if (!(cfg.blow_up > 0.0))
    throw std::invalid_argument("integrator: blow-up threshold must be positive");
}

namespace {

void check_not_diverged(const Vector& X, double t, double blow_up) {
  if (!X.allFinite() || X.norm() > blow_up)
    throw std::runtime_error("integrator: trajectory diverged at t = " + std::to_string(t) +
                             " (||X|| = " + std::to_string(X.norm()) + ")");
}

constexpr double kInnerTol = 1e-13;
constexpr long kInnerMax = 100;

// Generic fixed-point solve for the implicit midpoint stage of
//   X' = alpha (Z_part - X - gamma G(X)),  iterating on G only; the linear
// part of the stage equation is handled algebraically, which keeps the
// iteration contractive even when alpha ~ 1/h near the time origin.
//   X_mid (2 + h alpha) = 2 X_n + h alpha (Zc - gamma G(X_mid))
Vector solve_midpoint_x(const Vector& x_n, const Vector& z_const, double h,
                        double alpha, double gamma,
                        const std::function<Vector(const Vector&)>& G,
                        Vector* g_out) {
  double denom = 2.0 + h * alpha;
  Vector g = G(x_n);
  Vector x_mid = x_n;
  for (long it = 0; it < kInnerMax; ++it) {
    Vector x_new = (2.0 * x_n + h * alpha * (z_const - gamma * g)) / denom;
    double change = (x_new - x_mid).norm();
    x_mid = x_new;
    g = G(x_mid);
    if (change <= kInnerTol * std::max(1.0, x_mid.norm())) break;
  }
  if (g_out) *g_out = g;
  return x_mid;
}

}  // namespace

Trajectory integrate_gradient_flow(const std::function<Vector(const Vector&)>& grad,
                                   const std::function<double(double)>& c,
                                   const Vector& x0, const IntegratorConfig& cfg) {
  check_integrator_config(cfg);
  require_finite(x0, "integrate_gradient_flow x0");
  Trajectory traj;
  double t = 0.0;
  Vector X = x0;
  traj.t.push_back(t);
  traj.X.push_back(X);
  while (t < cfg.horizon - 0.5 * cfg.h) {
    double cm = c(t + 0.5 * cfg.h);
    if (!(cm >= 0.0))
      throw std::invalid_argument("integrate_gradient_flow: c(t) must be >= 0");
    // X_mid = X_n - (h c / 2) grad(X_mid)
    Vector g = grad(X);
    Vector x_mid = X;
    for (long it = 0; it < kInnerMax; ++it) {
      Vector x_new = X - 0.5 * cfg.h * cm * g;
      double change = (x_new - x_mid).norm();
      x_mid = x_new;
      g = grad(x_mid);
      if (change <= kInnerTol * std::max(1.0, x_mid.norm())) break;
    }
    X = 2.0 * x_mid - X;
    t += cfg.h;
    check_not_diverged(X, t, cfg.blow_up);
    traj.t.push_back(t);
    traj.X.push_back(X);
  }
  return traj;
}

namespace {

// RK4 driver for X' = F(t, X) starting at t0 = start.
Trajectory rk4_integrate(const std::function<Vector(double, const Vector&)>& F,
                         const Vector& x0, double start, const IntegratorConfig& cfg) {
  Trajectory traj;
  double t = start;
  Vector X = x0;
  traj.t.push_back(t);
  traj.X.push_back(X);
  while (t < cfg.horizon - 0.5 * cfg.h) {
    double h = cfg.h;
    Vector k1 = F(t, X);
    Vector k2 = F(t + 0.5 * h, (X + 0.5 * h * k1).eval());
    Vector k3 = F(t + 0.5 * h, (X + 0.5 * h * k2).eval());
    Vector k4 = F(t + h, (X + h * k3).eval());
    X += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    t += h;
    check_not_diverged(X, t, cfg.blow_up);
    traj.t.push_back(t);
    traj.X.push_back(X);
  }
  return traj;
}

}  // namespace

Trajectory integrate_yosida_flow(const ProxMap& resolvent, const Vector& x0,
                                 const IntegratorConfig& cfg) {
  check_integrator_config(cfg);
  require_finite(x0, "integrate_yosida_flow x0");
  auto F = [&resolvent](double, const Vector& X) { return Vector(resolvent(1.0, X) - X); };
  return rk4_integrate(F, x0, 0.0, cfg);
}

Trajectory integrate_hr_convex(const std::function<Vector(const Vector&)>& grad,
                               const ContinuousSchedule& cs, const Vector& x0,
                               const IntegratorConfig& cfg) {
  check_integrator_config(cfg);
  require_finite(x0, "integrate_hr_convex x0");
  Trajectory traj;
  double t = cfg.h;
  Vector X = x0, Z = x0;
  traj.t.push_back(t);
  traj.X.push_back(X);
  traj.Z.push_back(Z);
  while (t < cfg.horizon - 0.5 * cfg.h) {
    double tm = t + 0.5 * cfg.h;
    double b = cs.b(tm), a = cs.a(tm), c = cs.c(tm);
    if (!(b > 0.0))
      throw std::invalid_argument("integrate_hr_convex: b(t) must be positive on the grid");
    // Z_mid = Z_n - (h a / 2) g, folded into the X stage equation
    Vector g;
    Vector x_mid = solve_midpoint_x(
        X, Z, cfg.h, 1.0 / b, c + 0.5 * cfg.h * a,
        [&grad](const Vector& v) { return grad(v); }, &g);
    X = 2.0 * x_mid - X;
    Z -= cfg.h * a * g;
    t += cfg.h;
    check_not_diverged(X, t, cfg.blow_up);
    traj.t.push_back(t);
    traj.X.push_back(X);
    traj.Z.push_back(Z);
  }
  return traj;
}

namespace {

// RK4 on the stacked (X, Z) system for the Yosida-driven second-order flows.
Trajectory rk4_integrate_pair(
    const std::function<void(double, const Vector&, const Vector&, Vector&, Vector&)>& F,
    const Vector& x0, const Vector& z0, double start, const IntegratorConfig& cfg) {
  Trajectory traj;
  double t = start;
  Vector X = x0, Z = z0;
  traj.t.push_back(t);
  traj.X.push_back(X);
  traj.Z.push_back(Z);
  Vector dx1, dz1, dx2, dz2, dx3, dz3, dx4, dz4;
  while (t < cfg.horizon - 0.5 * cfg.h) {
    double h = cfg.h;
    F(t, X, Z, dx1, dz1);
    F(t + 0.5 * h, (X + 0.5 * h * dx1).eval(), (Z + 0.5 * h * dz1).eval(), dx2, dz2);
    F(t + 0.5 * h, (X + 0.5 * h * dx2).eval(), (Z + 0.5 * h * dz2).eval(), dx3, dz3);
    F(t + h, (X + h * dx3).eval(), (Z + h * dz3).eval(), dx4, dz4);
    X += (h / 6.0) * (dx1 + 2.0 * dx2 + 2.0 * dx3 + dx4);
    Z += (h / 6.0) * (dz1 + 2.0 * dz2 + 2.0 * dz3 + dz4);
    t += h;
    check_not_diverged(X, t, cfg.blow_up);
    traj.t.push_back(t);
    traj.X.push_back(X);
    traj.Z.push_back(Z);
  }
  return traj;
}

}  // namespace

Trajectory integrate_hr_monotone(const ProxMap& resolvent, const MonotoneParams& p,
                                 const Vector& x0, const IntegratorConfig& cfg) {
  check_integrator_config(cfg);
  check_params(p);
  require_finite(x0, "integrate_hr_monotone x0");
  auto F = [&resolvent, p](double t, const Vector& X, const Vector& Z, Vector& dX,
                           Vector& dZ) {
    Vector At = X - resolvent(1.0, X);
    double a_t = 1.0 + t / p.r;
    dX = (p.r / t) * (Z - X - a_t * At);
    dZ = -(p.C / p.r) * At;
  };
  return rk4_integrate_pair(F, x0, x0, cfg.h, cfg);
}

Trajectory integrate_halpern_ode(const ProxMap& resolvent, const Vector& x0,
                                 const IntegratorConfig& cfg) {
  check_integrator_config(cfg);
  require_finite(x0, "integrate_halpern_ode x0");
  Vector anchor = x0;
  auto F = [&resolvent, anchor](double t, const Vector& X) {
    Vector At = X - resolvent(1.0, X);
    return Vector((anchor - X - 2.0 * t * At) / t);
  };
  return rk4_integrate(F, x0, cfg.h, cfg);
}

double lyapunov_gradient_flow(double c_int, double f_gap, const Vector& X,
                              const Vector& xstar) {
  if (f_gap < -1e-9)
    throw std::domain_error("lyapunov_gradient_flow: negative objective gap " +
                            std::to_string(f_gap));
  return c_int * f_gap + 0.5 * (X - xstar).squaredNorm();
}

double lyapunov_yosida_flow(double t, const ProxMap& resolvent, const Vector& X,
                            const Vector& xstar) {
  return t * yosida_apply(resolvent, X).squaredNorm() + 0.5 * (X - xstar).squaredNorm();
}

double lyapunov_hr_convex(double t, const ContinuousSchedule& cs, double f_gap,
                          const Vector& Z, const Vector& xstar) {
  if (f_gap < -1e-9)
    throw std::domain_error("lyapunov_hr_convex: negative objective gap " +
                            std::to_string(f_gap));
  return cs.A(t) * f_gap + 0.5 * (Z - xstar).squaredNorm();
}

double lyapunov_hr_monotone(double t, const ProxMap& resolvent, const MonotoneParams& p,
                            const Vector& X, const Vector& Z, const Vector& xstar) {
  check_params(p);
  Vector At = yosida_apply(resolvent, X);
  double C = p.C, r = p.r;
  double e = 0.5 * C * t * (r + t - C * t) * At.squaredNorm();
  e += C * r * t * At.dot(X - xstar);
  e += 0.5 * (C * t * At - r * Z + r * xstar).squaredNorm();
  e += 0.5 * (r * r * r - 2.0 * r * r) * (Z - xstar).squaredNorm();
  return e;
}

double lyapunov_halpern_ode(double t, const ProxMap& resolvent, const Vector& X,
                            const Vector& x0) {
  Vector At = yosida_apply(resolvent, X);
  return t * t * At.squaredNorm() + t * At.dot(X - x0);
}

ContinuousLyapunovKind parse_lyapunov_kind(const std::string& kind) {
  if (kind == "gradient_flow") return ContinuousLyapunovKind::gradient_flow;
  if (kind == "yosida_flow") return ContinuousLyapunovKind::yosida_flow;
  if (kind == "hr_convex") return ContinuousLyapunovKind::hr_convex;
  if (kind == "hr_monotone") return ContinuousLyapunovKind::hr_monotone;
  if (kind == "halpern_ode") return ContinuousLyapunovKind::halpern_ode;
  throw std::domain_error("unknown continuous Lyapunov kind '" + kind + "'");
}

std::vector<double> monitor_series(
    const Trajectory& traj,
    const std::function<double(double, const Vector&, const Vector&)>& fn) {
  std::vector<double> out;
  out.reserve(traj.t.size());
  Vector empty;
  for (size_t i = 0; i < traj.t.size(); ++i)
    out.push_back(fn(traj.t[i], traj.X[i], traj.Z.empty() ? empty : traj.Z[i]));
  return out;
}

long first_increase(const std::vector<double>& series, double rel_tol) {
  for (size_t i = 1; i < series.size(); ++i) {
    double tol = rel_tol * std::max(1.0, std::abs(series[i - 1]));
    if (series[i] > series[i - 1] + tol) return static_cast<long>(i);
  }
  return -1;
}

}  // namespace sppa
