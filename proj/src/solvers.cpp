#include "sppa/solvers.hpp"

#include <chrono>
#include <cmath>
#include <memory>

namespace sppa {

SolverState make_state(const Vector& x0) {
  require_finite(x0, "make_state");
  SolverState s;
  s.x = x0;
  s.z = x0;
  return s;
}

void check_params(const MonotoneParams& p) {
  if (!(p.C > 0.0) || !std::isfinite(p.C))
    throw std::invalid_argument("MonotoneParams: C must be positive");
  if (!(p.r >= 2.0) || !std::isfinite(p.r))
    throw std::invalid_argument("MonotoneParams: r must be >= 2");
}

namespace {

// The two aux vectors every stepper refreshes; missing entries (fresh state
// or just after a restart) default to the current iterate.
Vector aux_or_x(const SolverState& s, const std::string& key) {
  auto it = s.aux.find(key);
  return it == s.aux.end() ? s.x : it->second;
}

void check_schedule_at(const Schedule& sched, long k) {
  double A = sched.A(k), a = sched.a(k), b = sched.b(k), c = sched.c(k);
  const double tol = 1e-12 * std::max(1.0, std::abs(a));
  bool ok = a > 0.0 && b >= 0.0 && c > 0.0 &&
            std::abs(A - a * b) <= 1e-12 * std::max({1.0, std::abs(A), std::abs(a * b)}) &&
            sched.A(k + 1) - A <= a + tol && c >= a - tol;
  if (!ok)
    throw std::invalid_argument("schedule '" + sched.name +
                                "' violates validity conditions at k = " + std::to_string(k));
}

}  // namespace

SolverState ppa_convex_step(const ProxMap& prox_f, double c_k, const SolverState& s) {
  if (!(c_k > 0.0))
    throw std::invalid_argument("ppa_convex_step: c_k must be positive");
  SolverState out = s;
  out.aux["x_prev"] = s.x;
  out.x = prox_f(c_k, s.x);
  out.k = s.k + 1;
  return out;
}

SolverState halpern_step(const ProxMap& resolvent, const SolverState& s) {
  Vector y = aux_or_x(s, "y");
  Vector y_prev = aux_or_x(s, "y_prev");
  double w = static_cast<double>(s.k) / static_cast<double>(s.k + 2);
  SolverState out = s;
  out.x = resolvent(1.0, y);
  out.aux["y_prev"] = y;
  out.aux["y"] = out.x + w * (out.x - s.x) - w * (s.x - y_prev);
  out.aux["x_prev"] = s.x;
  out.k = s.k + 1;
  return out;
}

SolverState sppa_convex_step(const ProxMap& prox_f, const Schedule& sched,
                             const SolverState& s) {
  check_schedule_at(sched, s.k);
  double a = sched.a(s.k), b = sched.b(s.k), c = sched.c(s.k);
  Vector y = (s.z + b * s.x) / (b + 1.0);
  SolverState out = s;
  out.x = prox_f(c / (b + 1.0), y);
  out.z = s.z + (a / c) * (b + 1.0) * (out.x - y);
  out.aux["y"] = y;
  out.aux["subgrad"] = (b * s.x + s.z - (b + 1.0) * out.x) / c;
  out.aux["x_prev"] = s.x;
  out.k = s.k + 1;
  return out;
}

SolverState sppa_monotone_step(const ProxMap& resolvent, const MonotoneParams& p,
                               const SolverState& s) {
  check_params(p);
  double kr = static_cast<double>(s.k) + p.r;
  Vector xt = (p.r / kr) * s.z + (static_cast<double>(s.k) / kr) * s.x;
  SolverState out = s;
  out.x = resolvent(1.0, xt);
  out.z = s.z + (p.C / p.r) * (out.x - xt);
  out.aux["x_tilde"] = xt;
  out.aux["x_prev"] = s.x;
  out.k = s.k + 1;
  return out;
}

SolverState sppa_yosida_step(const ProxMap& resolvent, const MonotoneParams& p,
                             double a_k, const SolverState& s) {
  check_params(p);
  if (!(a_k > 0.0))
    throw std::invalid_argument("sppa_yosida_step: a_k must be positive");
  double kr = static_cast<double>(s.k) + p.r;
  Vector xt = (p.r / kr) * s.z + (static_cast<double>(s.k) / kr) * s.x;
  double c = p.r * a_k / kr;
  SolverState out = s;
  out.x = (xt + c * resolvent(1.0 + c, xt)) / (1.0 + c);
  out.z = s.z + (p.C * kr / (p.r * p.r * a_k)) * (out.x - xt);
  out.aux["x_tilde"] = xt;
  // x_{k+1} = xt - c A_tilde(x_{k+1}), so the Yosida residual comes free
  out.aux["yosida_residual"] = (xt - out.x) / c;
  out.aux["x_prev"] = s.x;
  out.k = s.k + 1;
  return out;
}

double lyapunov_convex(const SolverState& s, const Schedule& sched, double f_gap,
                       const Vector& xstar) {
  if (f_gap < -1e-9)
    throw std::domain_error("lyapunov_convex: objective gap " + std::to_string(f_gap) +
                            " below -1e-9; reference solution is inconsistent");
  require_dim(xstar, s.z.size(), "lyapunov_convex xstar");
  return sched.A(s.k) * f_gap + 0.5 * (s.z - xstar).squaredNorm();
}

LyapunovMonotoneTerms lyapunov_monotone(const SolverState& s, const MonotoneParams& p,
                                        const Vector& xstar) {
  check_params(p);
  require_dim(xstar, s.x.size(), "lyapunov_monotone xstar");
  double k = static_cast<double>(s.k);
  Vector v = Vector::Zero(s.x.size());
  if (auto it = s.aux.find("yosida_residual"); it != s.aux.end())
    v = it->second;
  else if (auto jt = s.aux.find("x_tilde"); jt != s.aux.end())
    v = jt->second - s.x;
  else if (s.k > 0)
    throw std::invalid_argument("lyapunov_monotone: state lacks the step residual");
  LyapunovMonotoneTerms e;
  e.residual_term = 0.5 * p.C * k * (k + p.r - p.C * (k + 1.0)) * v.squaredNorm();
  e.inner_term = p.C * p.r * k * v.dot(s.x - xstar);
  e.mix_term = 0.5 * (p.C * k * v - p.r * s.z + p.r * xstar).squaredNorm();
  e.z_term = 0.5 * (p.r * p.r * p.r - 2.0 * p.r * p.r) * (s.z - xstar).squaredNorm();
  e.total = e.residual_term + e.inner_term + e.mix_term + e.z_term;
  return e;
}

RunResult run(const Stepper& stepper, SolverState state, long iters,
              long restart_every, const std::vector<Monitor>& monitors,
              const std::vector<InvariantCheck>& checks) {
  if (iters < 0) throw std::invalid_argument("run: iters must be >= 0");
  RunResult result;
  result.trace.reserve(static_cast<size_t>(iters));
  auto t0 = std::chrono::steady_clock::now();
  for (long i = 1; i <= iters; ++i) {
    state = stepper(state);
    TraceRecord rec;
    rec.k = state.k;
    for (const auto& m : monitors) m.fill(state, rec);
    rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    for (const auto& c : checks) {
      if (auto msg = c.check(state, rec))
        result.failures.push_back({state.k, c.name, *msg});
    }
    result.trace.push_back(std::move(rec));
    if (restart_every > 0 && i % restart_every == 0) {
      state.z = state.x;
      state.k = 0;
      state.aux.clear();
    }
  }
  result.final_state = std::move(state);
  return result;
}

InvariantCheck lyapunov_nonincrease_check(double rel_tol) {
  auto prev = std::make_shared<std::optional<double>>();
  return InvariantCheck{
      "lyapunov_nonincrease",
      [prev, rel_tol](const SolverState& s,
                      const TraceRecord& rec) -> std::optional<std::string> {
        if (!rec.lyapunov) return std::nullopt;
        if (s.k <= 1) *prev = std::nullopt;  // restart boundary
        std::optional<std::string> msg;
        if (*prev) {
          double tol = rel_tol * std::max(1.0, std::abs(**prev));
          if (*rec.lyapunov > **prev + tol)
            msg = "E rose from " + std::to_string(**prev) + " to " +
                  std::to_string(*rec.lyapunov) + " at k = " + std::to_string(s.k);
        }
        *prev = *rec.lyapunov;
        return msg;
      }};
}

InvariantCheck upper_envelope_check(std::string name,
                                    std::optional<double> TraceRecord::*field,
                                    std::function<double(long)> bound, double tol) {
  return InvariantCheck{
      std::move(name),
      [field, bound, tol](const SolverState& s,
                          const TraceRecord& rec) -> std::optional<std::string> {
        const auto& value = rec.*field;
        if (!value) return std::nullopt;
        double limit = bound(s.k);
        if (*value > limit + tol)
          return "value " + std::to_string(*value) + " exceeds bound " +
                 std::to_string(limit) + " at k = " + std::to_string(s.k);
        return std::nullopt;
      }};
}

}  // namespace sppa
