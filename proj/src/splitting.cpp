#include "sppa/splitting.hpp"

#include <cmath>

namespace sppa {

namespace {

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

Vector metric_or_ones(const Vector& H, Index m) {
  if (H.size() == 0) return Vector::Ones(m);
  require_dim(H, m, "dual metric H");
  if ((H.array() <= 0.0).any())
    throw std::invalid_argument("dual metric H must have positive entries");
  return H;
}

Vector aux_or_zero(const SolverState& s, const std::string& key, Index dim) {
  auto it = s.aux.find(key);
  return it == s.aux.end() ? Vector(Vector::Zero(dim)) : it->second;
}

}  // namespace

Vector equality_metric(const EqualityConstrainedProblem& p) {
  return metric_or_ones(p.H, p.A.rows());
}

SolverState salm_step(const EqualityConstrainedProblem& p, const Schedule& sched,
                      const SolverState& s) {
  check_schedule_at(sched, s.k);
  double a = sched.a(s.k), b = sched.b(s.k), c = sched.c(s.k);
  double cprime = c / (b + 1.0);
  Vector H = metric_or_ones(p.H, p.A.rows());
  Vector lt = (s.z + b * s.x) / (b + 1.0);
  Vector x = p.subproblem(lt, cprime);
  Vector u = p.A * x - p.b;
  SolverState out = s;
  out.x = lt - cprime * (H.array() * u.array()).matrix();
  out.z = s.z - a * (H.array() * u.array()).matrix();
  out.aux["primal"] = x;
  out.aux["constraint"] = u;
  out.aux["lambda_tilde"] = lt;
  out.k = s.k + 1;
  return out;
}

SolverState salm_generic_step(const PerturbationOracle& o, const Schedule& sched,
                              const SolverState& s) {
  check_schedule_at(sched, s.k);
  double a = sched.a(s.k), b = sched.b(s.k), c = sched.c(s.k);
  double cprime = c / (b + 1.0);
  Vector lt = (s.z + b * s.x) / (b + 1.0);
  auto [x, u] = o.solve(lt, cprime);
  Vector H = metric_or_ones(o.H, u.size());
  SolverState out = s;
  out.x = lt - cprime * (H.array() * u.array()).matrix();
  out.z = s.z + (a / c) * (b + 1.0) * (out.x - lt);
  out.aux["primal"] = x;
  out.aux["constraint"] = u;
  out.aux["lambda_tilde"] = lt;
  out.k = s.k + 1;
  return out;
}

SolverState sdr_step(const ProxMap& res_a, const ProxMap& res_b, double rho,
                     const MonotoneParams& p, const SolverState& s) {
  check_params(p);
  if (!(rho > 0.0)) throw std::invalid_argument("sdr_step: rho must be positive");
  double kr = static_cast<double>(s.k) + p.r;
  Vector xt = (p.r / kr) * s.z + (static_cast<double>(s.k) / kr) * s.x;
  Vector u = res_b(rho, xt);
  Vector v = res_a(rho, (2.0 * u - xt).eval());
  SolverState out = s;
  // x = T(x_tilde) with T the Douglas-Rachford operator; written out,
  // T(w) = w + J_{rho A}(2 J_{rho B}(w) - w) - J_{rho B}(w).
  out.x = xt + v - u;
  out.z = s.z + (p.C / p.r) * (out.x - xt);
  out.aux["x_tilde"] = xt;
  out.aux["u"] = u;
  out.aux["v"] = v;
  out.aux["x_prev"] = s.x;
  out.k = s.k + 1;
  return out;
}

SolverState sadmm_step(const AdmmProblem& p, const MonotoneParams& params,
                       const SolverState& s) {
  check_params(params);
  if (!(p.rho > 0.0)) throw std::invalid_argument("sadmm_step: rho must be positive");
  double kr = static_cast<double>(s.k) + params.r;
  Vector ut = (params.r / kr) * s.z + (static_cast<double>(s.k) / kr) * s.x;
  Vector x = p.f_subproblem(ut, (-p.c).eval(), p.rho);
  Vector ax_c = p.A * x - p.c;
  Vector y = p.g_subproblem(ut, (2.0 * ax_c).eval(), p.rho);
  Vector resid = ax_c + p.B * y;
  SolverState out = s;
  out.x = ut + p.rho * resid;
  out.z = s.z + (params.C / params.r) * p.rho * resid;
  out.aux["primal_x"] = x;
  out.aux["primal_y"] = y;
  out.aux["u_tilde"] = ut;
  out.aux["residual"] = resid;
  out.aux["x_prev"] = s.x;
  out.k = s.k + 1;
  return out;
}

SolverState sadmm_step_v2(const AdmmProblem& p, const MonotoneParams& params,
                          const SolverState& s) {
  check_params(params);
  if (!(p.rho > 0.0)) throw std::invalid_argument("sadmm_step_v2: rho must be positive");
  double k = static_cast<double>(s.k);
  double kr = k + params.r;
  Vector y_prev = aux_or_zero(s, "primal_y", p.B.cols());
  Vector x = p.f_subproblem(s.x, (p.B * y_prev - p.c).eval(), p.rho);
  Vector ax_c = p.A * x - p.c;
  SolverState out = s;
  out.z = s.z + (params.C * p.rho / params.r) * (ax_c + p.B * y_prev);
  Vector lt = (params.r / kr) * out.z + (k / kr) * s.x;
  Vector y = p.g_subproblem(lt, ((k / kr) * ax_c).eval(), p.rho);
  out.x = lt + (k * p.rho / kr) * ax_c + p.rho * (p.B * y);
  out.aux["primal_x"] = x;
  out.aux["primal_y"] = y;
  out.aux["lambda_tilde"] = lt;
  out.aux["residual"] = ax_c + p.B * y;
  out.k = s.k + 1;
  return out;
}

namespace {

void check_saddle(const SaddleProblem& p, const MonotoneParams& params) {
  if (!(p.mu1 > 0.0) || !(p.mu2 > 0.0))
    throw std::invalid_argument("saddle step sizes must be positive");
  if (params.guarantee_mode() && p.mu1 * p.mu2 * p.norm_K * p.norm_K >= 1.0)
    throw std::invalid_argument(
        "guarantee mode requires mu1 mu2 ||K||^2 < 1; got " +
        std::to_string(p.mu1 * p.mu2 * p.norm_K * p.norm_K));
}

}  // namespace

SolverState spdhg_step(const SaddleProblem& p, const MonotoneParams& params,
                       const SolverState& s) {
  check_params(params);
  check_saddle(p, params);
  Index n = p.K.cols(), m = p.K.rows();
  require_dim(s.x, n + m, "spdhg_step state");
  double kr = static_cast<double>(s.k) + params.r;
  Vector ut = (params.r / kr) * s.z + (static_cast<double>(s.k) / kr) * s.x;
  Vector xt = ut.head(n), yt = ut.tail(m);
  Vector x = p.prox_f(p.mu1, (xt - p.mu1 * (p.K.transpose() * yt)).eval());
  Vector y = p.prox_g(p.mu2, (yt + p.mu2 * (p.K * (2.0 * x - xt))).eval());
  SolverState out = s;
  out.x.head(n) = x;
  out.x.tail(m) = y;
  out.z = s.z + (params.C / params.r) * (out.x - ut);
  out.aux["u_tilde"] = ut;
  out.aux["x_prev"] = s.x;
  out.k = s.k + 1;
  return out;
}

SolverState classical_alm_step(const EqualityConstrainedProblem& p, double rho,
                               const SolverState& s) {
  if (!(rho > 0.0)) throw std::invalid_argument("classical_alm_step: rho must be positive");
  Vector H = metric_or_ones(p.H, p.A.rows());
  Vector x = p.subproblem(s.x, rho);
  Vector u = p.A * x - p.b;
  SolverState out = s;
  out.x = s.x - rho * (H.array() * u.array()).matrix();
  out.aux["primal"] = x;
  out.aux["constraint"] = u;
  out.k = s.k + 1;
  return out;
}

SolverState classical_dr_step(const ProxMap& res_a, const ProxMap& res_b, double rho,
                              const SolverState& s) {
  SolverState out = s;
  out.aux["x_prev"] = s.x;
  out.x = dr_operator(res_a, res_b, rho, s.x);
  out.k = s.k + 1;
  return out;
}

SolverState classical_admm_step(const AdmmProblem& p, const SolverState& s) {
  if (!(p.rho > 0.0)) throw std::invalid_argument("classical_admm_step: rho must be positive");
  Vector y_prev = aux_or_zero(s, "primal_y", p.B.cols());
  Vector x = p.f_subproblem(s.x, (p.B * y_prev - p.c).eval(), p.rho);
  Vector ax_c = p.A * x - p.c;
  Vector y = p.g_subproblem(s.x, ax_c, p.rho);
  Vector resid = ax_c + p.B * y;
  SolverState out = s;
  out.x = s.x + p.rho * resid;
  out.aux["primal_x"] = x;
  out.aux["primal_y"] = y;
  out.aux["residual"] = resid;
  out.k = s.k + 1;
  return out;
}

SolverState classical_pdhg_step(const SaddleProblem& p, const SolverState& s) {
  if (!(p.mu1 > 0.0) || !(p.mu2 > 0.0))
    throw std::invalid_argument("classical_pdhg_step: step sizes must be positive");
  Index n = p.K.cols(), m = p.K.rows();
  require_dim(s.x, n + m, "classical_pdhg_step state");
  Vector xt = s.x.head(n), yt = s.x.tail(m);
  Vector x = p.prox_f(p.mu1, (xt - p.mu1 * (p.K.transpose() * yt)).eval());
  Vector y = p.prox_g(p.mu2, (yt + p.mu2 * (p.K * (2.0 * x - xt))).eval());
  SolverState out = s;
  out.x.head(n) = x;
  out.x.tail(m) = y;
  out.aux["x_prev"] = s.x;
  out.k = s.k + 1;
  return out;
}

}  // namespace sppa
