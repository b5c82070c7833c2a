#include "sppa/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <memory>
#include <sstream>

#include "json.hpp"
#include "sppa/operators.hpp"
#include "sppa/schedules.hpp"
#include "sppa/splitting.hpp"

namespace sppa {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

const std::array<std::pair<const char*, std::optional<double> TraceRecord::*>, 4>
    kMetricFields = {{
        {"objective_gap", &TraceRecord::objective_gap},
        {"residual_sq", &TraceRecord::residual_sq},
        {"inner_product", &TraceRecord::inner_product},
        {"lyapunov", &TraceRecord::lyapunov},
    }};

std::optional<double> TraceRecord::*metric_field(const std::string& name) {
  for (const auto& [key, field] : kMetricFields)
    if (name == key) return field;
  throw std::invalid_argument("unknown metric '" + name + "'");
}

double parse_double(const std::string& s) {
  try {
    size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("not a number: '" + s + "'");
  }
}

long parse_long(const std::string& s) {
  try {
    size_t pos = 0;
    long v = std::stol(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("not an integer: '" + s + "'");
  }
}

std::uint64_t parse_seed(const std::string& s) {
  try {
    size_t pos = 0;
    unsigned long long v = std::stoull(s, &pos);
    if (pos != s.size() || s.empty() || s[0] == '-') throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("not a seed: '" + s + "'");
  }
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// ---- config ----

const std::vector<std::string> kSolvers = {
    "salm", "alm",  "sadmm", "sadmm_v2", "admm",        "sdr",         "dr",
    "spdhg", "pdhg", "ppa",   "halpern",  "sppa_convex", "sppa_monotone",
    "sppa_yosida"};

const std::vector<std::string> kKinds = {"lasso", "basis_pursuit", "fused_lasso",
                                         "matrix_game", "quadratic_l1"};

void check_config(const ExperimentConfig& cfg) {
  if (std::find(kKinds.begin(), kKinds.end(), cfg.problem_kind) == kKinds.end())
    throw ConfigError("unknown problem kind '" + cfg.problem_kind + "'");
  if (std::find(kSolvers.begin(), kSolvers.end(), cfg.solver) == kSolvers.end())
    throw ConfigError("unknown solver '" + cfg.solver + "'");
  if (cfg.n <= 0) throw ConfigError("n must be positive");
  if (cfg.problem_kind != "quadratic_l1" && cfg.m <= 0)
    throw ConfigError("m must be positive");
  if (cfg.iters < 0) throw ConfigError("iters must be nonnegative");
  if (cfg.restart_every < 0) throw ConfigError("restart_every must be nonnegative");
  if (cfg.rho <= 0.0) throw ConfigError("rho must be positive");
  if (cfg.C <= 0.0) throw ConfigError("C must be positive");
  if (cfg.r < 2.0) throw ConfigError("r must be at least 2");
  if (cfg.reference_budget <= 0) throw ConfigError("reference_budget must be positive");
}

}  // namespace

ExperimentConfig preset_config(const std::string& name) {
  ExperimentConfig cfg;
  cfg.preset = name;
  if (name == "salm-lasso") {
    cfg.problem_kind = "lasso";
    cfg.m = 100;
    cfg.n = 200;
    cfg.solver = "salm";
    cfg.schedule_name = "salm_lasso";
    cfg.rho = 10.0;
    cfg.iters = 1000;
  } else if (name == "sadmm-bp") {
    cfg.problem_kind = "basis_pursuit";
    cfg.m = 100;
    cfg.n = 200;
    cfg.solver = "sadmm";
    cfg.rho = 10.0;
    cfg.C = 1.0;
    cfg.r = 2.0;
    cfg.iters = 5000;
  } else if (name == "spdhg-game") {
    cfg.problem_kind = "matrix_game";
    cfg.m = 50;
    cfg.n = 50;
    cfg.solver = "spdhg";
    cfg.C = 1.0;
    cfg.r = 2.0;
    cfg.iters = 10000;
    cfg.restart_every = 50;
  } else if (name == "sadmm-fused") {
    cfg.problem_kind = "fused_lasso";
    cfg.m = 100;
    cfg.n = 200;
    cfg.solver = "sadmm";
    cfg.rho = 1.0;
    cfg.C = 1.0;
    cfg.r = 2.0;
    cfg.iters = 20000;
  } else {
    throw ConfigError("unknown preset '" + name + "'");
  }
  return cfg;
}

ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");

  ExperimentConfig cfg;
  if (j.contains("preset")) {
    if (!j["preset"].is_string()) throw ConfigError("preset must be a string");
    cfg = preset_config(j["preset"].get<std::string>());
  }

  auto get_str = [&](const char* key, std::string& out) {
    if (!j[key].is_string()) throw ConfigError(std::string(key) + " must be a string");
    out = j[key].get<std::string>();
  };
  auto get_num = [&](const char* key, double& out) {
    if (!j[key].is_number()) throw ConfigError(std::string(key) + " must be a number");
    out = j[key].get<double>();
  };
  auto get_int = [&](const char* key, long& out) {
    if (!j[key].is_number_integer())
      throw ConfigError(std::string(key) + " must be an integer");
    out = j[key].get<long>();
  };

  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& key = it.key();
    if (key == "preset") {
    } else if (key == "problem") {
      get_str("problem", cfg.problem_kind);
    } else if (key == "solver") {
      get_str("solver", cfg.solver);
    } else if (key == "schedule") {
      get_str("schedule", cfg.schedule_name);
    } else if (key == "out") {
      get_str("out", cfg.out);
    } else if (key == "m") {
      long v = 0;
      get_int("m", v);
      cfg.m = v;
    } else if (key == "n") {
      long v = 0;
      get_int("n", v);
      cfg.n = v;
    } else if (key == "seed") {
      if (!it.value().is_number_unsigned())
        throw ConfigError("seed must be a nonnegative integer");
      cfg.seed = it.value().get<std::uint64_t>();
    } else if (key == "iters") {
      get_int("iters", cfg.iters);
    } else if (key == "restart_every") {
      get_int("restart_every", cfg.restart_every);
    } else if (key == "reference_budget") {
      get_int("reference_budget", cfg.reference_budget);
    } else if (key == "schedule_param") {
      get_num("schedule_param", cfg.schedule_param);
    } else if (key == "mu") {
      get_num("mu", cfg.mu);
    } else if (key == "mu1") {
      get_num("mu1", cfg.mu1);
    } else if (key == "mu2") {
      get_num("mu2", cfg.mu2);
    } else if (key == "C") {
      get_num("C", cfg.C);
    } else if (key == "r") {
      get_num("r", cfg.r);
    } else if (key == "rho") {
      get_num("rho", cfg.rho);
    } else {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
  check_config(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

namespace {

// ---- instance + reference context ----

struct Context {
  ProblemInstance inst;
  ReferenceSolution ref;
};

ProblemInstance make_instance(const ExperimentConfig& cfg) {
  ProblemInstance inst;
  if (cfg.problem_kind == "lasso") {
    if (cfg.mu <= 0.0) throw ConfigError("mu must be positive");
    inst = gen_lasso(cfg.m, cfg.n, cfg.seed, cfg.mu);
  } else if (cfg.problem_kind == "basis_pursuit") {
    inst = gen_basis_pursuit(cfg.m, cfg.n, cfg.seed);
  } else if (cfg.problem_kind == "fused_lasso") {
    inst = gen_fused_lasso(cfg.m, cfg.n, cfg.seed, cfg.mu1 > 0.0 ? cfg.mu1 : 5.0,
                           cfg.mu2 > 0.0 ? cfg.mu2 : 10.0);
  } else if (cfg.problem_kind == "matrix_game") {
    inst = gen_matrix_game(cfg.m, cfg.n, cfg.seed);
    if (cfg.mu1 > 0.0) inst.mu1 = cfg.mu1;
    if (cfg.mu2 > 0.0) inst.mu2 = cfg.mu2;
  } else {
    if (cfg.mu <= 0.0) throw ConfigError("mu must be positive");
    inst = gen_quadratic_l1(cfg.n, cfg.seed, cfg.mu);
  }
  return inst;
}

Context make_context(const ExperimentConfig& cfg) {
  Context ctx;
  ctx.inst = make_instance(cfg);
  ctx.ref = reference_solution(ctx.inst, cfg.reference_budget);
  return ctx;
}

// ---- wiring ----

struct ArmedBound {
  std::string name;
  std::optional<double> TraceRecord::*field;
  std::function<double(long)> bound;  // clock k >= 1; +inf when not applicable
  bool running_min = false;
};

struct Wiring {
  SolverState init;
  Stepper step;
  std::function<TraceRecord(const SolverState& prev, const SolverState& cur)> observe;
  std::vector<ArmedBound> bounds;
  bool lyap_armed = false;
  bool guarantee = false;
  std::shared_ptr<double> D0;  // squared anchor distance, re-anchored on restart
  Vector anchor_ref;           // solver-space reference point
};

Vector aux_of(const SolverState& s, const char* key) {
  auto it = s.aux.find(key);
  if (it == s.aux.end())
    throw std::runtime_error(std::string("missing solver aux '") + key + "'");
  return it->second;
}

// Theorem 11 envelope on the residual, with the Corollary 3 rho^2 divisor
// folded into `divisor`.
void arm_monotone_bounds(Wiring& w, const MonotoneParams& mp, double divisor,
                         bool with_inner) {
  double C = mp.C, r = mp.r;
  auto D0 = w.D0;
  w.bounds.push_back(
      {"residual_bound", &TraceRecord::residual_sq,
       [C, r, divisor, D0](long k) {
         if (k < 1) return kInf;
         double denom = divisor * C * k * (k + 3.0 * r - C * (k + 1.0));
         if (denom <= 0.0) return kInf;
         return (r * r * r - r * r) * (*D0) / denom;
       },
       false});
  if (with_inner)
    w.bounds.push_back({"inner_bound", &TraceRecord::inner_product,
                        [C, r, D0](long k) {
                          if (k < 1) return kInf;
                          return (r * r * r - r * r) * (*D0) / (2.0 * C * r * k);
                        },
                        false});
}

// Theorem 6 / Theorem 8 weighted-gap and minimal-residual bounds.
void arm_convex_bounds(Wiring& w, const Schedule& sched, long horizon) {
  auto D0 = w.D0;
  auto A = sched.A;
  w.bounds.push_back({"gap_bound", &TraceRecord::objective_gap,
                      [A, D0](long k) {
                        if (k < 1) return kInf;
                        double Ak = A(k);
                        if (!(Ak > 0.0) || !std::isfinite(Ak)) return kInf;
                        return (*D0) / (2.0 * Ak);
                      },
                      false});
  auto cum = std::make_shared<std::vector<double>>();
  cum->resize(static_cast<size_t>(horizon) + 2, 0.0);
  for (long k = 1; k <= horizon + 1; ++k) {
    double a = sched.a(k - 1);
    (*cum)[static_cast<size_t>(k)] =
        (*cum)[static_cast<size_t>(k - 1)] + a * a;
  }
  w.bounds.push_back({"residual_min_bound", &TraceRecord::residual_sq,
                      [cum, D0](long k) {
                        if (k < 1 || k >= static_cast<long>(cum->size())) return kInf;
                        double s = (*cum)[static_cast<size_t>(k)];
                        if (!(s > 0.0) || !std::isfinite(s)) return kInf;
                        return (*D0) / s;
                      },
                      true});
}

// Iterates the Douglas-Rachford map to its fixed point; used to anchor the
// monotone-envelope monitors when the solver runs on the DR operator.
Vector dr_fixed_point(const ProxMap& res_a, const ProxMap& res_b, double rho,
                      Vector x, long max_iter = 100000, double tol = 1e-14) {
  for (long i = 0; i < max_iter; ++i) {
    Vector xn = dr_operator(res_a, res_b, rho, x);
    double change = (xn - x).norm();
    x = xn;
    if (change <= tol * (1.0 + x.norm())) break;
  }
  return x;
}

// The u-sequence of the u_tilde ADMM variant applies the resolvent of a dual
// Douglas-Rachford operator; the monitors must therefore anchor at one of its
// fixed points, not at a KKT multiplier. Polished by direct iteration from a
// multiplier guess (the map is firmly nonexpansive, convergence is fast).
Vector admm_dual_fixed_point(const AdmmProblem& ap, Vector w,
                             long max_iter = 100000, double tol = 1e-14) {
  for (long i = 0; i < max_iter; ++i) {
    Vector x = ap.f_subproblem(w, (-ap.c).eval(), ap.rho);
    Vector y = ap.g_subproblem(w, (2.0 * (ap.A * x - ap.c)).eval(), ap.rho);
    Vector wn = w + ap.rho * (ap.A * x + ap.B * y - ap.c);
    double change = (wn - w).norm();
    w = wn;
    if (change <= tol * (1.0 + w.norm())) break;
  }
  return w;
}

double saddle_gap(const ProblemInstance& inst, const Vector& u) {
  Index n = inst.A.cols(), m = inst.A.rows();
  Vector x = u.head(n), y = u.tail(m);
  double sup_y = inst.a_lin.dot(x) + (inst.A * x - inst.b).maxCoeff();
  double inf_x = (inst.A.transpose() * y + inst.a_lin).minCoeff() - inst.b.dot(y);
  return sup_y - inf_x;
}

Schedule checked_schedule(const ExperimentConfig& cfg) {
  Schedule sched = make_schedule(cfg.schedule_name, cfg.schedule_param);
  long horizon = std::min(cfg.iters + 1, 100000L);
  ScheduleReport rep = validate(sched, horizon);
  if (!rep.valid)
    throw ConfigError("schedule '" + cfg.schedule_name + "' invalid at k=" +
                      std::to_string(rep.first_violation) + ": " + rep.condition);
  return sched;
}

ProxMap lasso_objective_prox(const ProblemInstance& inst) {
  Index n = inst.A.cols();
  Matrix A = inst.A;
  Matrix At = inst.A.transpose();
  Vector b = inst.b;
  double norm_a = power_iteration_norm(inst.A);
  double lip = norm_a * norm_a * (1.0 + 1e-6);
  ProxMap l1 = l1_prox(n, inst.mu);
  return ProxMap(
      n,
      [A, At, b, lip, l1, n](double t, const Vector& v) {
        auto grad = [&](const Vector& x) {
          return Vector(At * (A * x - b) + (x - v) / t);
        };
        FistaResult res = fista_solve(grad, lip + 1.0 / t, l1, v, 20000, 1e-12);
        return res.x;
      },
      "lasso_objective");
}

Wiring wire(const ExperimentConfig& cfg, const Context& ctx) {
  const ProblemInstance& inst = ctx.inst;
  const ReferenceSolution& ref = ctx.ref;
  const std::string& kind = cfg.problem_kind;
  Rng x0rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);  // initial-point stream
  MonotoneParams params{cfg.C, cfg.r};
  check_params(params);

  auto unsupported = [&]() -> ConfigError {
    return ConfigError("solver '" + cfg.solver + "' does not support problem '" +
                       kind + "'");
  };

  Wiring w;
  w.D0 = std::make_shared<double>(0.0);

  // convex minimization family on an explicit prox oracle
  if (cfg.solver == "sppa_convex" || cfg.solver == "ppa" ||
      ((cfg.solver == "sppa_monotone" || cfg.solver == "sppa_yosida" ||
        cfg.solver == "halpern") &&
       kind == "quadratic_l1")) {
    ProxMap prox;
    if (kind == "quadratic_l1")
      prox = separable_quadratic_l1_prox(inst.q, inst.l, inst.mu);
    else if (kind == "lasso")
      prox = lasso_objective_prox(inst);
    else
      throw unsupported();

    Index n = prox.dimension();
    Vector x0 = x0rng.normal_vector(n);
    Vector xstar = ref.xstar;
    ProblemInstance pi = inst;
    // Difference-form gap: the Lyapunov weights grow like k^2, which would
    // amplify plain f(x) - f* cancellation noise past the monitor tolerance.
    auto gap_at = [pi, xstar](const Vector& x) { return objective_gap(pi, x, xstar); };
    w.init = make_state(x0);
    w.anchor_ref = xstar;
    *w.D0 = (x0 - xstar).squaredNorm();

    if (cfg.solver == "sppa_convex") {
      Schedule sched = checked_schedule(cfg);
      w.step = [prox, sched](const SolverState& s) {
        return sppa_convex_step(prox, sched, s);
      };
      w.observe = [gap_at, xstar, sched](const SolverState&,
                                         const SolverState& cur) {
        TraceRecord rec;
        double gap = gap_at(cur.x);
        rec.objective_gap = gap;
        rec.residual_sq = aux_of(cur, "subgrad").squaredNorm();
        rec.lyapunov = lyapunov_convex(cur, sched, gap, xstar);
        return rec;
      };
      w.guarantee = true;
      w.lyap_armed = true;
      arm_convex_bounds(w, sched, cfg.iters);
    } else if (cfg.solver == "ppa") {
      double c = cfg.schedule_param;
      if (c <= 0.0) throw ConfigError("schedule_param (the PPA step) must be positive");
      w.step = [prox, c](const SolverState& s) { return ppa_convex_step(prox, c, s); };
      w.observe = [gap_at, xstar, c](const SolverState& prev,
                                     const SolverState& cur) {
        TraceRecord rec;
        double gap = gap_at(cur.x);
        rec.objective_gap = gap;
        rec.residual_sq = ((prev.x - cur.x) / c).squaredNorm();
        rec.lyapunov =
            cur.k * c * gap + 0.5 * (cur.x - xstar).squaredNorm();
        return rec;
      };
      w.guarantee = true;
      w.lyap_armed = true;
      auto D0 = w.D0;
      w.bounds.push_back({"gap_bound", &TraceRecord::objective_gap,
                          [c, D0](long k) {
                            return k >= 1 ? (*D0) / (2.0 * k * c) : kInf;
                          },
                          false});
    } else if (cfg.solver == "sppa_monotone") {
      w.step = [prox, params](const SolverState& s) {
        return sppa_monotone_step(prox, params, s);
      };
      w.observe = [gap_at, xstar, params](const SolverState&,
                                          const SolverState& cur) {
        TraceRecord rec;
        rec.objective_gap = gap_at(cur.x);
        Vector v = aux_of(cur, "x_tilde") - cur.x;
        rec.residual_sq = v.squaredNorm();
        rec.inner_product = v.dot(cur.x - xstar);
        rec.lyapunov = lyapunov_monotone(cur, params, xstar).total;
        return rec;
      };
      w.guarantee = params.guarantee_mode();
      w.lyap_armed = w.guarantee;
      if (w.guarantee) arm_monotone_bounds(w, params, 1.0, true);
    } else if (cfg.solver == "sppa_yosida") {
      double r = params.r;
      w.step = [prox, params, r](const SolverState& s) {
        double a_k = 1.0 + static_cast<double>(s.k) / r;
        return sppa_yosida_step(prox, params, a_k, s);
      };
      w.observe = [gap_at, xstar, params](const SolverState&,
                                          const SolverState& cur) {
        TraceRecord rec;
        rec.objective_gap = gap_at(cur.x);
        Vector v = aux_of(cur, "yosida_residual");
        rec.residual_sq = v.squaredNorm();
        rec.inner_product = v.dot(cur.x - xstar);
        rec.lyapunov = lyapunov_monotone(cur, params, xstar).total;
        return rec;
      };
      w.guarantee = params.guarantee_mode();
      w.lyap_armed = w.guarantee;
      if (w.guarantee) arm_monotone_bounds(w, params, 1.0, true);
    } else {  // halpern
      w.step = [prox](const SolverState& s) { return halpern_step(prox, s); };
      w.observe = [gap_at](const SolverState& prev, const SolverState& cur) {
        TraceRecord rec;
        rec.objective_gap = gap_at(cur.x);
        rec.residual_sq = (cur.x - prev.x).squaredNorm();
        return rec;
      };
      w.guarantee = false;
    }
    return w;
  }

  // augmented Lagrangian family on the LASSO consensus form
  if (cfg.solver == "salm" || cfg.solver == "alm") {
    if (kind != "lasso") throw unsupported();
    EqualityConstrainedProblem ec = lasso_salm(inst);
    Index n = inst.A.cols();
    Vector lamstar = inst.A.transpose() * (inst.A * ref.xstar - inst.b);
    Vector lam0 = x0rng.normal_vector(n);
    double fstar = ref.fstar;
    w.init = make_state(lam0);
    w.anchor_ref = lamstar;
    *w.D0 = (lam0 - lamstar).squaredNorm();
    auto objective = ec.objective;
    auto gap_of = [objective, fstar](const SolverState& cur) {
      Vector v = aux_of(cur, "primal");
      Vector u = aux_of(cur, "constraint");
      return fstar - objective(v) + cur.x.dot(u);
    };
    if (cfg.solver == "salm") {
      Schedule sched = checked_schedule(cfg);
      w.step = [ec, sched](const SolverState& s) { return salm_step(ec, sched, s); };
      w.observe = [gap_of, lamstar, sched](const SolverState&, const SolverState& cur) {
        TraceRecord rec;
        double gap = gap_of(cur);
        rec.objective_gap = gap;
        rec.residual_sq = aux_of(cur, "constraint").squaredNorm();
        rec.lyapunov = lyapunov_convex(cur, sched, gap, lamstar);
        return rec;
      };
      w.guarantee = true;
      w.lyap_armed = true;
      arm_convex_bounds(w, sched, cfg.iters);
    } else {
      double rho = cfg.rho;
      w.step = [ec, rho](const SolverState& s) {
        return classical_alm_step(ec, rho, s);
      };
      w.observe = [gap_of](const SolverState&, const SolverState& cur) {
        TraceRecord rec;
        rec.objective_gap = gap_of(cur);
        rec.residual_sq = aux_of(cur, "constraint").squaredNorm();
        return rec;
      };
      w.guarantee = false;
    }
    return w;
  }

  // ADMM family
  if (cfg.solver == "sadmm" || cfg.solver == "sadmm_v2" || cfg.solver == "admm") {
    AdmmProblem ap;
    Vector ustar;
    std::function<double(const Vector&)> primal_obj;
    ProblemInstance pi = inst;
    if (kind == "basis_pursuit") {
      ap = basis_pursuit_admm(inst, cfg.rho);
      ustar = admm_dual_fixed_point(ap, ref.dual, cfg.reference_budget);
      primal_obj = [](const Vector& y) { return y.lpNorm<1>(); };
    } else if (kind == "fused_lasso") {
      ap = fused_lasso_admm(inst, cfg.rho);
      ustar = admm_dual_fixed_point(ap, ref.dual, cfg.reference_budget);
      primal_obj = [pi](const Vector& y) { return objective_value(pi, y); };
    } else if (kind == "lasso") {
      ap = lasso_admm(inst, cfg.rho);
      ustar = admm_dual_fixed_point(
          ap, (-inst.A.transpose() * (inst.A * ref.xstar - inst.b)).eval(),
          cfg.reference_budget);
      primal_obj = [pi](const Vector& y) { return objective_value(pi, y); };
    } else {
      throw unsupported();
    }
    double fstar = ref.fstar;
    Vector u0 = x0rng.normal_vector(ap.A.rows());
    w.init = make_state(u0);
    w.anchor_ref = ustar;
    *w.D0 = (u0 - ustar).squaredNorm();
    if (cfg.solver == "sadmm") {
      w.step = [ap, params](const SolverState& s) { return sadmm_step(ap, params, s); };
      w.observe = [primal_obj, fstar, ustar, params](const SolverState&,
                                                     const SolverState& cur) {
        TraceRecord rec;
        rec.objective_gap = primal_obj(aux_of(cur, "primal_y")) - fstar;
        Vector resid = aux_of(cur, "residual");
        rec.residual_sq = resid.squaredNorm();
        Vector v = aux_of(cur, "u_tilde") - cur.x;
        rec.inner_product = v.dot(cur.x - ustar);
        SolverState shadow;
        shadow.k = cur.k;
        shadow.x = cur.x;
        shadow.z = cur.z;
        shadow.aux["x_tilde"] = aux_of(cur, "u_tilde");
        rec.lyapunov = lyapunov_monotone(shadow, params, ustar).total;
        return rec;
      };
      w.guarantee = params.guarantee_mode();
      w.lyap_armed = w.guarantee;
      if (w.guarantee)
        arm_monotone_bounds(w, params, cfg.rho * cfg.rho, true);
    } else if (cfg.solver == "sadmm_v2") {
      w.step = [ap, params](const SolverState& s) {
        return sadmm_step_v2(ap, params, s);
      };
      w.observe = [primal_obj, fstar](const SolverState&, const SolverState& cur) {
        TraceRecord rec;
        rec.objective_gap = primal_obj(aux_of(cur, "primal_y")) - fstar;
        rec.residual_sq = aux_of(cur, "residual").squaredNorm();
        return rec;
      };
      w.guarantee = false;  // reordered variant: no rate claim
    } else {
      w.step = [ap](const SolverState& s) { return classical_admm_step(ap, s); };
      w.observe = [primal_obj, fstar](const SolverState&, const SolverState& cur) {
        TraceRecord rec;
        rec.objective_gap = primal_obj(aux_of(cur, "primal_y")) - fstar;
        rec.residual_sq = aux_of(cur, "residual").squaredNorm();
        return rec;
      };
      w.guarantee = false;
    }
    return w;
  }

  // Douglas-Rachford family on basis pursuit
  if (cfg.solver == "sdr" || cfg.solver == "dr" ||
      cfg.solver == "sppa_monotone" || cfg.solver == "sppa_yosida" ||
      cfg.solver == "halpern") {
    if (kind != "basis_pursuit") throw unsupported();
    Index n = inst.A.cols();
    ProxMap res_a = l1_prox(n);
    ProxMap res_b = affine_projection_prox(inst.A, inst.b);
    double rho = cfg.rho;
    double fstar = ref.fstar;
    Vector start = ref.xstar + rho * ref.dual;
    Vector xfix = dr_fixed_point(res_a, res_b, rho, start);
    Vector x0 = x0rng.normal_vector(n);
    w.init = make_state(x0);
    w.anchor_ref = xfix;
    *w.D0 = (x0 - xfix).squaredNorm();
    auto feasible_gap = [res_b, fstar](const Vector& x) {
      return res_b(1.0, x).lpNorm<1>() - fstar;
    };
    if (cfg.solver == "sdr") {
      w.step = [res_a, res_b, rho, params](const SolverState& s) {
        return sdr_step(res_a, res_b, rho, params, s);
      };
      w.observe = [feasible_gap, xfix, params](const SolverState&,
                                               const SolverState& cur) {
        TraceRecord rec;
        rec.objective_gap = feasible_gap(cur.x);
        Vector v = aux_of(cur, "x_tilde") - cur.x;
        rec.residual_sq = v.squaredNorm();
        rec.inner_product = v.dot(cur.x - xfix);
        rec.lyapunov = lyapunov_monotone(cur, params, xfix).total;
        return rec;
      };
      w.guarantee = params.guarantee_mode();
      w.lyap_armed = w.guarantee;
      if (w.guarantee) arm_monotone_bounds(w, params, 1.0, true);
    } else if (cfg.solver == "sppa_monotone" || cfg.solver == "sppa_yosida") {
      ProxMap T = dr_prox_map(res_a, res_b, rho);
      if (cfg.solver == "sppa_monotone") {
        w.step = [T, params](const SolverState& s) {
          return sppa_monotone_step(T, params, s);
        };
      } else {
        // the DR resolvent only admits step 1, which rules out the Yosida
        // reindexing
        throw unsupported();
      }
      w.observe = [feasible_gap, xfix, params](const SolverState&,
                                               const SolverState& cur) {
        TraceRecord rec;
        rec.objective_gap = feasible_gap(cur.x);
        Vector v = aux_of(cur, "x_tilde") - cur.x;
        rec.residual_sq = v.squaredNorm();
        rec.inner_product = v.dot(cur.x - xfix);
        rec.lyapunov = lyapunov_monotone(cur, params, xfix).total;
        return rec;
      };
      w.guarantee = params.guarantee_mode();
      w.lyap_armed = w.guarantee;
      if (w.guarantee) arm_monotone_bounds(w, params, 1.0, true);
    } else if (cfg.solver == "halpern") {
      ProxMap T = dr_prox_map(res_a, res_b, rho);
      w.step = [T](const SolverState& s) { return halpern_step(T, s); };
      w.observe = [feasible_gap](const SolverState& prev, const SolverState& cur) {
        TraceRecord rec;
        rec.objective_gap = feasible_gap(cur.x);
        rec.residual_sq = (cur.x - prev.x).squaredNorm();
        return rec;
      };
      w.guarantee = false;
    } else {  // dr
      w.step = [res_a, res_b, rho](const SolverState& s) {
        return classical_dr_step(res_a, res_b, rho, s);
      };
      w.observe = [feasible_gap](const SolverState& prev, const SolverState& cur) {
        TraceRecord rec;
        rec.objective_gap = feasible_gap(cur.x);
        rec.residual_sq = (cur.x - prev.x).squaredNorm();
        return rec;
      };
      w.guarantee = false;
    }
    return w;
  }

  // primal-dual family on matrix games
  if (cfg.solver == "spdhg" || cfg.solver == "pdhg") {
    if (kind != "matrix_game") throw unsupported();
    SaddleProblem sp = game_saddle(inst);
    Index n = inst.A.cols(), m = inst.A.rows();
    Vector u0(n + m);
    u0.head(n).setConstant(1.0 / static_cast<double>(n));
    u0.tail(m).setConstant(1.0 / static_cast<double>(m));
    Vector ustar = ref.xstar;
    ProblemInstance pi = inst;
    w.init = make_state(u0);
    w.anchor_ref = ustar;
    *w.D0 = (u0 - ustar).squaredNorm();
    if (cfg.solver == "spdhg") {
      w.step = [sp, params](const SolverState& s) { return spdhg_step(sp, params, s); };
      w.observe = [pi](const SolverState&, const SolverState& cur) {
        TraceRecord rec;
        rec.objective_gap = saddle_gap(pi, cur.x);
        rec.residual_sq = (cur.x - aux_of(cur, "u_tilde")).squaredNorm();
        return rec;
      };
      w.guarantee = params.guarantee_mode();
      // the PDHG metric is non-Euclidean, so only the Corollary 4 envelope
      // is asserted, not the Euclidean Lyapunov descent
      if (w.guarantee) arm_monotone_bounds(w, params, 1.0, false);
    } else {
      w.step = [sp](const SolverState& s) { return classical_pdhg_step(sp, s); };
      w.observe = [pi](const SolverState& prev, const SolverState& cur) {
        TraceRecord rec;
        rec.objective_gap = saddle_gap(pi, cur.x);
        rec.residual_sq = (cur.x - prev.x).squaredNorm();
        return rec;
      };
      w.guarantee = false;
    }
    return w;
  }

  throw unsupported();
}

// ---- run loop ----

void apply_env_seed(ExperimentConfig& cfg) {
  const char* env = std::getenv("BENCH_SEED");
  if (env == nullptr || *env == '\0') return;
  cfg.seed = parse_seed(env);
}

ExperimentResult run_with_context(const ExperimentConfig& cfg, const Context& ctx) {
  Wiring w = wire(cfg, ctx);
  SolverState state = w.init;

  ExperimentResult out;
  RunSummary& sum = out.summary;
  sum.preset = cfg.preset.empty() ? cfg.solver + "-" + cfg.problem_kind : cfg.preset;
  sum.solver = cfg.solver;
  {
    std::ostringstream os;
    os << cfg.problem_kind << " " << cfg.m << "x" << cfg.n << " seed " << cfg.seed;
    sum.problem = os.str();
  }
  sum.iters = cfg.iters;
  sum.guarantee_mode = w.guarantee;

  if (w.guarantee) {
    for (const auto& b : w.bounds) sum.monitors[b.name] = MonitorOutcome{true, kInf, -1};
    if (w.lyap_armed) sum.monitors["lyapunov_nonincrease"] = MonitorOutcome{true, kInf, -1};
  }

  const double thresholds[3] = {1e-4, 1e-6, 1e-8};
  std::map<std::string, double> running_min;
  std::optional<double> prev_lyap;
  auto t0 = std::chrono::steady_clock::now();

  out.trace.reserve(static_cast<size_t>(std::max(cfg.iters, 0L)));
  for (long i = 1; i <= cfg.iters; ++i) {
    SolverState prev = std::move(state);
    state = w.step(prev);
    TraceRecord rec = w.observe(prev, state);
    long clock = state.k;
    rec.k = i;
    rec.wall_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    if (w.guarantee) {
      for (const auto& b : w.bounds) {
        std::optional<double> val = rec.*(b.field);
        if (!val) continue;
        double v = *val;
        if (b.running_min) {
          auto [it, fresh] = running_min.try_emplace(b.name, v);
          if (!fresh) it->second = std::min(it->second, v);
          v = it->second;
        }
        double bd = b.bound(clock);
        if (!std::isfinite(bd)) continue;
        double slack = bd - v;
        MonitorOutcome& mo = sum.monitors[b.name];
        if (slack < mo.worst_slack) {
          mo.worst_slack = slack;
          mo.worst_k = i;
        }
        if (slack < -1e-8 * std::max(1.0, std::abs(bd))) mo.pass = false;
      }
      if (w.lyap_armed && rec.lyapunov) {
        if (prev_lyap) {
          double slack = *prev_lyap - *rec.lyapunov;
          MonitorOutcome& mo = sum.monitors["lyapunov_nonincrease"];
          if (slack < mo.worst_slack) {
            mo.worst_slack = slack;
            mo.worst_k = i;
          }
          if (*rec.lyapunov > *prev_lyap + 1e-9 * std::max(1.0, std::abs(*prev_lyap)))
            mo.pass = false;
        }
        prev_lyap = rec.lyapunov;
      }
    }

    if (rec.residual_sq) {
      double resid = std::sqrt(*rec.residual_sq);
      for (int t = 0; t < 3; ++t)
        if (sum.crossings[static_cast<size_t>(t)] < 0 && resid <= thresholds[t])
          sum.crossings[static_cast<size_t>(t)] = i;
    }

    out.trace.push_back(std::move(rec));

    if (cfg.restart_every > 0 && i % cfg.restart_every == 0 && i < cfg.iters) {
      state.z = state.x;
      state.k = 0;
      state.aux.clear();
      *w.D0 = (state.x - w.anchor_ref).squaredNorm();
      prev_lyap.reset();
      running_min.clear();
    }
  }

  sum.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!out.trace.empty() && out.trace.back().residual_sq)
    sum.final_residual_sq = *out.trace.back().residual_sq;
  try {
    sum.slope = fit_slope(out.trace, "residual_sq");
  } catch (const std::invalid_argument&) {
    sum.slope = kNaN;
  }

  if (!cfg.out.empty()) {
    write_trace_csv(out.trace, cfg.out);
    save_instance(ctx.inst, cfg.out + ".instance");
  }
  return out;
}

std::string sweep_out_path(const std::string& base, const std::string& param,
                           const std::string& value) {
  if (base.empty()) return base;
  size_t dot = base.find_last_of('.');
  size_t slash = base.find_last_of('/');
  std::string tag = "-" + param + "-" + value;
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash))
    return base + tag;
  return base.substr(0, dot) + tag + base.substr(dot);
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg_in) {
  ExperimentConfig cfg = cfg_in;
  apply_env_seed(cfg);
  check_config(cfg);
  Context ctx = make_context(cfg);
  return run_with_context(cfg, ctx);
}

std::vector<ExperimentResult> sweep(const ExperimentConfig& base_in,
                                    const std::string& param,
                                    const std::vector<std::string>& values) {
  ExperimentConfig base = base_in;
  apply_env_seed(base);
  check_config(base);
  std::vector<ExperimentResult> results;
  if (values.empty()) return results;

  auto apply = [&param](ExperimentConfig& cfg, const std::string& value) {
    if (param == "C")
      cfg.C = parse_double(value);
    else if (param == "r")
      cfg.r = parse_double(value);
    else if (param == "rho")
      cfg.rho = parse_double(value);
    else if (param == "schedule_param")
      cfg.schedule_param = parse_double(value);
    else if (param == "iters")
      cfg.iters = parse_long(value);
    else if (param == "restart_every")
      cfg.restart_every = value == "none" ? 0 : parse_long(value);
    else if (param == "seed")
      cfg.seed = parse_seed(value);
    else
      throw ConfigError("unknown sweep parameter '" + param + "'");
  };

  if (param == "seed") {
    for (const auto& value : values) {
      ExperimentConfig cfg = base;
      apply(cfg, value);
      cfg.out = sweep_out_path(base.out, param, value);
      check_config(cfg);
      Context ctx = make_context(cfg);
      results.push_back(run_with_context(cfg, ctx));
    }
    return results;
  }

  Context ctx = make_context(base);
  for (const auto& value : values) {
    ExperimentConfig cfg = base;
    apply(cfg, value);
    cfg.out = sweep_out_path(base.out, param, value);
    check_config(cfg);
    results.push_back(run_with_context(cfg, ctx));
  }
  return results;
}

double fit_slope(const std::vector<TraceRecord>& trace, const std::string& metric) {
  auto field = metric_field(metric);
  std::vector<std::pair<double, double>> pts;
  for (const auto& rec : trace) {
    std::optional<double> v = rec.*field;
    if (rec.k >= 1 && v && *v > 0.0 && std::isfinite(*v))
      pts.emplace_back(std::log(static_cast<double>(rec.k)), std::log(*v));
  }
  std::vector<std::pair<double, double>> tail(pts.begin() + pts.size() / 2, pts.end());
  if (tail.size() < 10)
    throw std::invalid_argument("fit_slope: fewer than 10 usable points");
  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : tail) {
    mx += x;
    my += y;
  }
  mx /= tail.size();
  my /= tail.size();
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [x, y] : tail) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
  }
  if (sxx == 0.0)
    throw std::invalid_argument("fit_slope: degenerate iteration range");
  return sxy / sxx;
}

CompareReport compare(const RunSummary& a, const RunSummary& b) {
  if (a.problem != b.problem)
    throw std::invalid_argument("compare: runs use different problem instances (" +
                                a.problem + " vs " + b.problem + ")");
  CompareReport rep;
  rep.a_crossings = a.crossings;
  rep.b_crossings = b.crossings;
  std::string la = a.preset != b.preset ? a.preset
                   : a.solver != b.solver ? a.solver
                                          : "A";
  std::string lb = a.preset != b.preset ? b.preset
                   : a.solver != b.solver ? b.solver
                                          : "B";
  const char* names[3] = {"1e-4", "1e-6", "1e-8"};
  std::ostringstream os;
  for (size_t t = 0; t < 3; ++t) {
    long ka = a.crossings[t], kb = b.crossings[t];
    os << names[t] << ": " << la << " k=" << ka << ", " << lb << " k=" << kb << " -> ";
    if (ka == kb)
      os << "tie";
    else if (kb < 0 || (ka >= 0 && ka < kb))
      os << la << " first";
    else
      os << lb << " first";
    os << "\n";
  }
  rep.text = os.str();
  return rep;
}

std::string trace_to_csv(const std::vector<TraceRecord>& trace) {
  std::ostringstream os;
  os << "k,metric,value\n";
  for (const auto& rec : trace)
    for (const auto& [name, field] : kMetricFields)
      if (rec.*field) os << rec.k << "," << name << "," << fmt17(*(rec.*field)) << "\n";
  return os.str();
}

void write_trace_csv(const std::vector<TraceRecord>& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open trace file '" + path + "' for writing");
  out << trace_to_csv(trace);
  if (!out) throw ConfigError("failed writing trace file '" + path + "'");
}

std::vector<TraceRecord> trace_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "k,metric,value")
    throw ConfigError("trace CSV must start with header 'k,metric,value'");
  std::vector<TraceRecord> trace;
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    size_t c1 = line.find(',');
    size_t c2 = c1 == std::string::npos ? std::string::npos : line.find(',', c1 + 1);
    if (c2 == std::string::npos)
      throw ConfigError("trace CSV line " + std::to_string(line_no) +
                        ": expected k,metric,value");
    long k = parse_long(line.substr(0, c1));
    std::string name = line.substr(c1 + 1, c2 - c1 - 1);
    double value = 0.0;
    try {
      value = std::stod(line.substr(c2 + 1));
    } catch (const std::exception&) {
      throw ConfigError("trace CSV line " + std::to_string(line_no) + ": bad value");
    }
    std::optional<double> TraceRecord::*field = nullptr;
    try {
      field = metric_field(name);
    } catch (const std::invalid_argument&) {
      throw ConfigError("trace CSV line " + std::to_string(line_no) +
                        ": unknown metric '" + name + "'");
    }
    if (trace.empty() || trace.back().k != k) {
      TraceRecord rec;
      rec.k = k;
      trace.push_back(rec);
    }
    trace.back().*field = value;
  }
  return trace;
}

std::vector<TraceRecord> read_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open trace file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return trace_from_csv(buf.str());
}

std::string summary_to_json(const RunSummary& s) {
  ordered_json j;
  j["preset"] = s.preset;
  j["solver"] = s.solver;
  j["problem"] = s.problem;
  j["iters"] = s.iters;
  j["final_residual_sq"] = s.final_residual_sq;
  j["slope"] = s.slope;  // NaN serializes as null
  j["guarantee_mode"] = s.guarantee_mode;
  ordered_json monitors = ordered_json::object();
  for (const auto& [name, mo] : s.monitors) {
    ordered_json m;
    m["pass"] = mo.pass;
    m["worst_slack"] = mo.worst_slack;
    m["worst_k"] = mo.worst_k;
    monitors[name] = m;
  }
  j["monitors"] = monitors;
  j["crossings"] = {{"1e-4", s.crossings[0]},
                    {"1e-6", s.crossings[1]},
                    {"1e-8", s.crossings[2]}};
  return j.dump();
}

RunSummary summary_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("summary is not valid JSON: ") + e.what());
  }
  RunSummary s;
  try {
    s.preset = j.at("preset").get<std::string>();
    s.solver = j.at("solver").get<std::string>();
    s.problem = j.at("problem").get<std::string>();
    s.iters = j.at("iters").get<long>();
    s.final_residual_sq = j.at("final_residual_sq").get<double>();
    s.slope = j.at("slope").is_null() ? kNaN : j.at("slope").get<double>();
    s.guarantee_mode = j.at("guarantee_mode").get<bool>();
    for (const auto& [name, m] : j.at("monitors").items()) {
      MonitorOutcome mo;
      mo.pass = m.at("pass").get<bool>();
      mo.worst_slack =
          m.at("worst_slack").is_null() ? kInf : m.at("worst_slack").get<double>();
      mo.worst_k = m.at("worst_k").get<long>();
      s.monitors[name] = mo;
    }
    s.crossings[0] = j.at("crossings").at("1e-4").get<long>();
    s.crossings[1] = j.at("crossings").at("1e-6").get<long>();
    s.crossings[2] = j.at("crossings").at("1e-8").get<long>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("summary JSON missing fields: ") + e.what());
  }
  return s;
}

std::string sweep_table(const std::string& param, const std::vector<std::string>& values,
                        const std::vector<ExperimentResult>& results) {
  if (values.size() != results.size())
    throw std::invalid_argument("sweep_table: values/results size mismatch");
  std::ostringstream os;
  os << "param,value,iters,final_residual_sq,slope,cross_1e-4,cross_1e-6,cross_1e-8,"
        "monitors_pass\n";
  for (size_t i = 0; i < results.size(); ++i) {
    const RunSummary& s = results[i].summary;
    bool all_pass = true;
    for (const auto& [name, mo] : s.monitors) all_pass = all_pass && mo.pass;
    os << param << "," << values[i] << "," << s.iters << ","
       << fmt17(s.final_residual_sq) << "," << fmt17(s.slope) << ","
       << s.crossings[0] << "," << s.crossings[1] << "," << s.crossings[2] << ","
       << (all_pass ? "true" : "false") << "\n";
  }
  return os.str();
}

}  // namespace sppa
