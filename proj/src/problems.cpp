#include "sppa/problems.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include "sppa/operators.hpp"
#include "sppa/splitting.hpp"

namespace sppa {

double Rng::uniform() {
  return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  if (u1 == 0.0) u1 = 0x1.0p-53;
  double u2 = uniform();
  double radius = std::sqrt(-2.0 * std::log(u1));
  double angle = 2.0 * M_PI * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

long Rng::uniform_int(long lo, long hi) {
  if (lo > hi) throw std::invalid_argument("Rng::uniform_int: empty range");
  std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
  std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                        std::numeric_limits<std::uint64_t>::max() % span;
  std::uint64_t raw;
  do {
    raw = gen_();
  } while (raw >= limit);
  return lo + static_cast<long>(raw % span);
}

Vector Rng::normal_vector(Index n) {
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = normal();
  return v;
}

Matrix Rng::normal_matrix(Index rows, Index cols) {
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = normal();
  return m;
}

namespace {

void check_dims(Index m, Index n) {
  if (m <= 0 || n <= 0)
    throw std::invalid_argument("problem generator: dimensions must be positive");
}

// ceil(n/10) distinct support indices, then normal values.
Vector planted_sparse(Rng& rng, Index n) {
  Index nnz = (n + 9) / 10;
  std::vector<bool> used(static_cast<size_t>(n), false);
  std::vector<Index> support;
  while (static_cast<Index>(support.size()) < nnz) {
    Index i = static_cast<Index>(rng.uniform_int(0, n - 1));
    if (!used[static_cast<size_t>(i)]) {
      used[static_cast<size_t>(i)] = true;
      support.push_back(i);
    }
  }
  Vector x = Vector::Zero(n);
  for (Index i : support) x[i] = rng.normal();
  return x;
}

Matrix first_difference(Index n) {
  Matrix D = Matrix::Zero(n - 1, n);
  for (Index i = 0; i + 1 < n; ++i) {
    D(i, i) = -1.0;
    D(i, i + 1) = 1.0;
  }
  return D;
}

}  // namespace

ProblemInstance gen_lasso(Index m, Index n, std::uint64_t seed, double mu) {
  check_dims(m, n);
  if (!(mu > 0.0)) throw std::invalid_argument("gen_lasso: mu must be positive");
  Rng rng(seed);
  ProblemInstance p;
  p.kind = "lasso";
  p.seed = seed;
  p.mu = mu;
  p.A = rng.normal_matrix(m, n);
  p.x_planted = planted_sparse(rng, n);
  Vector clean = p.A * p.x_planted;
  double noise_scale = 0.01 * clean.norm() / std::sqrt(static_cast<double>(m));
  p.b = clean + noise_scale * rng.normal_vector(m);
  return p;
}

ProblemInstance gen_basis_pursuit(Index m, Index n, std::uint64_t seed) {
  check_dims(m, n);
  if (m >= n)
    throw std::invalid_argument("gen_basis_pursuit: requires m < n (underdetermined)");
  Rng rng(seed);
  ProblemInstance p;
  p.kind = "basis_pursuit";
  p.seed = seed;
  p.A = rng.normal_matrix(m, n);
  p.x_planted = planted_sparse(rng, n);
  p.b = p.A * p.x_planted;  // feasible by construction
  return p;
}

ProblemInstance gen_fused_lasso(Index m, Index n, std::uint64_t seed, double mu1,
                                double mu2) {
  check_dims(m, n);
  if (n < 2) throw std::invalid_argument("gen_fused_lasso: n must be >= 2");
  if (!(mu1 > 0.0) || !(mu2 > 0.0))
    throw std::invalid_argument("gen_fused_lasso: weights must be positive");
  Rng rng(seed);
  ProblemInstance p;
  p.kind = "fused_lasso";
  p.seed = seed;
  p.mu1 = mu1;
  p.mu2 = mu2;
  p.A = rng.normal_matrix(m, n);
  p.x_planted = planted_sparse(rng, n);
  Vector clean = p.A * p.x_planted;
  double noise_scale = 0.01 * clean.norm() / std::sqrt(static_cast<double>(m));
  p.b = clean + noise_scale * rng.normal_vector(m);
  p.D = first_difference(n);
  return p;
}

ProblemInstance gen_matrix_game(Index m, Index n, std::uint64_t seed) {
  check_dims(m, n);
  Rng rng(seed);
  ProblemInstance p;
  p.kind = "matrix_game";
  p.seed = seed;
  p.A = rng.normal_matrix(m, n);
  p.a_lin = rng.normal_vector(n);
  p.b = rng.normal_vector(m);
  p.norm_K = Eigen::JacobiSVD<Matrix>(p.A).singularValues()(0);
  p.mu1 = 0.99 / p.norm_K;
  p.mu2 = 0.99 / p.norm_K;
  return p;
}

ProblemInstance gen_quadratic_l1(Index n, std::uint64_t seed, double mu) {
  check_dims(n, 1);
  if (!(mu > 0.0)) throw std::invalid_argument("gen_quadratic_l1: mu must be positive");
  Rng rng(seed);
  ProblemInstance p;
  p.kind = "quadratic_l1";
  p.seed = seed;
  p.mu = mu;
  p.q = Vector(n);
  for (Index i = 0; i < n; ++i) p.q[i] = 0.5 + 4.5 * rng.uniform();
  p.l = 2.0 * rng.normal_vector(n);
  return p;
}

double power_iteration_norm(const Matrix& A, long iters, std::uint64_t seed) {
  Rng rng(seed);
  Vector v = rng.normal_vector(A.cols());
  v.normalize();
  double lambda = 0.0;
  for (long i = 0; i < iters; ++i) {
    Vector w = A.transpose() * (A * v);
    lambda = w.norm();
    if (lambda == 0.0) return 0.0;
    v = w / lambda;
  }
  return std::sqrt(lambda);
}

double objective_value(const ProblemInstance& p, const Vector& x) {
  if (p.kind == "lasso")
    return 0.5 * (p.A * x - p.b).squaredNorm() + p.mu * x.lpNorm<1>();
  if (p.kind == "basis_pursuit") return x.lpNorm<1>();
  if (p.kind == "fused_lasso")
    return 0.5 * (p.A * x - p.b).squaredNorm() + p.mu1 * x.lpNorm<1>() +
           p.mu2 * (p.D * x).lpNorm<1>();
  if (p.kind == "quadratic_l1")
    return 0.5 * x.dot((p.q.array() * x.array()).matrix()) + p.l.dot(x) +
           p.mu * x.lpNorm<1>();
  if (p.kind == "matrix_game") {
    Index n = p.A.cols(), m = p.A.rows();
    require_dim(x, n + m, "objective_value matrix_game");
    Vector xs = x.head(n), ys = x.tail(m);
    return ys.dot(p.A * xs) + p.a_lin.dot(xs) - p.b.dot(ys);
  }
  throw std::invalid_argument("objective_value: unknown kind '" + p.kind + "'");
}

namespace {

double l1_diff(const Vector& v, const Vector& w) {
  double s = 0.0;
  for (Index i = 0; i < v.size(); ++i) s += std::abs(v[i]) - std::abs(w[i]);
  return s;
}

// 1/2 ||Ax-b||^2 - 1/2 ||Ay-b||^2 without cancellation of the large halves
double quad_residual_diff(const Matrix& A, const Vector& b, const Vector& x,
                          const Vector& y) {
  Vector diff = A * (x - y);
  Vector sum = (A * x - b) + (A * y - b);
  return 0.5 * diff.dot(sum);
}

}  // namespace

double objective_gap(const ProblemInstance& p, const Vector& x, const Vector& y) {
  require_dim(y, x.size(), "objective_gap");
  if (p.kind == "lasso")
    return quad_residual_diff(p.A, p.b, x, y) + p.mu * l1_diff(x, y);
  if (p.kind == "basis_pursuit") return l1_diff(x, y);
  if (p.kind == "fused_lasso")
    return quad_residual_diff(p.A, p.b, x, y) + p.mu1 * l1_diff(x, y) +
           p.mu2 * l1_diff(p.D * x, p.D * y);
  if (p.kind == "quadratic_l1") {
    double s = 0.0;
    for (Index i = 0; i < x.size(); ++i)
      s += (x[i] - y[i]) * (0.5 * p.q[i] * (x[i] + y[i]) + p.l[i]);
    return s + p.mu * l1_diff(x, y);
  }
  if (p.kind == "matrix_game") {
    Index n = p.A.cols(), m = p.A.rows();
    require_dim(x, n + m, "objective_gap matrix_game");
    Vector dx = x.head(n) - y.head(n), dy = x.tail(m) - y.tail(m);
    return x.tail(m).dot(p.A * dx) + dy.dot(p.A * y.head(n)) + p.a_lin.dot(dx) -
           p.b.dot(dy);
  }
  throw std::invalid_argument("objective_gap: unknown kind '" + p.kind + "'");
}

AdmmProblem basis_pursuit_admm(const ProblemInstance& p, double rho) {
  Index n = p.A.cols();
  AdmmProblem ap;
  ap.A = Matrix::Identity(n, n);
  ap.B = -Matrix::Identity(n, n);
  ap.c = Vector::Zero(n);
  ap.rho = rho;
  ap.f_subproblem = [](const Vector& w, const Vector& q, double rho_) {
    return soft_threshold((-q - w / rho_).eval(), 1.0 / rho_);
  };
  ProxMap project = affine_projection_prox(p.A, p.b);
  ap.g_subproblem = [project](const Vector& w, const Vector& q, double rho_) {
    return project(1.0, (q + w / rho_).eval());
  };
  return ap;
}

// Consensus stack for the fused LASSO: blocks (x1, x2, x3) against
// S = [I; I; D], constraint x - S y = 0.
AdmmProblem fused_lasso_admm(const ProblemInstance& p, double rho) {
  Index n = p.A.cols();
  Index rows = n + n + p.D.rows();
  Matrix S(rows, n);
  S.topRows(n) = Matrix::Identity(n, n);
  S.middleRows(n, n) = Matrix::Identity(n, n);
  S.bottomRows(p.D.rows()) = p.D;
  AdmmProblem ap;
  ap.A = Matrix::Identity(rows, rows);
  ap.B = -S;
  ap.c = Vector::Zero(rows);
  ap.rho = rho;
  Matrix gram = p.A.transpose() * p.A;
  Vector atb = p.A.transpose() * p.b;
  auto ls_llt = std::make_shared<Eigen::LLT<Matrix>>();
  auto ls_rho = std::make_shared<double>(-1.0);
  double mu1 = p.mu1, mu2 = p.mu2;
  Index dn = p.D.rows();
  ap.f_subproblem = [gram, atb, ls_llt, ls_rho, mu1, mu2, n,
                     dn](const Vector& w, const Vector& q, double rho_) {
    if (*ls_rho != rho_) {
      Matrix shifted = gram;
      shifted.diagonal().array() += rho_;
      ls_llt->compute(shifted);
      *ls_rho = rho_;
    }
    Vector out(n + n + dn);
    out.head(n) = ls_llt->solve((atb - w.head(n) - rho_ * q.head(n)).eval());
    out.segment(n, n) =
        soft_threshold((-q.segment(n, n) - w.segment(n, n) / rho_).eval(), mu1 / rho_);
    out.tail(dn) = soft_threshold((-q.tail(dn) - w.tail(dn) / rho_).eval(), mu2 / rho_);
    return out;
  };
  Matrix sts = S.transpose() * S;
  auto y_llt = std::make_shared<Eigen::LLT<Matrix>>(sts);
  Matrix St = S.transpose();
  ap.g_subproblem = [y_llt, St](const Vector& w, const Vector& q, double rho_) {
    return y_llt->solve((St * (w / rho_ + q)).eval());
  };
  return ap;
}

AdmmProblem lasso_admm(const ProblemInstance& p, double rho) {
  Index n = p.A.cols();
  AdmmProblem ap;
  ap.A = Matrix::Identity(n, n);
  ap.B = -Matrix::Identity(n, n);
  ap.c = Vector::Zero(n);
  ap.rho = rho;
  Matrix gram = p.A.transpose() * p.A;
  Vector atb = p.A.transpose() * p.b;
  auto llt = std::make_shared<Eigen::LLT<Matrix>>();
  auto llt_rho = std::make_shared<double>(-1.0);
  ap.f_subproblem = [gram, atb, llt, llt_rho](const Vector& w, const Vector& q,
                                              double rho_) {
    if (*llt_rho != rho_) {
      Matrix shifted = gram;
      shifted.diagonal().array() += rho_;
      llt->compute(shifted);
      *llt_rho = rho_;
    }
    return llt->solve((atb - w - rho_ * q).eval()).eval();
  };
  double mu = p.mu;
  ap.g_subproblem = [mu](const Vector& w, const Vector& q, double rho_) {
    return soft_threshold((q + w / rho_).eval(), mu / rho_);
  };
  return ap;
}

SaddleProblem game_saddle(const ProblemInstance& p) {
  SaddleProblem sp;
  sp.prox_f = linear_plus_simplex_prox(p.a_lin);
  sp.prox_g = linear_plus_simplex_prox(p.b);
  sp.K = p.A;
  sp.mu1 = p.mu1;
  sp.mu2 = p.mu2;
  sp.norm_K = p.norm_K;
  return sp;
}

EqualityConstrainedProblem lasso_salm(const ProblemInstance& p, double inner_tol,
                                      long inner_max_iter) {
  Index n = p.A.cols();
  EqualityConstrainedProblem ec;
  ec.A = Matrix(n, 2 * n);
  ec.A.leftCols(n) = Matrix::Identity(n, n);
  ec.A.rightCols(n) = -Matrix::Identity(n, n);
  ec.b = Vector::Zero(n);
  Matrix A = p.A;
  Vector b = p.b;
  double mu = p.mu;
  ec.objective = [A, b, mu, n](const Vector& v) {
    return 0.5 * (A * v.head(n) - b).squaredNorm() + mu * v.tail(n).lpNorm<1>();
  };
  double norm_a = power_iteration_norm(p.A);
  double lipschitz_ls = norm_a * norm_a * (1.0 + 1e-6);
  Matrix At = p.A.transpose();
  auto warm = std::make_shared<Vector>(Vector::Zero(n));
  // min over (x, y) of 1/2||Ax-b||^2 + mu||y||_1 - <lt, x-y> + (c'/2)||x-y||^2.
  // y is eliminated: y(x) = soft(x - lt/c', mu/c'), and the remaining smooth
  // objective in x has gradient A^T(Ax-b) - lt + c'(x - y(x)).
  ec.subproblem = [A, At, b, mu, lipschitz_ls, warm, n, inner_tol,
                   inner_max_iter](const Vector& lt, double cprime) {
    auto eliminate_y = [&](const Vector& x) {
      return soft_threshold((x - lt / cprime).eval(), mu / cprime);
    };
    auto grad = [&](const Vector& x) {
      return Vector(At * (A * x - b) - lt + cprime * (x - eliminate_y(x)));
    };
    FistaResult res = fista_solve(grad, lipschitz_ls + cprime, zero_prox(n), *warm,
                                  inner_max_iter, inner_tol);
    *warm = res.x;
    Vector v(2 * n);
    v.head(n) = res.x;
    v.tail(n) = eliminate_y(res.x);
    return v;
  };
  return ec;
}

namespace {

ReferenceSolution reference_quadratic_l1(const ProblemInstance& p) {
  ReferenceSolution ref;
  Index n = p.q.size();
  ref.xstar = Vector(n);
  for (Index i = 0; i < n; ++i) {
    double m = std::abs(p.l[i]) - p.mu;
    ref.xstar[i] = m > 0.0 ? -(p.l[i] > 0.0 ? m : -m) / p.q[i] : 0.0;
  }
  ref.fstar = objective_value(p, ref.xstar);
  ref.certified_tol = 0.0;
  return ref;
}

ReferenceSolution reference_lasso(const ProblemInstance& p, long budget) {
  double L = power_iteration_norm(p.A);
  L = L * L * (1.0 + 1e-6);
  ProxMap prox = l1_prox(p.A.cols(), p.mu);
  Matrix At = p.A.transpose();
  auto grad = [&](const Vector& x) { return Vector(At * (p.A * x - p.b)); };
  FistaResult res =
      fista_solve(grad, L, prox, Vector::Zero(p.A.cols()), budget, 1e-13);
  ReferenceSolution ref;
  ref.xstar = res.x;
  ref.fstar = objective_value(p, res.x);
  Vector mapped = prox(1.0 / L, (res.x - grad(res.x) / L).eval());
  ref.certified_tol = (res.x - mapped).norm();
  return ref;
}

ReferenceSolution reference_basis_pursuit(const ProblemInstance& p, long budget) {
  AdmmProblem ap = basis_pursuit_admm(p, 10.0);
  SolverState s = make_state(Vector::Zero(p.A.cols()));
  double resid = std::numeric_limits<double>::infinity();
  for (long i = 0; i < budget && resid > 1e-12; ++i) {
    s = classical_admm_step(ap, s);
    resid = s.aux.at("residual").norm();
  }
  ReferenceSolution ref;
  ref.xstar = s.aux.at("primal_y");
  ref.fstar = ref.xstar.lpNorm<1>();
  ref.dual = s.x;
  ref.certified_tol = resid;
  return ref;
}

ReferenceSolution reference_fused_lasso(const ProblemInstance& p, long budget) {
  AdmmProblem ap = fused_lasso_admm(p, 1.0);
  SolverState s = make_state(Vector::Zero(ap.A.rows()));
  double resid = std::numeric_limits<double>::infinity();
  for (long i = 0; i < budget && resid > 1e-12; ++i) {
    s = classical_admm_step(ap, s);
    resid = s.aux.at("residual").norm();
  }
  ReferenceSolution ref;
  ref.xstar = s.aux.at("primal_y");
  ref.fstar = objective_value(p, ref.xstar);
  ref.dual = s.x;
  ref.certified_tol = resid;
  return ref;
}

ReferenceSolution reference_matrix_game(const ProblemInstance& p, long budget) {
  SaddleProblem sp = game_saddle(p);
  Index n = p.A.cols(), m = p.A.rows();
  Vector u0(n + m);
  u0.head(n).setConstant(1.0 / static_cast<double>(n));
  u0.tail(m).setConstant(1.0 / static_cast<double>(m));
  SolverState s = make_state(u0);
  MonotoneParams params{1.0, 2.0};
  double resid_sq = std::numeric_limits<double>::infinity();
  for (long i = 0; i < budget && resid_sq > 1e-14; ++i) {
    s = spdhg_step(sp, params, s);
    resid_sq = (s.x - s.aux.at("u_tilde")).squaredNorm();
  }
  ReferenceSolution ref;
  ref.xstar = s.x;
  ref.fstar = objective_value(p, s.x);
  ref.certified_tol = resid_sq;
  return ref;
}

}  // namespace

ReferenceSolution reference_solution(const ProblemInstance& p, long budget) {
  if (budget <= 0) throw std::invalid_argument("reference_solution: budget must be positive");
  if (p.kind == "quadratic_l1") return reference_quadratic_l1(p);
  if (p.kind == "lasso") return reference_lasso(p, budget);
  if (p.kind == "basis_pursuit") return reference_basis_pursuit(p, budget);
  if (p.kind == "fused_lasso") return reference_fused_lasso(p, budget);
  if (p.kind == "matrix_game") return reference_matrix_game(p, budget);
  throw std::invalid_argument("reference_solution: unknown kind '" + p.kind + "'");
}

// ---- serialization ----

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_vector(std::ostringstream& out, const std::string& name, const Vector& v) {
  if (v.size() == 0) return;
  out << "vector " << name << ' ' << v.size() << '\n';
  for (Index i = 0; i < v.size(); ++i) out << (i ? "," : "") << fmt(v[i]);
  out << '\n';
}

void write_matrix(std::ostringstream& out, const std::string& name, const Matrix& m) {
  if (m.size() == 0) return;
  out << "matrix " << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << fmt(m(i, j));
    out << '\n';
  }
}

void write_scalar(std::ostringstream& out, const std::string& name, double v) {
  out << "scalar " << name << ' ' << fmt(v) << '\n';
}

[[noreturn]] void parse_fail(long line, const std::string& what) {
  throw std::runtime_error("instance parse error at line " + std::to_string(line) + ": " +
                           what);
}

std::vector<double> parse_row(const std::string& line, long lineno, Index expect) {
  std::vector<double> vals;
  vals.reserve(static_cast<size_t>(expect));
  const char* p = line.c_str();
  while (*p) {
    char* end = nullptr;
    double v = std::strtod(p, &end);
    if (end == p) parse_fail(lineno, "expected a number, got '" + std::string(p) + "'");
    vals.push_back(v);
    p = end;
    if (*p == ',') ++p;
    else if (*p != '\0') parse_fail(lineno, "unexpected separator '" + std::string(1, *p) + "'");
  }
  if (static_cast<Index>(vals.size()) != expect)
    parse_fail(lineno, "expected " + std::to_string(expect) + " values, got " +
                           std::to_string(vals.size()));
  return vals;
}

}  // namespace

std::string instance_to_string(const ProblemInstance& p) {
  std::ostringstream out;
  out << "sppa-instance v1\n";
  out << "kind " << p.kind << '\n';
  out << "seed " << p.seed << '\n';
  if (p.mu != 0.0) write_scalar(out, "mu", p.mu);
  if (p.mu1 != 0.0) write_scalar(out, "mu1", p.mu1);
  if (p.mu2 != 0.0) write_scalar(out, "mu2", p.mu2);
  if (p.norm_K != 0.0) write_scalar(out, "norm_K", p.norm_K);
  write_matrix(out, "A", p.A);
  write_matrix(out, "D", p.D);
  write_vector(out, "b", p.b);
  write_vector(out, "a_lin", p.a_lin);
  write_vector(out, "q", p.q);
  write_vector(out, "l", p.l);
  write_vector(out, "x_planted", p.x_planted);
  out << "end\n";
  return out.str();
}

ProblemInstance instance_from_string(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  long lineno = 0;
  auto next_line = [&]() -> bool {
    if (!std::getline(in, line)) return false;
    ++lineno;
    return true;
  };
  if (!next_line() || line != "sppa-instance v1")
    parse_fail(lineno, "missing 'sppa-instance v1' header");
  ProblemInstance p;
  bool saw_end = false;
  while (next_line()) {
    if (line.empty()) continue;
    if (line == "end") {
      saw_end = true;
      break;
    }
    std::istringstream tok(line);
    std::string tag;
    tok >> tag;
    if (tag == "kind") {
      tok >> p.kind;
      if (p.kind.empty()) parse_fail(lineno, "empty kind");
    } else if (tag == "seed") {
      if (!(tok >> p.seed)) parse_fail(lineno, "bad seed");
    } else if (tag == "scalar") {
      std::string name;
      double v;
      if (!(tok >> name >> v)) parse_fail(lineno, "bad scalar line");
      if (name == "mu") p.mu = v;
      else if (name == "mu1") p.mu1 = v;
      else if (name == "mu2") p.mu2 = v;
      else if (name == "norm_K") p.norm_K = v;
      else parse_fail(lineno, "unknown scalar '" + name + "'");
    } else if (tag == "vector") {
      std::string name;
      Index n;
      if (!(tok >> name >> n) || n <= 0) parse_fail(lineno, "bad vector header");
      if (!next_line()) parse_fail(lineno, "missing vector data for '" + name + "'");
      auto vals = parse_row(line, lineno, n);
      Vector v = Eigen::Map<Vector>(vals.data(), n);
      if (name == "b") p.b = v;
      else if (name == "a_lin") p.a_lin = v;
      else if (name == "q") p.q = v;
      else if (name == "l") p.l = v;
      else if (name == "x_planted") p.x_planted = v;
      else parse_fail(lineno, "unknown vector '" + name + "'");
    } else if (tag == "matrix") {
      std::string name;
      Index r, c;
      if (!(tok >> name >> r >> c) || r <= 0 || c <= 0)
        parse_fail(lineno, "bad matrix header");
      Matrix m(r, c);
      for (Index i = 0; i < r; ++i) {
        if (!next_line()) parse_fail(lineno, "missing matrix row for '" + name + "'");
        auto vals = parse_row(line, lineno, c);
        for (Index j = 0; j < c; ++j) m(i, j) = vals[static_cast<size_t>(j)];
      }
      if (name == "A") p.A = m;
      else if (name == "D") p.D = m;
      else parse_fail(lineno, "unknown matrix '" + name + "'");
    } else {
      parse_fail(lineno, "unknown tag '" + tag + "'");
    }
  }
  if (!saw_end) parse_fail(lineno, "missing 'end' terminator");
  if (p.kind.empty()) parse_fail(lineno, "instance has no kind");
  return p;
}

void save_instance(const ProblemInstance& p, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_instance: cannot open '" + path + "'");
  out << instance_to_string(p);
  if (!out) throw std::runtime_error("save_instance: write failed for '" + path + "'");
}

ProblemInstance load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_instance: cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return instance_from_string(buf.str());
}

}  // namespace sppa
