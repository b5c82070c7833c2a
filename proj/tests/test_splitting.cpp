#include <doctest.h>

#include <cmath>

#include "sppa/problems.hpp"
#include "sppa/splitting.hpp"

using namespace sppa;

namespace {

Vector vec1(double x) {
  Vector v(1);
  v << x;
  return v;
}

// min 1/2 x^2 subject to x = 1, with an optional diagonal metric h on the
// dual. The subproblem has the closed form x = (lt + c' h) / (1 + c' h).
EqualityConstrainedProblem toy_equality(double h = 1.0) {
  EqualityConstrainedProblem p;
  p.A = Matrix::Identity(1, 1);
  p.b = vec1(1.0);
  if (h != 1.0) p.H = vec1(h);
  p.subproblem = [h](const Vector& lt, double cprime) {
    return vec1((lt(0) + cprime * h) / (1.0 + cprime * h));
  };
  p.objective = [](const Vector& x) { return 0.5 * x(0) * x(0); };
  return p;
}

// min 1/2||x - pa||^2 + 1/2||y - qa||^2 subject to x + y = c. The KKT point
// is x* = (c + pa - qa)/2, lambda* = (pa + qa - c)/2.
AdmmProblem quadratic_pair(const Vector& pa, const Vector& qa, const Vector& c,
                           double rho) {
  AdmmProblem ap;
  ap.A = Matrix::Identity(2, 2);
  ap.B = Matrix::Identity(2, 2);
  ap.c = c;
  ap.rho = rho;
  ap.f_subproblem = [pa](const Vector& w, const Vector& q, double r) {
    return Vector((pa - w - r * q) / (1.0 + r));
  };
  ap.g_subproblem = [qa](const Vector& w, const Vector& q, double r) {
    return Vector((qa - w - r * q) / (1.0 + r));
  };
  return ap;
}

}  // namespace

TEST_CASE("salm_step pinned one-step values") {
  EqualityConstrainedProblem p = toy_equality();
  Schedule sched = constant_index_schedule(1.0);
  SolverState s = make_state(vec1(0.0));
  s = salm_step(p, sched, s);
  CHECK(s.aux.at("primal")(0) == doctest::Approx(2.0 / 3.0));
  CHECK(s.x(0) == doctest::Approx(2.0 / 3.0));
  CHECK(s.z(0) == doctest::Approx(1.0 / 3.0));
  CHECK(s.aux.at("constraint")(0) == doctest::Approx(-1.0 / 3.0));
  CHECK(s.aux.at("lambda_tilde")(0) == doctest::Approx(0.0));
}

TEST_CASE("salm_step is stationary at the multiplier") {
  EqualityConstrainedProblem p = toy_equality();
  Schedule sched = constant_index_schedule(1.0);
  SolverState s = make_state(vec1(1.0));
  for (int i = 0; i < 10; ++i) {
    s = salm_step(p, sched, s);
    CHECK(s.x(0) == doctest::Approx(1.0));
    CHECK(s.z(0) == doctest::Approx(1.0));
    CHECK(s.aux.at("constraint")(0) == doctest::Approx(0.0));
  }
}

TEST_CASE("salm metric scaling trades against the schedule constant") {
  SolverState a = salm_step(toy_equality(), constant_index_schedule(1.0),
                            make_state(vec1(0.0)));
  SolverState b = salm_step(toy_equality(2.0), constant_index_schedule(0.5),
                            make_state(vec1(0.0)));
  CHECK(a.x(0) == doctest::Approx(b.x(0)));
  CHECK(a.z(0) == doctest::Approx(b.z(0)));
  CHECK(a.aux.at("primal")(0) == doctest::Approx(b.aux.at("primal")(0)));
}

TEST_CASE("salm rejects a nonpositive dual metric") {
  EqualityConstrainedProblem p = toy_equality();
  p.H = vec1(0.0);
  CHECK_THROWS_AS(salm_step(p, constant_index_schedule(1.0), make_state(vec1(0.0))),
                  std::invalid_argument);
}

TEST_CASE("salm_generic_step matches salm_step on the equality form") {
  EqualityConstrainedProblem p = toy_equality();
  PerturbationOracle o;
  o.solve = [&p](const Vector& lt, double cprime) {
    Vector x = p.subproblem(lt, cprime);
    Vector u = p.A * x - p.b;
    return std::make_pair(x, u);
  };
  Schedule sched = constant_index_schedule(1.0);
  SolverState a = make_state(vec1(0.2));
  SolverState b = a;
  for (int i = 0; i < 20; ++i) {
    a = salm_step(p, sched, a);
    b = salm_generic_step(o, sched, b);
    CHECK(std::abs(a.x(0) - b.x(0)) < 1e-12);
    CHECK(std::abs(a.z(0) - b.z(0)) < 1e-12);
  }
}

TEST_CASE("sdr_step pinned one-step values") {
  ProxMap res_a = l1_prox(1);
  ProxMap res_b = zero_prox(1);
  MonotoneParams p;
  SolverState s = make_state(vec1(3.0));
  s = sdr_step(res_a, res_b, 1.0, p, s);
  CHECK(s.aux.at("x_tilde")(0) == doctest::Approx(3.0));
  CHECK(s.aux.at("u")(0) == doctest::Approx(3.0));
  CHECK(s.aux.at("v")(0) == doctest::Approx(2.0));
  CHECK(s.x(0) == doctest::Approx(2.0));
  CHECK(s.z(0) == doctest::Approx(2.5));

  CHECK_THROWS_AS(sdr_step(res_a, res_b, 0.0, p, make_state(vec1(1.0))),
                  std::invalid_argument);
}

TEST_CASE("sdr with two zero operators is stationary") {
  MonotoneParams p;
  SolverState s = make_state(vec1(1.7));
  for (int i = 0; i < 5; ++i) {
    s = sdr_step(zero_prox(1), zero_prox(1), 2.0, p, s);
    CHECK(s.x(0) == doctest::Approx(1.7));
    CHECK(s.z(0) == doctest::Approx(1.7));
  }
}

TEST_CASE("sdr_step equals the monotone solver on the DR oracle") {
  Rng rng(5);
  Matrix A = rng.normal_matrix(1, 3);
  Vector b = rng.normal_vector(1);
  ProxMap res_a = l1_prox(3);
  ProxMap res_b = affine_projection_prox(A, b);
  double rho = 0.7;
  MonotoneParams p;
  ProxMap dr = dr_prox_map(res_a, res_b, rho);
  SolverState lhs = make_state(rng.normal_vector(3));
  SolverState rhs = lhs;
  for (int i = 0; i < 50; ++i) {
    lhs = sdr_step(res_a, res_b, rho, p, lhs);
    rhs = sppa_monotone_step(dr, p, rhs);
    CHECK((lhs.x - rhs.x).lpNorm<Eigen::Infinity>() < 1e-12);
    CHECK((lhs.z - rhs.z).lpNorm<Eigen::Infinity>() < 1e-12);
  }
}

TEST_CASE("classical_dr_step iterates the DR operator") {
  Rng rng(11);
  ProxMap res_a = l1_prox(4, 0.6);
  ProxMap res_b = simplex_prox(4);
  double rho = 1.3;
  SolverState s = make_state(rng.normal_vector(4));
  Vector plain = s.x;
  for (int i = 0; i < 20; ++i) {
    s = classical_dr_step(res_a, res_b, rho, s);
    plain = dr_operator(res_a, res_b, rho, plain);
    CHECK((s.x - plain).lpNorm<Eigen::Infinity>() == 0.0);
  }
}

TEST_CASE("sadmm_step keeps the dual residual identity") {
  ProblemInstance inst = gen_basis_pursuit(6, 12, 3);
  AdmmProblem ap = basis_pursuit_admm(inst, 2.0);
  MonotoneParams p;
  Rng rng(8);
  SolverState s = make_state(rng.normal_vector(12));
  for (int i = 0; i < 25; ++i) {
    s = sadmm_step(ap, p, s);
    Vector gap = s.x - s.aux.at("u_tilde") - ap.rho * s.aux.at("residual");
    CHECK(gap.lpNorm<Eigen::Infinity>() < 1e-12);
    Vector recomputed =
        ap.A * s.aux.at("primal_x") + ap.B * s.aux.at("primal_y") - ap.c;
    CHECK((recomputed - s.aux.at("residual")).lpNorm<Eigen::Infinity>() < 1e-12);
  }
}

TEST_CASE("basis pursuit subproblem oracles satisfy their optimality systems") {
  ProblemInstance inst = gen_basis_pursuit(6, 12, 7);
  double rho = 1.5;
  AdmmProblem ap = basis_pursuit_admm(inst, rho);
  Rng rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    Vector w = rng.normal_vector(12);
    Vector q = rng.normal_vector(12);

    Vector x = ap.f_subproblem(w, q, rho);
    for (Index i = 0; i < x.size(); ++i) {
      double force = w(i) + rho * (x(i) + q(i));
      if (x(i) != 0.0)
        CHECK(std::abs((x(i) > 0 ? 1.0 : -1.0) + force) < 1e-10);
      else
        CHECK(std::abs(force) <= 1.0 + 1e-10);
    }

    Vector y = ap.g_subproblem(w, q, rho);
    Vector point = q + w / rho;
    // g absorbs B = -I, so the target collapses to the affine projection
    // of q + w/rho onto {Ay = b}.
    Vector proj =
        point - inst.A.transpose() *
                    (inst.A * inst.A.transpose()).ldlt().solve(inst.A * point - inst.b);
    CHECK((y - proj).lpNorm<Eigen::Infinity>() < 1e-10);
    CHECK((inst.A * y - inst.b).lpNorm<Eigen::Infinity>() < 1e-10);
  }
}

TEST_CASE("sadmm is stationary at the dual fixed point") {
  Vector pa(2), c(2);
  pa << 1.0, 2.0;
  c << 2.0, 2.0;
  Vector qa = pa - c;
  AdmmProblem ap = quadratic_pair(pa, qa, c, 1.0);
  MonotoneParams p;
  Vector ustar = pa - c;
  SolverState s = make_state(ustar);
  for (int i = 0; i < 5; ++i) {
    s = sadmm_step(ap, p, s);
    CHECK((s.x - ustar).lpNorm<Eigen::Infinity>() < 1e-14);
    CHECK(s.aux.at("residual").lpNorm<Eigen::Infinity>() < 1e-14);
  }
  CHECK((s.aux.at("primal_x") - c).lpNorm<Eigen::Infinity>() < 1e-14);
  CHECK(s.aux.at("primal_y").lpNorm<Eigen::Infinity>() < 1e-14);
}

TEST_CASE("classical_admm is stationary at the KKT point") {
  Vector pa(2), qa(2), c(2);
  pa << 1.0, 2.0;
  qa << 3.0, -1.0;
  c << 2.0, 2.0;
  AdmmProblem ap = quadratic_pair(pa, qa, c, 1.0);
  Vector xstar = (c + pa - qa) / 2.0;
  Vector ystar = c - xstar;
  Vector lamstar = (pa + qa - c) / 2.0;
  SolverState s = make_state(lamstar);
  s.aux["primal_y"] = ystar;
  for (int i = 0; i < 5; ++i) {
    s = classical_admm_step(ap, s);
    CHECK((s.x - lamstar).lpNorm<Eigen::Infinity>() < 1e-12);
    CHECK((s.aux.at("primal_x") - xstar).lpNorm<Eigen::Infinity>() < 1e-12);
    CHECK((s.aux.at("primal_y") - ystar).lpNorm<Eigen::Infinity>() < 1e-12);
  }
}

TEST_CASE("sadmm variants reach the merged anchor at the pinned iterations") {
  Vector pa(2), c(2);
  pa << 1.0, 2.0;
  c << 2.0, 2.0;
  Vector qa = pa - c;
  AdmmProblem ap = quadratic_pair(pa, qa, c, 1.0);
  MonotoneParams p;
  Vector u0(2);
  u0 << -0.75, 0.125;

  long hit = -1;
  SolverState s = make_state(u0);
  for (int i = 0; i < 2000; ++i) {
    s = sadmm_step(ap, p, s);
    if (hit < 0 && s.aux.at("residual").norm() < 1e-6) hit = s.k;
  }
  CHECK(hit == 1057);

  long hit2 = -1;
  SolverState t = make_state(u0);
  for (int i = 0; i < 2000; ++i) {
    t = sadmm_step_v2(ap, p, t);
    if (hit2 < 0 && t.aux.at("residual").norm() < 1e-6) hit2 = t.k;
  }
  CHECK(hit2 == 916);

  Vector anchor = pa - c;
  CHECK((s.x - anchor).norm() < 1e-4);
  CHECK((t.x - anchor).norm() < 1e-4);
}

TEST_CASE("sadmm_v2 first step anchors lambda_tilde at the fresh momentum") {
  ProblemInstance inst = gen_basis_pursuit(5, 10, 9);
  AdmmProblem ap = basis_pursuit_admm(inst, 1.0);
  MonotoneParams p;
  Rng rng(14);
  SolverState s = make_state(rng.normal_vector(10));
  s = sadmm_step_v2(ap, p, s);
  CHECK((s.aux.at("lambda_tilde") - s.z).lpNorm<Eigen::Infinity>() < 1e-14);
}

TEST_CASE("spdhg_step matches the hand-written projection updates") {
  ProblemInstance inst = gen_matrix_game(4, 3, 6);
  SaddleProblem sp = game_saddle(inst);
  MonotoneParams p;
  Rng rng(31);
  Vector u0(7);
  u0.head(3) = Vector::Constant(3, 1.0 / 3.0) + 0.01 * rng.normal_vector(3);
  u0.tail(4) = Vector::Constant(4, 0.25) + 0.01 * rng.normal_vector(4);
  SolverState s = make_state(u0);
  s = spdhg_step(sp, p, s);

  Vector xt = u0.head(3), yt = u0.tail(4);
  Vector x_hand = project_simplex(
      (xt - sp.mu1 * (inst.A.transpose() * yt) - sp.mu1 * inst.a_lin).eval());
  Vector y_hand = project_simplex(
      (yt + sp.mu2 * (inst.A * (2.0 * x_hand - xt)) - sp.mu2 * inst.b).eval());
  CHECK((s.x.head(3) - x_hand).lpNorm<Eigen::Infinity>() < 1e-12);
  CHECK((s.x.tail(4) - y_hand).lpNorm<Eigen::Infinity>() < 1e-12);
  CHECK((s.aux.at("u_tilde") - u0).lpNorm<Eigen::Infinity>() < 1e-14);
}

TEST_CASE("classical_pdhg_step matches the hand-written updates") {
  ProblemInstance inst = gen_matrix_game(3, 3, 13);
  SaddleProblem sp = game_saddle(inst);
  Vector u0 = Vector::Constant(6, 1.0 / 3.0);
  SolverState s = make_state(u0);
  s = classical_pdhg_step(sp, s);
  Vector xt = u0.head(3), yt = u0.tail(3);
  Vector x_hand = project_simplex(
      (xt - sp.mu1 * (inst.A.transpose() * yt) - sp.mu1 * inst.a_lin).eval());
  Vector y_hand = project_simplex(
      (yt + sp.mu2 * (inst.A * (2.0 * x_hand - xt)) - sp.mu2 * inst.b).eval());
  CHECK((s.x.head(3) - x_hand).lpNorm<Eigen::Infinity>() < 1e-12);
  CHECK((s.x.tail(3) - y_hand).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("a one by one game is solved exactly from the center") {
  ProblemInstance inst = gen_matrix_game(1, 1, 2);
  SaddleProblem sp = game_saddle(inst);
  MonotoneParams p;
  Vector u0(2);
  u0 << 1.0, 1.0;
  SolverState s = make_state(u0);
  for (int i = 0; i < 3; ++i) {
    s = spdhg_step(sp, p, s);
    CHECK((s.x - u0).lpNorm<Eigen::Infinity>() < 1e-12);
    CHECK((s.x - s.aux.at("u_tilde")).lpNorm<Eigen::Infinity>() < 1e-12);
  }
}

TEST_CASE("spdhg guarantee mode rejects oversized step products") {
  ProblemInstance inst = gen_matrix_game(3, 3, 4);
  SaddleProblem sp = game_saddle(inst);
  sp.mu1 = sp.mu2 = 2.0 / sp.norm_K;
  SolverState s = make_state(Vector::Constant(6, 1.0 / 3.0));
  CHECK_THROWS_AS(spdhg_step(sp, MonotoneParams{1.0, 2.0}, s), std::invalid_argument);
  CHECK_NOTHROW(spdhg_step(sp, MonotoneParams{4.0, 2.0}, s));
  sp.mu1 = 0.0;
  CHECK_THROWS_AS(spdhg_step(sp, MonotoneParams{4.0, 2.0}, s), std::invalid_argument);
}

TEST_CASE("spdhg with zero coupling and free proxes is stationary") {
  SaddleProblem sp;
  sp.K = Matrix::Zero(2, 3);
  sp.prox_f = zero_prox(3);
  sp.prox_g = zero_prox(2);
  sp.mu1 = sp.mu2 = 0.5;
  sp.norm_K = 0.0;
  MonotoneParams p;
  Rng rng(77);
  Vector u0 = rng.normal_vector(5);
  SolverState s = make_state(u0);
  for (int i = 0; i < 4; ++i) {
    s = spdhg_step(sp, p, s);
    CHECK((s.x - u0).lpNorm<Eigen::Infinity>() < 1e-14);
  }
}

TEST_CASE("classical_alm converges linearly on the toy equality problem") {
  EqualityConstrainedProblem p = toy_equality();
  SolverState s = make_state(vec1(0.0));
  for (int i = 0; i < 60; ++i) s = classical_alm_step(p, 1.0, s);
  CHECK(s.x(0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(s.aux.at("constraint")(0)) < 1e-12);

  CHECK_THROWS_AS(classical_alm_step(p, 0.0, make_state(vec1(0.0))),
                  std::invalid_argument);
}
