#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <string>

#include "oracles.hpp"
#include "sppa/problems.hpp"
#include "sppa/splitting.hpp"

using namespace sppa;

TEST_CASE("rng streams are pinned") {
  Rng u(12345);
  CHECK(u.uniform() == 0.35762972288842587);
  CHECK(u.uniform() == 0.40044261704406114);
  CHECK(u.uniform() == 0.68938331700276845);

  Rng n(12345);
  CHECK(n.normal() == -1.162514705917397);
  CHECK(n.normal() == 0.83968672813474454);
  CHECK(n.normal() == -0.8024637068257271);

  Rng i(12345);
  CHECK(i.uniform_int(0, 9) == 6);
  CHECK(i.uniform_int(0, 9) == 1);
  CHECK(i.uniform_int(0, 9) == 5);
  CHECK_THROWS_AS(i.uniform_int(3, 2), std::invalid_argument);

  Rng v(9);
  Vector a = v.normal_vector(4);
  Rng w(9);
  Vector b = w.normal_vector(4);
  CHECK((a - b).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("lasso generator plants a sparse signal") {
  ProblemInstance p = gen_lasso(30, 60, 7);
  CHECK(p.kind == "lasso");
  CHECK(p.A.rows() == 30);
  CHECK(p.A.cols() == 60);
  CHECK(p.b.size() == 30);
  CHECK(p.mu == 1.0);
  CHECK(p.x_planted.size() == 60);
  long nnz = 0;
  for (Index i = 0; i < 60; ++i)
    if (p.x_planted(i) != 0.0) ++nnz;
  CHECK(nnz == 6);
  CHECK(instance_to_string(p) == instance_to_string(gen_lasso(30, 60, 7)));
  CHECK(instance_to_string(p) != instance_to_string(gen_lasso(30, 60, 8)));
  CHECK_THROWS_AS(gen_lasso(0, 10, 1), std::invalid_argument);
  CHECK_THROWS_AS(gen_lasso(5, 10, 1, 0.0), std::invalid_argument);
}

TEST_CASE("basis pursuit generator is exactly feasible") {
  ProblemInstance p = gen_basis_pursuit(20, 50, 3);
  CHECK(p.kind == "basis_pursuit");
  CHECK((p.A * p.x_planted - p.b).lpNorm<Eigen::Infinity>() <= 1e-12);
  CHECK_THROWS_AS(gen_basis_pursuit(10, 10, 1), std::invalid_argument);
  CHECK_THROWS_AS(gen_basis_pursuit(12, 10, 1), std::invalid_argument);
}

TEST_CASE("fused lasso difference matrix has zero row sums") {
  ProblemInstance p = gen_fused_lasso(15, 24, 5);
  CHECK(p.D.rows() == 23);
  CHECK(p.D.cols() == 24);
  for (Index i = 0; i < p.D.rows(); ++i) {
    CHECK(p.D(i, i) == -1.0);
    CHECK(p.D(i, i + 1) == 1.0);
    CHECK(p.D.row(i).sum() == 0.0);
    CHECK(p.D.row(i).cwiseAbs().sum() == 2.0);
  }
  CHECK(p.mu1 == 5.0);
  CHECK(p.mu2 == 10.0);
  CHECK_THROWS_AS(gen_fused_lasso(4, 1, 1), std::invalid_argument);
}

TEST_CASE("matrix game step sizes sit just under the guarantee edge") {
  ProblemInstance p = gen_matrix_game(12, 9, 4);
  CHECK(p.kind == "matrix_game");
  CHECK(p.A.rows() == 12);
  CHECK(p.A.cols() == 9);
  CHECK(p.a_lin.size() == 9);
  CHECK(p.b.size() == 12);
  CHECK(p.mu1 == doctest::Approx(0.99 / p.norm_K).epsilon(1e-14));
  CHECK(p.mu2 == doctest::Approx(0.99 / p.norm_K).epsilon(1e-14));
  CHECK(p.mu1 * p.mu2 * p.norm_K * p.norm_K < 1.0);
  double pow_norm = power_iteration_norm(p.A);
  CHECK(pow_norm == doctest::Approx(p.norm_K).epsilon(1e-8));
}

TEST_CASE("quadratic_l1 generator keeps curvatures in range") {
  ProblemInstance p = gen_quadratic_l1(40, 2);
  CHECK(p.q.size() == 40);
  CHECK(p.l.size() == 40);
  CHECK(p.q.minCoeff() >= 0.5);
  CHECK(p.q.maxCoeff() <= 5.0);
  CHECK(p.mu == 1.0);
  CHECK_THROWS_AS(gen_quadratic_l1(0, 1), std::invalid_argument);
}

TEST_CASE("quadratic_l1 reference matches a per-coordinate grid search") {
  ProblemInstance p = gen_quadratic_l1(6, 11);
  ReferenceSolution ref = reference_solution(p);
  CHECK(ref.certified_tol == 0.0);
  double fsum = 0.0;
  for (Index i = 0; i < 6; ++i) {
    double q = p.q(i), l = p.l(i), mu = p.mu;
    auto fi = [q, l, mu](double x) {
      return 0.5 * q * x * x + l * x + mu * std::abs(x);
    };
    double xi = test_oracles::grid_min_1d(fi, -10.0, 10.0);
    CHECK(std::abs(ref.xstar(i) - xi) < 1e-8);
    fsum += fi(ref.xstar(i));
  }
  CHECK(ref.fstar == doctest::Approx(fsum).epsilon(1e-12));
  CHECK(objective_value(p, ref.xstar) == doctest::Approx(ref.fstar).epsilon(1e-14));
}

TEST_CASE("a hand-built one dimensional lasso has the known solution") {
  ProblemInstance p;
  p.kind = "lasso";
  p.seed = 0;
  p.A = Matrix::Identity(1, 1);
  p.b = Vector::Constant(1, 2.0);
  p.mu = 1.0;
  ReferenceSolution ref = reference_solution(p);
  CHECK(ref.xstar(0) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(ref.fstar == doctest::Approx(1.5).epsilon(1e-10));
}

TEST_CASE("lasso reference agrees with an independent classical admm") {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    ProblemInstance inst = gen_lasso(20, 40, seed);
    ReferenceSolution ref = reference_solution(inst);
    CHECK(ref.certified_tol <= 1e-9);
    AdmmProblem ap = lasso_admm(inst, 1.0);
    SolverState s = make_state(Vector::Zero(40));
    for (long i = 0; i < 100000; ++i) {
      s = classical_admm_step(ap, s);
      if (s.aux.at("residual").norm() < 1e-12) break;
    }
    double f_admm = objective_value(inst, s.aux.at("primal_y"));
    CHECK(std::abs(f_admm - ref.fstar) < 1e-9);
  }
}

TEST_CASE("objective_value covers every kind and rejects strangers") {
  ProblemInstance quad = gen_quadratic_l1(5, 1);
  CHECK(objective_value(quad, Vector::Zero(5)) == 0.0);

  ProblemInstance game = gen_matrix_game(3, 2, 1);
  Vector u(5);
  u.head(2) = Vector::Constant(2, 0.5);
  u.tail(3) = Vector::Constant(3, 1.0 / 3.0);
  Vector xs = u.head(2), ys = u.tail(3);
  double want = ys.dot(game.A * xs) + game.a_lin.dot(xs) - game.b.dot(ys);
  CHECK(objective_value(game, u) == doctest::Approx(want).epsilon(1e-14));

  ProblemInstance broken;
  broken.kind = "mystery";
  CHECK_THROWS_AS(objective_value(broken, Vector::Zero(1)), std::invalid_argument);
  CHECK_THROWS_AS(reference_solution(broken), std::invalid_argument);
  CHECK_THROWS_AS(reference_solution(quad, 0), std::invalid_argument);
}

TEST_CASE("objective_gap matches value differences and resolves tiny gaps") {
  Rng rng(31);
  ProblemInstance insts[] = {
      gen_lasso(12, 25, 2), gen_basis_pursuit(8, 20, 3), gen_fused_lasso(10, 18, 4),
      gen_matrix_game(6, 9, 5), gen_quadratic_l1(15, 6)};
  for (const ProblemInstance& p : insts) {
    Index dim = p.kind == "quadratic_l1" ? p.q.size()
                : p.kind == "matrix_game" ? p.A.cols() + p.A.rows()
                                          : p.A.cols();
    Vector x = rng.normal_vector(dim), y = rng.normal_vector(dim);
    double direct = objective_value(p, x) - objective_value(p, y);
    CHECK(objective_gap(p, x, y) == doctest::Approx(direct).epsilon(1e-10));
    CHECK(objective_gap(p, x, x) == 0.0);
  }
  ProblemInstance broken;
  broken.kind = "mystery";
  CHECK_THROWS_AS(objective_gap(broken, Vector::Zero(1), Vector::Zero(1)),
                  std::invalid_argument);

  // Near the minimizer the difference form resolves gaps far below the
  // rounding noise of the two objective values.
  ProblemInstance q = gen_quadratic_l1(50, 3);
  ReferenceSolution ref = reference_solution(q);
  Index widest = 0;
  ref.xstar.cwiseAbs().maxCoeff(&widest);
  Vector xp = ref.xstar;
  xp[widest] += 1e-13;
  CHECK(std::abs(objective_gap(q, xp, ref.xstar)) < 1e-18);
}

TEST_CASE("instance text round trips exactly") {
  ProblemInstance insts[] = {
      gen_lasso(8, 16, 21), gen_basis_pursuit(6, 14, 22), gen_fused_lasso(7, 9, 23),
      gen_matrix_game(4, 5, 24), gen_quadratic_l1(10, 25)};
  for (const ProblemInstance& p : insts) {
    std::string text = instance_to_string(p);
    ProblemInstance q = instance_from_string(text);
    CHECK(instance_to_string(q) == text);
    CHECK(q.kind == p.kind);
    CHECK(q.seed == p.seed);
  }
}

TEST_CASE("instance files round trip through disk") {
  ProblemInstance p = gen_lasso(5, 12, 31);
  std::string path = "roundtrip_instance.txt";
  save_instance(p, path);
  ProblemInstance q = load_instance(path);
  CHECK(instance_to_string(q) == instance_to_string(p));
  std::remove(path.c_str());
  CHECK_THROWS_AS(load_instance("no_such_dir/missing.txt"), std::runtime_error);
}

TEST_CASE("malformed instance text names the offending line") {
  CHECK_THROWS_AS(instance_from_string("bogus header\n"), std::runtime_error);
  CHECK_THROWS_AS(instance_from_string("sppa-instance v1\nkind lasso\n"),
                  std::runtime_error);
  CHECK_THROWS_AS(
      instance_from_string("sppa-instance v1\nkind lasso\nwhatever 3\nend\n"),
      std::runtime_error);
  CHECK_THROWS_AS(
      instance_from_string("sppa-instance v1\nkind lasso\nvector b 3\n1,2\nend\n"),
      std::runtime_error);
  CHECK_THROWS_AS(
      instance_from_string("sppa-instance v1\nkind lasso\nmatrix A 2 2\n1,2\nend\n"),
      std::runtime_error);
  CHECK_THROWS_AS(instance_from_string("sppa-instance v1\nseed 1\nend\n"),
                  std::runtime_error);
  try {
    instance_from_string("sppa-instance v1\nkind lasso\nvector b 2\n1,oops\nend\n");
    FAIL("expected a parse error");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("parse error at line 4") != std::string::npos);
  }
}

TEST_CASE("power iteration tracks the svd norm") {
  Rng rng(6);
  Matrix A = rng.normal_matrix(8, 5);
  double svd = Eigen::JacobiSVD<Matrix>(A).singularValues()(0);
  CHECK(power_iteration_norm(A) == doctest::Approx(svd).epsilon(1e-8));
}

TEST_CASE("admm and saddle builders give consistent shapes") {
  ProblemInstance bp = gen_basis_pursuit(6, 12, 2);
  AdmmProblem ap = basis_pursuit_admm(bp, 1.5);
  CHECK(ap.rho == 1.5);
  CHECK(ap.A.rows() == 12);
  CHECK(ap.B.rows() == 12);
  CHECK(ap.c.size() == 12);

  ProblemInstance game = gen_matrix_game(4, 3, 2);
  SaddleProblem sp = game_saddle(game);
  CHECK(sp.K.rows() == 4);
  CHECK(sp.K.cols() == 3);
  CHECK(sp.mu1 == game.mu1);
  CHECK(sp.mu2 == game.mu2);
  CHECK(sp.norm_K == game.norm_K);
  CHECK(sp.prox_f.dimension() == 3);
  CHECK(sp.prox_g.dimension() == 4);
}
