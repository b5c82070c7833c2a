#pragma once

// Seeded benchmark problem generators, reference solutions, and the text
// container for persisting instances.

#include <cstdint>
#include <random>
#include <string>

#include "sppa/common.hpp"
#include "sppa/splitting.hpp"

namespace sppa {

/// Deterministic generator with a fully specified algorithm so instances are
/// bitwise reproducible across runs and platforms:
///  - raw stream: std::mt19937_64 (the 64-bit Mersenne twister, seeded
///    directly with the instance seed),
///  - uniform(): (raw >> 11) * 2^-53, the top 53 bits as a double in [0, 1),
///  - normal(): Box-Muller on a pair of uniforms, sqrt(-2 ln u1) cos(2 pi u2)
///    with the sin partner cached (u1 is taken from the half-open (0, 1]
///    by replacing 0 with 2^-53),
///  - uniform_int(lo, hi): rejection sampling on the raw stream.
/// std::*_distribution wrappers are avoided on purpose: their mapping from
/// the raw stream is implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double uniform();
  double normal();
  long uniform_int(long lo, long hi);  // inclusive bounds
  Vector normal_vector(Index n);
  Matrix normal_matrix(Index rows, Index cols);

 private:
  std::mt19937_64 gen_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

struct ProblemInstance {
  std::string kind;  // lasso | basis_pursuit | fused_lasso | matrix_game | quadratic_l1
  std::uint64_t seed = 0;
  Matrix A;          // design matrix or game coupling
  Vector b;          // rhs or the game's dual linear term
  Matrix D;          // fused lasso first differences
  Vector a_lin;      // game primal linear term
  Vector q;          // quadratic_l1 diagonal
  Vector l;          // quadratic_l1 linear term
  double mu = 0.0;
  double mu1 = 0.0;
  double mu2 = 0.0;
  double norm_K = 0.0;   // matrix_game: spectral norm of A
  Vector x_planted;      // sparse generating point (lasso, basis_pursuit)
};

/// LASSO min 1/2 ||Ax-b||^2 + mu ||x||_1 with standard normal A, a planted
/// ceil(n/10)-sparse signal, and noise scaled to 0.01 ||A x_sparse|| / sqrt(m).
ProblemInstance gen_lasso(Index m, Index n, std::uint64_t seed, double mu = 1.0);

/// Basis pursuit min ||x||_1 s.t. Ax = b with a planted feasible sparse
/// solution (b = A x_planted exactly). Requires m < n.
ProblemInstance gen_basis_pursuit(Index m, Index n, std::uint64_t seed);

/// Fused LASSO min 1/2 ||Ax-b||^2 + mu1 ||x||_1 + mu2 ||Dx||_1 with D the
/// (n-1) x n first-difference matrix.
ProblemInstance gen_fused_lasso(Index m, Index n, std::uint64_t seed, double mu1 = 5.0,
                                double mu2 = 10.0);

/// Matrix game min_{x in simplex} max_{y in simplex} <y, Ax> + <a, x> - <b, y>;
/// stores ||A|| for the PDHG step-size rule.
ProblemInstance gen_matrix_game(Index m, Index n, std::uint64_t seed);

/// Separable quadratic plus l1: f(x) = 1/2 x^T diag(q) x + l^T x + mu ||x||_1
/// with q_i uniform in [0.5, 5]. Prox and minimizer are exact closed forms.
ProblemInstance gen_quadratic_l1(Index n, std::uint64_t seed, double mu = 1.0);

struct ReferenceSolution {
  Vector xstar;
  double fstar = 0.0;
  Vector dual;               // multiplier / dual reference when applicable
  double certified_tol = 0.0;  // residual actually reached
};

/// High-accuracy reference for an instance: closed form (quadratic_l1),
/// FISTA (lasso), long classical ADMM (basis_pursuit, fused_lasso), or a
/// long symplectic PDHG run (matrix_game). If the budget runs out before
/// the target residual, the reference is still returned and certified_tol
/// records what was reached.
ReferenceSolution reference_solution(const ProblemInstance& p, long budget = 200000);

/// Objective value of the instance at x (primal stacked (x; y) for games,
/// where the saddle value is reported).
double objective_value(const ProblemInstance& p, const Vector& x);

/// objective_value(p, x) - objective_value(p, y), evaluated in difference form
/// so that near-equal points do not cancel: accurate to roughly machine
/// epsilon of the gap itself rather than of the objective values.
double objective_gap(const ProblemInstance& p, const Vector& x, const Vector& y);

// Solver-facing forms of the generated instances. The ADMM builders fix the
// multiplier sign convention of AdmmProblem; their duals are interchangeable
// with the references produced by reference_solution.

/// Basis pursuit as consensus ADMM: min ||x||_1 + ind{Ay=b}, x - y = 0.
AdmmProblem basis_pursuit_admm(const ProblemInstance& p, double rho);

/// Fused LASSO as consensus ADMM over the stack S = [I; I; D]: blocks
/// (x1, x2, x3) with x - S y = 0.
AdmmProblem fused_lasso_admm(const ProblemInstance& p, double rho);

/// LASSO as consensus ADMM: min 1/2 ||Ax-b||^2 + mu ||y||_1, x - y = 0.
AdmmProblem lasso_admm(const ProblemInstance& p, double rho);

/// Matrix game as a saddle problem with the generator's step sizes.
SaddleProblem game_saddle(const ProblemInstance& p);

/// LASSO in the equality-constrained form used by the augmented Lagrangian
/// solvers: stacked primal v = (x; y), constraint x - y = 0, H = I. The
/// subproblem eliminates y through the soft threshold and solves for x with
/// a warm-started accelerated gradient loop (tolerance inner_tol on the
/// iterate change); the oracle keeps the warm start as internal state, so a
/// copy per solver run is required.
EqualityConstrainedProblem lasso_salm(const ProblemInstance& p,
                                      double inner_tol = 1e-11,
                                      long inner_max_iter = 20000);

/// Spectral norm via power iteration (used to cross-check stored norms).
double power_iteration_norm(const Matrix& A, long iters = 500, std::uint64_t seed = 1);

/// Writes/reads the labeled text container. Round trips are exact: entries
/// are printed with 17 significant digits.
void save_instance(const ProblemInstance& p, const std::string& path);
ProblemInstance load_instance(const std::string& path);

std::string instance_to_string(const ProblemInstance& p);
ProblemInstance instance_from_string(const std::string& text);

}  // namespace sppa
