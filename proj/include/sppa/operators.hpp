#pragma once

// Proximal operators, resolvents, and related oracles.

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include "sppa/common.hpp"

namespace sppa {

/// Componentwise soft threshold: sign(v) * max(|v| - tau, 0).
/// tau < 0 is rejected.
Vector soft_threshold(const Vector& v, double tau);

/// Euclidean projection onto the probability simplex {x >= 0, sum x = 1}.
/// Sort-and-threshold algorithm, O(n log n).
Vector project_simplex(const Vector& v);

/// An evaluable prox/resolvent oracle x -> J_{tF}(x) for a fixed operator F.
/// The step index t > 0 is passed per call so composite constructions
/// (Yosida resolvents, schedule-driven prox steps) can rescale it.
class ProxMap {
 public:
  using Eval = std::function<Vector(double, const Vector&)>;

  ProxMap() = default;
  ProxMap(Index dim, Eval eval, std::string label = {});

  /// Evaluates J_{tF}(point). Validates t > 0, dimensions, and that both
  /// input and output are finite.
  Vector operator()(double t, const Vector& point) const;

  Index dimension() const { return dim_; }
  const std::string& label() const { return label_; }
  bool valid() const { return static_cast<bool>(eval_); }

 private:
  Index dim_ = 0;
  Eval eval_;
  std::string label_;
};

/// Resolvent of weight * d|.|_1, i.e. prox of the scaled l1 norm:
/// J(t, v) = soft_threshold(v, t * weight).
ProxMap l1_prox(Index dim, double weight = 1.0);

/// Resolvent of the zero operator: the identity map at every step.
ProxMap zero_prox(Index dim);

/// Resolvent of the linear operator x -> alpha x (alpha >= 0):
/// J(t, v) = v / (1 + t alpha).
ProxMap scaled_identity_prox(Index dim, double alpha);

/// Resolvent of the normal cone of the simplex: projection, step-independent.
ProxMap simplex_prox(Index dim);

/// Prox of f(x) = <a, x> + indicator(simplex): J(t, v) = proj(v - t a).
ProxMap linear_plus_simplex_prox(const Vector& a);

/// Prox of the separable f(x) = sum_i (q_i/2) x_i^2 + l_i x_i + mu |x_i|,
/// exact per-coordinate closed form. Requires q_i >= 0, mu >= 0.
ProxMap separable_quadratic_l1_prox(const Vector& q, const Vector& l, double mu);

/// Prox of f(x) = 1/2 ||Ax - b||^2. Solves (A^T A + I/t) x = A^T b + v/t,
/// factoring once per distinct t (cache safe under concurrent use).
class LeastSquaresProx {
 public:
  LeastSquaresProx(Matrix A, Vector b);

  Vector operator()(double t, const Vector& v) const;
  Index dimension() const { return gram_.rows(); }

  /// The same oracle as a ProxMap (shares the factorization cache).
  ProxMap as_prox_map() const;

 private:
  Matrix A_;
  Vector b_;
  Matrix gram_;   // A^T A
  Vector atb_;    // A^T b
  struct Cache;
  std::shared_ptr<Cache> cache_;
};

/// One-call convenience wrapper (no caching across calls).
Vector prox_least_squares(const Matrix& A, const Vector& b, double t, const Vector& v);

/// Projection onto the affine set {x : Ax = b}, as the resolvent of its
/// normal cone (step-independent). A A^T is factored once at construction;
/// rows of A must be linearly independent.
ProxMap affine_projection_prox(const Matrix& A, const Vector& b);

/// Yosida approximation applied through the unit resolvent:
/// A_tilde(x) = x - J_A(x).
Vector yosida_apply(const ProxMap& resolvent, const Vector& x);

/// Resolvent of the Yosida approximation, via the identity
/// (I + c A_tilde)^{-1} = 1/(1+c) I + c/(1+c) J_{(1+c)A}.
Vector resolvent_of_yosida(const ProxMap& resolvent, double c, const Vector& x);

/// Douglas-Rachford map T = 1/2 I + 1/2 (2 J_{rho A} - I)(2 J_{rho B} - I)
/// applied to x.
Vector dr_operator(const ProxMap& res_a, const ProxMap& res_b, double rho, const Vector& x);

/// The DR map T as a firmly nonexpansive oracle. T is the resolvent of an
/// (implicit) maximal monotone operator, so it slots into the monotone
/// solvers; only step 1 is meaningful and other steps are rejected.
ProxMap dr_prox_map(const ProxMap& res_a, const ProxMap& res_b, double rho);

struct FistaResult {
  Vector x;
  long iterations = 0;
  bool converged = false;
};

/// FISTA for min f(x) + g(x) with grad f L-Lipschitz and g proxable.
/// Stops when the iterate change drops below tol (relative to max(1, ||x||)).
FistaResult fista_solve(const std::function<Vector(const Vector&)>& grad_f,
                        double lipschitz, const ProxMap& prox_g, const Vector& x0,
                        long max_iter = 5000, double tol = 1e-10);

}  // namespace sppa
