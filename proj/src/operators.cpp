#include "sppa/operators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>
#include <vector>

namespace sppa {

Vector soft_threshold(const Vector& v, double tau) {
  if (!(tau >= 0.0))
    throw std::invalid_argument("soft_threshold: threshold must be >= 0, got " +
                                std::to_string(tau));
  require_finite(v, "soft_threshold");
  Vector out(v.size());
  for (Index i = 0; i < v.size(); ++i) {
    double m = std::abs(v[i]) - tau;
    out[i] = m > 0.0 ? (v[i] > 0.0 ? m : -m) : 0.0;
  }
  return out;
}

Vector project_simplex(const Vector& v) {
  if (v.size() == 0)
    throw std::invalid_argument("project_simplex: empty input");
  require_finite(v, "project_simplex");
  std::vector<double> u(v.data(), v.data() + v.size());
  std::sort(u.begin(), u.end(), std::greater<double>());
  double cum = 0.0;
  double theta = 0.0;
  long support = 0;
  for (size_t j = 0; j < u.size(); ++j) {
    cum += u[j];
    double cand = (cum - 1.0) / static_cast<double>(j + 1);
    if (u[j] - cand > 0.0) {
      theta = cand;
      support = static_cast<long>(j + 1);
    }
  }
  (void)support;
  Vector out(v.size());
  for (Index i = 0; i < v.size(); ++i) out[i] = std::max(v[i] - theta, 0.0);
  return out;
}

ProxMap::ProxMap(Index dim, Eval eval, std::string label)
    : dim_(dim), eval_(std::move(eval)), label_(std::move(label)) {
  if (dim_ <= 0) throw std::invalid_argument("ProxMap: dimension must be positive");
  if (!eval_) throw std::invalid_argument("ProxMap: empty evaluator");
}

Vector ProxMap::operator()(double t, const Vector& point) const {
  if (!eval_) throw std::logic_error("ProxMap: evaluating a default-constructed map");
  if (!(t > 0.0) || !std::isfinite(t))
    throw std::invalid_argument("ProxMap(" + label_ + "): step must be positive and finite");
  require_dim(point, dim_, "ProxMap(" + label_ + ")");
  require_finite(point, "ProxMap(" + label_ + ") input");
  Vector out = eval_(t, point);
  require_dim(out, dim_, "ProxMap(" + label_ + ") output");
  require_finite(out, "ProxMap(" + label_ + ") output");
  return out;
}

ProxMap l1_prox(Index dim, double weight) {
  if (!(weight >= 0.0))
    throw std::invalid_argument("l1_prox: weight must be >= 0");
  return ProxMap(
      dim, [weight](double t, const Vector& v) { return soft_threshold(v, t * weight); },
      "l1");
}

ProxMap zero_prox(Index dim) {
  return ProxMap(dim, [](double, const Vector& v) { return v; }, "zero");
}

ProxMap scaled_identity_prox(Index dim, double alpha) {
  if (!(alpha >= 0.0))
    throw std::invalid_argument("scaled_identity_prox: alpha must be >= 0");
  return ProxMap(
      dim, [alpha](double t, const Vector& v) { return Vector(v / (1.0 + t * alpha)); },
      "scaled_identity");
}

ProxMap simplex_prox(Index dim) {
  return ProxMap(dim, [](double, const Vector& v) { return project_simplex(v); }, "simplex");
}

ProxMap linear_plus_simplex_prox(const Vector& a) {
  require_finite(a, "linear_plus_simplex_prox");
  Vector ac = a;
  return ProxMap(
      a.size(),
      [ac](double t, const Vector& v) { return project_simplex(v - t * ac); },
      "linear_plus_simplex");
}

ProxMap separable_quadratic_l1_prox(const Vector& q, const Vector& l, double mu) {
  if (q.size() != l.size())
    throw std::invalid_argument("separable_quadratic_l1_prox: q and l sizes differ");
  if ((q.array() < 0.0).any())
    throw std::invalid_argument("separable_quadratic_l1_prox: q must be nonnegative");
  if (!(mu >= 0.0))
    throw std::invalid_argument("separable_quadratic_l1_prox: mu must be >= 0");
  Vector qc = q, lc = l;
  return ProxMap(
      q.size(),
      [qc, lc, mu](double t, const Vector& v) {
        // argmin_y q_i/2 y^2 + l_i y + mu |y| + (y - v_i)^2 / (2t), coordinatewise
        Vector out(v.size());
        for (Index i = 0; i < v.size(); ++i) {
          double denom = qc[i] + 1.0 / t;
          double lin = v[i] / t - lc[i];
          double m = std::abs(lin) - mu;
          out[i] = m > 0.0 ? (lin > 0.0 ? m : -m) / denom : 0.0;
        }
        return out;
      },
      "separable_quadratic_l1");
}

struct LeastSquaresProx::Cache {
  std::mutex mu;
  std::map<double, Eigen::LLT<Matrix>> factors;
};

LeastSquaresProx::LeastSquaresProx(Matrix A, Vector b)
    : A_(std::move(A)), b_(std::move(b)), cache_(std::make_shared<Cache>()) {
  require_finite(A_, "LeastSquaresProx A");
  require_finite(b_, "LeastSquaresProx b");
  if (A_.rows() != b_.size())
    throw std::invalid_argument("LeastSquaresProx: A rows and b size differ");
  gram_ = A_.transpose() * A_;
  atb_ = A_.transpose() * b_;
}

Vector LeastSquaresProx::operator()(double t, const Vector& v) const {
  if (!(t > 0.0) || !std::isfinite(t))
    throw std::invalid_argument("LeastSquaresProx: step must be positive and finite");
  require_dim(v, gram_.rows(), "LeastSquaresProx");
  require_finite(v, "LeastSquaresProx input");
  std::lock_guard<std::mutex> lock(cache_->mu);
  auto it = cache_->factors.find(t);
  if (it == cache_->factors.end()) {
    Matrix shifted = gram_;
    shifted.diagonal().array() += 1.0 / t;
    it = cache_->factors.emplace(t, Eigen::LLT<Matrix>(shifted)).first;
    if (it->second.info() != Eigen::Success)
      throw std::runtime_error("LeastSquaresProx: factorization failed");
  }
  return it->second.solve((atb_ + v / t).eval());
}

ProxMap LeastSquaresProx::as_prox_map() const {
  LeastSquaresProx self = *this;  // shares cache_
  return ProxMap(
      dimension(), [self](double t, const Vector& v) { return self(t, v); },
      "least_squares");
}

Vector prox_least_squares(const Matrix& A, const Vector& b, double t, const Vector& v) {
  return LeastSquaresProx(A, b)(t, v);
}

ProxMap affine_projection_prox(const Matrix& A, const Vector& b) {
  require_finite(A, "affine_projection_prox A");
  require_finite(b, "affine_projection_prox b");
  if (A.rows() != b.size())
    throw std::invalid_argument("affine_projection_prox: A rows and b size differ");
  auto llt = std::make_shared<Eigen::LLT<Matrix>>(Matrix(A * A.transpose()));
  if (llt->info() != Eigen::Success)
    throw std::invalid_argument("affine_projection_prox: A A^T not positive definite");
  Matrix Ac = A;
  Vector bc = b;
  return ProxMap(
      A.cols(),
      [Ac, bc, llt](double, const Vector& v) {
        return Vector(v - Ac.transpose() * llt->solve((Ac * v - bc).eval()));
      },
      "affine_projection");
}

Vector yosida_apply(const ProxMap& resolvent, const Vector& x) {
  return x - resolvent(1.0, x);
}

Vector resolvent_of_yosida(const ProxMap& resolvent, double c, const Vector& x) {
  if (!(c > 0.0) || !std::isfinite(c))
    throw std::invalid_argument("resolvent_of_yosida: index must be positive and finite");
  return (x + c * resolvent(1.0 + c, x)) / (1.0 + c);
}

Vector dr_operator(const ProxMap& res_a, const ProxMap& res_b, double rho, const Vector& x) {
  if (!(rho > 0.0))
    throw std::invalid_argument("dr_operator: rho must be positive");
  Vector u = res_b(rho, x);
  Vector refl = 2.0 * u - x;
  Vector v = res_a(rho, refl);
  return 0.5 * x + 0.5 * (2.0 * v - refl);
}

ProxMap dr_prox_map(const ProxMap& res_a, const ProxMap& res_b, double rho) {
  if (res_a.dimension() != res_b.dimension())
    throw std::invalid_argument("dr_prox_map: operand dimensions differ");
  ProxMap a = res_a, b = res_b;
  return ProxMap(
      res_a.dimension(),
      [a, b, rho](double t, const Vector& x) {
        if (t != 1.0)
          throw std::invalid_argument("dr_prox_map: only step 1 is defined");
        return dr_operator(a, b, rho, x);
      },
      "douglas_rachford");
}

FistaResult fista_solve(const std::function<Vector(const Vector&)>& grad_f,
                        double lipschitz, const ProxMap& prox_g, const Vector& x0,
                        long max_iter, double tol) {
  if (!(lipschitz > 0.0))
    throw std::invalid_argument("fista_solve: Lipschitz constant must be positive");
  require_finite(x0, "fista_solve x0");
  double step = 1.0 / lipschitz;
  Vector x = x0, y = x0;
  double theta = 1.0;
  FistaResult res;
  for (long j = 0; j < max_iter; ++j) {
    Vector x_next = prox_g(step, (y - step * grad_f(y)).eval());
    double theta_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta * theta));
    y = x_next + ((theta - 1.0) / theta_next) * (x_next - x);
    double change = (x_next - x).norm();
    x = x_next;
    theta = theta_next;
    res.iterations = j + 1;
    if (change <= tol * std::max(1.0, x.norm())) {
      res.converged = true;
      break;
    }
  }
  res.x = x;
  return res;
}

}  // namespace sppa
