#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace sppa {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Throws std::domain_error if v contains NaN or Inf.
inline void require_finite(const Vector& v, const std::string& what) {
  if (!v.allFinite())
    throw std::domain_error(what + ": non-finite entries");
}

inline void require_finite(const Matrix& m, const std::string& what) {
  if (!m.allFinite())
    throw std::domain_error(what + ": non-finite entries");
}

inline void require_dim(const Vector& v, Index dim, const std::string& what) {
  if (v.size() != dim)
    throw std::invalid_argument(what + ": expected dimension " + std::to_string(dim) +
                                ", got " + std::to_string(v.size()));
}

}  // namespace sppa
