#pragma once

#include <span>
#include <vector>

#include "regcomb/exact/matrix.hpp"

namespace regcomb {

class NotPositiveDefiniteError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Exact solution of m·x = b for symmetric positive definite m, by
/// symmetric Gaussian elimination without pivoting. A nonpositive pivot
/// proves m is not positive definite.
inline std::vector<Rational> solve_spd(const RatMatrix& m, std::span<const Rational> b) {
  const std::size_t n = m.rows();
  if (m.cols() != n || b.size() != n) throw DomainError("solve_spd: dimension mismatch");
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (m(i, j) != m(j, i)) throw NotPositiveDefiniteError("solve_spd: matrix is not symmetric");

  RatMatrix a = m;
  std::vector<Rational> x(b.begin(), b.end());
  for (std::size_t k = 0; k < n; ++k) {
    if (sgn(a(k, k)) <= 0)
      throw NotPositiveDefiniteError("solve_spd: nonpositive pivot at step " + std::to_string(k));
    for (std::size_t i = k + 1; i < n; ++i) {
      if (a(i, k) == 0) continue;
      Rational f = a(i, k) / a(k, k);
      for (std::size_t j = k; j < n; ++j)
        if (a(k, j) != 0) a(i, j) -= f * a(k, j);
      x[i] -= f * x[k];
    }
  }
  for (std::size_t i = n; i-- > 0;) {
    Rational s = x[i];
    for (std::size_t j = i + 1; j < n; ++j)
      if (a(i, j) != 0) s -= a(i, j) * x[j];
    x[i] = s / a(i, i);
  }
  return x;
}

}  // namespace regcomb
