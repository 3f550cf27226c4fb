#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "regcomb/exact/matrix.hpp"

namespace regcomb {

/// Fraction-free (Bareiss) determinant of a square integer matrix.
/// Row pivoting takes the first nonzero entry at or below the diagonal.
inline Integer bareiss_determinant(IntMatrix a) {
  if (a.rows() != a.cols()) throw DomainError("determinant of a non-square matrix");
  const std::size_t n = a.rows();
  if (n == 0) return Integer(1);
  Integer prev = 1;
  int sign = 1;
  Integer tmp;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (a(k, k) == 0) {
      std::size_t p = k + 1;
      while (p < n && a(p, k) == 0) ++p;
      if (p == n) return Integer(0);
      a.swap_rows(k, p);
      sign = -sign;
    }
    const Integer& pivot = a(k, k);
    for (std::size_t i = k + 1; i < n; ++i) {
      const Integer& aik = a(i, k);
      for (std::size_t j = k + 1; j < n; ++j) {
        mpz_mul(tmp.get_mpz_t(), a(i, j).get_mpz_t(), pivot.get_mpz_t());
        mpz_submul(tmp.get_mpz_t(), aik.get_mpz_t(), a(k, j).get_mpz_t());
        mpz_divexact(a(i, j).get_mpz_t(), tmp.get_mpz_t(), prev.get_mpz_t());
      }
    }
    for (std::size_t i = k + 1; i < n; ++i) a(i, k) = 0;
    prev = pivot;
  }
  Integer d = a(n - 1, n - 1);
  return sign > 0 ? d : Integer(-d);
}

/// Determinant of a square rational matrix by Gaussian elimination.
inline Rational determinant(RatMatrix a) {
  if (a.rows() != a.cols()) throw DomainError("determinant of a non-square matrix");
  const std::size_t n = a.rows();
  Rational det = 1;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    while (p < n && a(p, k) == 0) ++p;
    if (p == n) return Rational(0);
    if (p != k) {
      a.swap_rows(k, p);
      det = -det;
    }
    det *= a(k, k);
    for (std::size_t i = k + 1; i < n; ++i) {
      if (a(i, k) == 0) continue;
      Rational f = a(i, k) / a(k, k);
      for (std::size_t j = k; j < n; ++j) a(i, j) -= f * a(k, j);
    }
  }
  return det;
}

/// Incremental row echelon basis over the rationals, stored as primitive
/// integer rows. Used for exact rank and span tests.
class RowEchelon {
 public:
  explicit RowEchelon(std::size_t dim) : dim_(dim) {}

  std::size_t dim() const noexcept { return dim_; }
  std::size_t rank() const noexcept { return rows_.size(); }

  /// Reduces `v` against the current basis; returns true iff the reduced
  /// vector is zero (i.e. `v` lies in the span).
  bool reduces_to_zero(std::vector<Integer> v) const {
    reduce(v);
    return first_nonzero(v) == dim_;
  }

  /// Inserts `v`; returns true iff the rank increased.
  bool insert(std::vector<Integer> v) {
    if (v.size() != dim_) throw DomainError("echelon insert: dimension mismatch");
    reduce(v);
    std::size_t lead = first_nonzero(v);
    if (lead == dim_) return false;
    make_primitive(v);
    // Keep rows ordered by leading column.
    std::size_t pos = 0;
    while (pos < leads_.size() && leads_[pos] < lead) ++pos;
    rows_.insert(rows_.begin() + static_cast<std::ptrdiff_t>(pos), std::move(v));
    leads_.insert(leads_.begin() + static_cast<std::ptrdiff_t>(pos), lead);
    return true;
  }

  template <typename Int>
  bool insert_small(std::span<const Int> v) {
    std::vector<Integer> z(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) mpz_set_si(z[i].get_mpz_t(), static_cast<long>(v[i]));
    return insert(std::move(z));
  }

 private:
  std::size_t first_nonzero(const std::vector<Integer>& v) const {
    for (std::size_t i = 0; i < v.size(); ++i)
      if (v[i] != 0) return i;
    return dim_;
  }

  static void make_primitive(std::vector<Integer>& v) {
    Integer g = 0;
    for (const auto& x : v)
      if (x != 0) mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), x.get_mpz_t());
    if (g > 1)
      for (auto& x : v) mpz_divexact(x.get_mpz_t(), x.get_mpz_t(), g.get_mpz_t());
  }

  void reduce(std::vector<Integer>& v) const {
    Integer a, b, g;
    for (std::size_t r = 0; r < rows_.size(); ++r) {
      const std::size_t c = leads_[r];
      if (v[c] == 0) continue;
      const auto& row = rows_[r];
      mpz_gcd(g.get_mpz_t(), row[c].get_mpz_t(), v[c].get_mpz_t());
      mpz_divexact(a.get_mpz_t(), row[c].get_mpz_t(), g.get_mpz_t());
      mpz_divexact(b.get_mpz_t(), v[c].get_mpz_t(), g.get_mpz_t());
      // v <- a*v - b*row, which clears column c.
      for (std::size_t j = 0; j < dim_; ++j) {
        if (a != 1) v[j] *= a;
        if (row[j] != 0) mpz_submul(v[j].get_mpz_t(), b.get_mpz_t(), row[j].get_mpz_t());
      }
      make_primitive(v);
    }
  }

  std::size_t dim_;
  std::vector<std::vector<Integer>> rows_;
  std::vector<std::size_t> leads_;
};

/// Exact rank of an integer matrix (row rank).
inline std::size_t rank(const IntMatrix& m) {
  RowEchelon e(m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto r = m.row(i);
    e.insert(std::vector<Integer>(r.begin(), r.end()));
    if (e.rank() == m.cols()) break;
  }
  return e.rank();
}

/// mᵗm for an integer matrix.
inline IntMatrix gram_matrix(const IntMatrix& m) {
  IntMatrix g(m.cols(), m.cols(), Integer(0));
  for (std::size_t b = 0; b < m.rows(); ++b) {
    auto r = m.row(b);
    for (std::size_t i = 0; i < m.cols(); ++i) {
      if (r[i] == 0) continue;
      for (std::size_t j = i; j < m.cols(); ++j)
        if (r[j] != 0) mpz_addmul(g(i, j).get_mpz_t(), r[i].get_mpz_t(), r[j].get_mpz_t());
    }
  }
  for (std::size_t i = 0; i < m.cols(); ++i)
    for (std::size_t j = 0; j < i; ++j) g(i, j) = g(j, i);
  return g;
}

/// mᵗm for a small-integer matrix, accumulated in 64-bit arithmetic.
/// Entries must satisfy rows * max|entry|^2 < 2^63.
inline IntMatrix gram_matrix(const Matrix<std::int64_t>& m) {
  const std::size_t n = m.cols();
  std::vector<std::int64_t> acc(n * n, 0);
  std::vector<std::size_t> nz;
  for (std::size_t b = 0; b < m.rows(); ++b) {
    auto r = m.row(b);
    nz.clear();
    for (std::size_t i = 0; i < n; ++i)
      if (r[i] != 0) nz.push_back(i);
    for (std::size_t x = 0; x < nz.size(); ++x)
      for (std::size_t y = x; y < nz.size(); ++y) acc[nz[x] * n + nz[y]] += r[nz[x]] * r[nz[y]];
  }
  IntMatrix g(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      g(i, j) = to_integer(acc[i * n + j]);
      g(j, i) = g(i, j);
    }
  return g;
}

/// det(mᵗm), exactly. Throws RankDeficientError when the columns of `m`
/// are linearly dependent.
inline Integer gram_determinant(const IntMatrix& m) {
  Integer d = bareiss_determinant(gram_matrix(m));
  if (d == 0) {
    std::size_t r = rank(m.transpose());
    throw RankDeficientError("gram determinant: columns are linearly dependent (rank " +
                                 std::to_string(r) + " of " + std::to_string(m.cols()) + ")",
                             r);
  }
  return d;
}

}  // namespace regcomb
