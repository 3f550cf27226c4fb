#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "regcomb/exact/determinant.hpp"
#include "regcomb/exact/matrix.hpp"
#include "regcomb/exact/smith.hpp"

namespace regcomb {

/// Full-rank integer lattice in Q^d.
///
/// The canonical basis is row-style lower triangular: row i is zero past
/// column i, has a positive pivot at column i, and its entries left of the
/// diagonal are reduced into [0, pivot of that column). Two lattices are
/// equal iff their Hermite bases are equal.
class IntegerLattice {
 public:
  IntegerLattice(IntMatrix generators, IntMatrix hermite, std::vector<Integer> snf)
      : generators_(std::move(generators)), hermite_(std::move(hermite)), snf_(std::move(snf)) {}

  std::size_t dim() const noexcept { return hermite_.cols(); }
  const IntMatrix& generators() const noexcept { return generators_; }
  const IntMatrix& hermite_basis() const noexcept { return hermite_; }
  const std::vector<Integer>& snf_diagonal() const noexcept { return snf_; }

  /// Covolume, the product of the Hermite diagonal.
  Integer det() const {
    Integer d = 1;
    for (std::size_t i = 0; i < dim(); ++i) d *= hermite_(i, i);
    return d;
  }

  friend bool operator==(const IntegerLattice& a, const IntegerLattice& b) {
    return a.hermite_ == b.hermite_;
  }

 private:
  IntMatrix generators_;
  IntMatrix hermite_;
  std::vector<Integer> snf_;
};

namespace detail {

// Incremental Hermite basis builder. Rows are stored by pivot column.
class HermiteBuilder {
 public:
  explicit HermiteBuilder(std::size_t dim) : dim_(dim), rows_(dim) {}

  std::size_t rank() const {
    std::size_t r = 0;
    for (const auto& row : rows_) r += row.has_value();
    return r;
  }

  // Full rank with unit diagonal means the lattice is all of Z^d, so further
  // generators cannot change it.
  bool is_standard() const {
    for (std::size_t j = 0; j < dim_; ++j)
      if (!rows_[j] || (*rows_[j])[j] != 1) return false;
    return true;
  }

  void insert(std::vector<Integer> v) {
    Integer g, x, y, a_g, b_g, tmp;
    for (std::size_t jj = dim_; jj-- > 0;) {
      if (v[jj] == 0) continue;
      if (!rows_[jj]) {
        if (v[jj] < 0)
          for (auto& e : v) e = -e;
        rows_[jj] = std::move(v);
        reduce_row(jj);
        return;
      }
      auto& h = *rows_[jj];
      if (mpz_divisible_p(v[jj].get_mpz_t(), h[jj].get_mpz_t())) {
        mpz_divexact(tmp.get_mpz_t(), v[jj].get_mpz_t(), h[jj].get_mpz_t());
        for (std::size_t k = 0; k <= jj; ++k)
          if (h[k] != 0) mpz_submul(v[k].get_mpz_t(), tmp.get_mpz_t(), h[k].get_mpz_t());
        continue;
      }
      // Unimodular 2x2 combination: h' = x h + y v, v' = (a/g) v - (b/g) h.
      mpz_gcdext(g.get_mpz_t(), x.get_mpz_t(), y.get_mpz_t(), h[jj].get_mpz_t(), v[jj].get_mpz_t());
      mpz_divexact(a_g.get_mpz_t(), h[jj].get_mpz_t(), g.get_mpz_t());
      mpz_divexact(b_g.get_mpz_t(), v[jj].get_mpz_t(), g.get_mpz_t());
      for (std::size_t k = 0; k <= jj; ++k) {
        Integer nh = x * h[k] + y * v[k];
        Integer nv = a_g * v[k] - b_g * h[k];
        h[k] = std::move(nh);
        v[k] = std::move(nv);
      }
      if (h[jj] < 0)
        for (auto& e : h) e = -e;
      reduce_row(jj);
    }
  }

  // Reduces every row's off-diagonal entries into [0, pivot).
  void finalize() {
    for (std::size_t i = 0; i < dim_; ++i)
      if (rows_[i]) reduce_row(i);
  }

  std::vector<std::optional<std::vector<Integer>>>& rows() { return rows_; }

 private:
  void reduce_row(std::size_t i) {
    auto& r = *rows_[i];
    Integer q;
    for (std::size_t k = i; k-- > 0;) {
      if (!rows_[k] || r[k] == 0) continue;
      const auto& h = *rows_[k];
      mpz_fdiv_q(q.get_mpz_t(), r[k].get_mpz_t(), h[k].get_mpz_t());
      if (q == 0) continue;
      for (std::size_t m = 0; m <= k; ++m)
        if (h[m] != 0) mpz_submul(r[m].get_mpz_t(), q.get_mpz_t(), h[m].get_mpz_t());
    }
  }

  std::size_t dim_;
  std::vector<std::optional<std::vector<Integer>>> rows_;
};

}  // namespace detail

/// Lattice spanned by the rows of `g`. Throws RankDeficientError naming
/// the rank found when the rows do not span Q^cols.
inline IntegerLattice lattice_from_generators(const IntMatrix& g) {
  const std::size_t d = g.cols();
  if (d == 0) throw DomainError("lattice of dimension zero");
  detail::HermiteBuilder hb(d);
  for (std::size_t i = 0; i < g.rows(); ++i) {
    auto r = g.row(i);
    hb.insert(std::vector<Integer>(r.begin(), r.end()));
    if (hb.is_standard()) break;
  }
  const std::size_t rk = hb.rank();
  if (rk < d)
    throw RankDeficientError("lattice generators are rank deficient: rank " + std::to_string(rk) +
                                 " in dimension " + std::to_string(d),
                             rk);
  // Rows reduced before a later pivot change may be stale.
  hb.finalize();
  IntMatrix h(d, d, Integer(0));
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t k = 0; k <= i; ++k) h(i, k) = (*hb.rows()[i])[k];
  std::vector<Integer> snf = smith_normal_form(h).divisors;
  return IntegerLattice(g, std::move(h), std::move(snf));
}

/// Coefficients x with x·H = v, where H is the Hermite basis.
inline std::vector<Rational> lattice_coordinates(std::span<const Rational> v, const IntegerLattice& L) {
  const std::size_t d = L.dim();
  if (v.size() != d) throw DomainError("vector dimension does not match lattice");
  const IntMatrix& h = L.hermite_basis();
  std::vector<Rational> x(d);
  for (std::size_t j = d; j-- > 0;) {
    Rational s = v[j];
    for (std::size_t i = j + 1; i < d; ++i)
      if (h(i, j) != 0) s -= x[i] * h(i, j);
    x[j] = s / h(j, j);
  }
  return x;
}

/// Least positive N with N·v in L.
inline Integer minimal_multiplier(std::span<const Rational> v, const IntegerLattice& L) {
  Integer m = 1;
  for (const auto& c : lattice_coordinates(v, L)) m = lcm(m, c.get_den());
  return m;
}

inline bool lattice_membership(std::span<const Rational> v, const IntegerLattice& L) {
  return minimal_multiplier(v, L) == 1;
}

/// Basis of the dual lattice {θ : <θ, λ> ∈ Z for all λ ∈ L}: the rows of
/// (H^{-1})ᵗ, so row i pairs to δ_ij with Hermite row j.
inline RatMatrix dual_basis(const IntegerLattice& L) {
  const std::size_t d = L.dim();
  const IntMatrix& h = L.hermite_basis();
  // Solve H X = I column by column; H is lower triangular.
  RatMatrix inv(d, d, Rational(0));
  for (std::size_t c = 0; c < d; ++c) {
    for (std::size_t i = 0; i < d; ++i) {
      Rational s = (i == c) ? Rational(1) : Rational(0);
      for (std::size_t k = 0; k < i; ++k)
        if (h(i, k) != 0) s -= h(i, k) * inv(k, c);
      inv(i, c) = s / h(i, i);
    }
  }
  return inv.transpose();
}

}  // namespace regcomb
