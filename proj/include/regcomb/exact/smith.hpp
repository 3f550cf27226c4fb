#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "regcomb/exact/matrix.hpp"

namespace regcomb {

/// Smith normal form with unimodular certificates: left * m * right is
/// diagonal with entries divisors[0] | divisors[1] | ... (all positive),
/// padded with zeros.
struct SmithForm {
  std::vector<Integer> divisors;
  IntMatrix left;   // rows x rows
  IntMatrix right;  // cols x cols
};

namespace detail {

// Smallest nonzero |entry| in the trailing block starting at (t, t); ties
// broken by ascending row then column.
inline std::optional<std::pair<std::size_t, std::size_t>> smallest_pivot(const IntMatrix& a,
                                                                         std::size_t t) {
  std::optional<std::pair<std::size_t, std::size_t>> best;
  Integer best_abs;
  for (std::size_t i = t; i < a.rows(); ++i)
    for (std::size_t j = t; j < a.cols(); ++j) {
      if (a(i, j) == 0) continue;
      Integer v = abs(a(i, j));
      if (!best || v < best_abs) {
        best = {i, j};
        best_abs = v;
      }
    }
  return best;
}

inline void add_row_multiple(IntMatrix& m, std::size_t dst, std::size_t src, const Integer& f) {
  // m[dst] -= f * m[src]
  for (std::size_t j = 0; j < m.cols(); ++j)
    if (m(src, j) != 0) mpz_submul(m(dst, j).get_mpz_t(), f.get_mpz_t(), m(src, j).get_mpz_t());
}

inline void add_col_multiple(IntMatrix& m, std::size_t dst, std::size_t src, const Integer& f) {
  for (std::size_t i = 0; i < m.rows(); ++i)
    if (m(i, src) != 0) mpz_submul(m(i, dst).get_mpz_t(), f.get_mpz_t(), m(i, src).get_mpz_t());
}

}  // namespace detail

inline SmithForm smith_normal_form(const IntMatrix& m) {
  IntMatrix a = m;
  const std::size_t r = a.rows(), c = a.cols();
  SmithForm out{{}, IntMatrix::identity(r), IntMatrix::identity(c)};
  IntMatrix& u = out.left;
  IntMatrix& v = out.right;
  Integer q;

  for (std::size_t t = 0; t < std::min(r, c); ++t) {
    auto piv = detail::smallest_pivot(a, t);
    if (!piv) break;
    a.swap_rows(t, piv->first);
    u.swap_rows(t, piv->first);
    a.swap_cols(t, piv->second);
    v.swap_cols(t, piv->second);

    for (;;) {
      bool clean = true;
      for (std::size_t i = t + 1; i < r; ++i) {
        if (a(i, t) == 0) continue;
        mpz_tdiv_q(q.get_mpz_t(), a(i, t).get_mpz_t(), a(t, t).get_mpz_t());
        detail::add_row_multiple(a, i, t, q);
        detail::add_row_multiple(u, i, t, q);
        if (a(i, t) != 0) clean = false;
      }
      for (std::size_t j = t + 1; j < c; ++j) {
        if (a(t, j) == 0) continue;
        mpz_tdiv_q(q.get_mpz_t(), a(t, j).get_mpz_t(), a(t, t).get_mpz_t());
        detail::add_col_multiple(a, j, t, q);
        detail::add_col_multiple(v, j, t, q);
        if (a(t, j) != 0) clean = false;
      }
      if (!clean) {
        // A remainder smaller than the pivot survived: move the smallest
        // entry of row/column t onto the diagonal and repeat.
        std::size_t bi = t, bj = t;
        Integer best = abs(a(t, t));
        for (std::size_t i = t + 1; i < r; ++i) {
          if (a(i, t) != 0 && abs(a(i, t)) < best) {
            best = abs(a(i, t));
            bi = i;
            bj = t;
          }
        }
        for (std::size_t j = t + 1; j < c; ++j) {
          if (a(t, j) != 0 && abs(a(t, j)) < best) {
            best = abs(a(t, j));
            bi = t;
            bj = j;
          }
        }
        a.swap_rows(t, bi);
        u.swap_rows(t, bi);
        a.swap_cols(t, bj);
        v.swap_cols(t, bj);
        continue;
      }
      // Row and column are clear; enforce divisibility of the trailing block.
      std::optional<std::size_t> bad;
      for (std::size_t i = t + 1; i < r && !bad; ++i)
        for (std::size_t j = t + 1; j < c; ++j)
          if (!mpz_divisible_p(a(i, j).get_mpz_t(), a(t, t).get_mpz_t())) {
            bad = i;
            break;
          }
      if (!bad) break;
      // row t += row bad
      detail::add_row_multiple(a, t, *bad, Integer(-1));
      detail::add_row_multiple(u, t, *bad, Integer(-1));
    }
    if (a(t, t) < 0) {
      for (std::size_t j = 0; j < c; ++j) a(t, j) = -a(t, j);
      for (std::size_t j = 0; j < r; ++j) u(t, j) = -u(t, j);
    }
    out.divisors.push_back(a(t, t));
  }
  return out;
}

}  // namespace regcomb
