#pragma once

#include <string>
#include <vector>

#include "regcomb/counting.hpp"
#include "regcomb/framework.hpp"

namespace regcomb {

/// Orthogonal arrays over the alphabet [q] = {1..q} of length n and
/// strength t. Internally symbol q is the one left out of the basis; the
/// external encoding uses digits 0..q-1 (digit d is symbol d+1).
struct OAParams {
  long q = 2;
  long n = 1;
  long t = 1;
};

inline void validate(const OAParams& p) {
  if (p.q < 2) throw DomainError("OA alphabet size q must be at least 2");
  if (p.n < 1) throw DomainError("OA length n must be at least 1");
  if (p.t < 0 || p.t > p.n) throw DomainError("OA strength t must satisfy 0 <= t <= n");
}

/// Column index (I, v): I ⊆ [n] sorted (1-based), v ∈ [q−1]^I.
struct OAIndex {
  std::vector<long> I;
  std::vector<long> v;
  friend bool operator==(const OAIndex&, const OAIndex&) = default;
};

inline std::string label(const OAIndex& a) {
  std::string s = "{";
  for (std::size_t i = 0; i < a.I.size(); ++i) s += (i ? "," : "") + std::to_string(a.I[i]);
  s += "}:";
  for (std::size_t i = 0; i < a.v.size(); ++i) s += (i ? "," : "") + std::to_string(a.v[i]);
  return s;
}

inline Integer oa_ground_size(const OAParams& p) { return ipow(Integer(p.q), static_cast<unsigned long>(p.n)); }

/// |A| = Σ_{i≤t} C(n,i)(q−1)^i.
inline Integer oa_dim(const OAParams& p) {
  Integer d = 0;
  for (long i = 0; i <= p.t; ++i) d += binomial(p.n, i) * ipow(Integer(p.q - 1), static_cast<unsigned long>(i));
  return d;
}

/// All column indices ordered by (|I|, I lex, v lex).
inline std::vector<OAIndex> oa_indices(const OAParams& p) {
  validate(p);
  std::vector<OAIndex> out;
  for (long s = 0; s <= p.t; ++s) {
    std::vector<long> I(static_cast<std::size_t>(s));
    for (long i = 0; i < s; ++i) I[static_cast<std::size_t>(i)] = i + 1;
    for (;;) {
      std::vector<long> v(static_cast<std::size_t>(s), 1);
      for (;;) {
        out.push_back({I, v});
        long j = s - 1;
        while (j >= 0 && v[static_cast<std::size_t>(j)] == p.q - 1) v[static_cast<std::size_t>(j--)] = 1;
        if (j < 0) break;
        ++v[static_cast<std::size_t>(j)];
      }
      long j = s - 1;
      while (j >= 0 && I[static_cast<std::size_t>(j)] == p.n - s + j + 1) --j;
      if (j < 0) break;
      ++I[static_cast<std::size_t>(j)];
      for (long k = j + 1; k < s; ++k) I[static_cast<std::size_t>(k)] = I[static_cast<std::size_t>(k - 1)] + 1;
    }
  }
  return out;
}

/// Internal symbols (1..q) of row r; rows are in lexicographic order.
inline std::vector<long> oa_row_symbols(const OAParams& p, Row r) {
  std::vector<long> x(static_cast<std::size_t>(p.n));
  for (long i = p.n; i-- > 0;) {
    x[static_cast<std::size_t>(i)] = static_cast<long>(r % static_cast<Row>(p.q)) + 1;
    r /= static_cast<Row>(p.q);
  }
  return x;
}

inline Row oa_row_index(const OAParams& p, const std::vector<long>& symbols) {
  if (symbols.size() != static_cast<std::size_t>(p.n)) throw DomainError("OA word has wrong length");
  Row r = 0;
  for (long s : symbols) {
    if (s < 1 || s > p.q) throw DomainError("OA symbol out of range");
    r = r * static_cast<Row>(p.q) + static_cast<Row>(s - 1);
  }
  return r;
}

/// External form: digits 0..q−1, comma-separated when q > 10.
inline std::string oa_encode(const OAParams& p, Row r) {
  std::string s;
  auto x = oa_row_symbols(p, r);
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (p.q > 10) s += (i ? "," : "") + std::to_string(x[i] - 1);
    else s += static_cast<char>('0' + x[i] - 1);
  }
  return s;
}

inline Row oa_decode(const OAParams& p, const std::string& s) {
  std::vector<long> x;
  if (p.q > 10 || s.find(',') != std::string::npos) {
    std::size_t start = 0;
    while (start <= s.size()) {
      std::size_t end = s.find(',', start);
      if (end == std::string::npos) end = s.size();
      x.push_back(std::stol(s.substr(start, end - start)) + 1);
      start = end + 1;
    }
  } else {
    for (char c : s) {
      if (c < '0' || c > '9') throw DomainError("bad OA word: " + s);
      x.push_back(c - '0' + 1);
    }
  }
  return oa_row_index(p, x);
}

inline FeatureMap oa_feature_map(const OAParams& p, const Limits& lim = {}) {
  validate(p);
  check_map_size(oa_ground_size(p), oa_dim(p), lim);
  const auto idx = oa_indices(p);
  const Row nb = oa_ground_size(p).get_ui();
  Matrix<std::int64_t> phi(nb, idx.size(), 0);
  std::vector<std::string> labels;
  for (const auto& a : idx) labels.push_back(label(a));
  for (Row b = 0; b < nb; ++b) {
    auto x = oa_row_symbols(p, b);
    for (std::size_t c = 0; c < idx.size(); ++c) {
      bool hit = true;
      for (std::size_t i = 0; i < idx[c].I.size() && hit; ++i)
        hit = x[static_cast<std::size_t>(idx[c].I[i] - 1)] == idx[c].v[i];
      phi(b, c) = hit;
    }
  }
  FeatureMap fm(std::move(phi), std::move(labels), 1, "oa", {{"q", p.q}, {"n", p.n}, {"t", p.t}});
  fm.set_codec({[p](Row r) { return oa_encode(p, r); }, [p](const std::string& s) { return oa_decode(p, s); }});
  // Translation x ↦ x + (to − from) mod q.
  fm.set_symmetry([p, nb](Row from, Row to) {
    auto xf = oa_row_symbols(p, from), xt = oa_row_symbols(p, to);
    Permutation pi(nb);
    for (Row b = 0; b < nb; ++b) {
      auto x = oa_row_symbols(p, b);
      for (std::size_t i = 0; i < x.size(); ++i) x[i] = ((x[i] - 1 + xt[i] - xf[i]) % p.q + p.q) % p.q + 1;
      pi[b] = oa_row_index(p, x);
    }
    return pi;
  });
  return fm;
}

/// Direct strength check: every t-coordinate pattern appears |T|/q^t times.
inline bool oa_is_array(const OAParams& p, const Structure& t) {
  validate(p);
  const Integer nb = oa_ground_size(p);
  if (!t.members().empty() && Integer(static_cast<unsigned long>(t.members().back())) >= nb)
    throw DomainError("OA word out of range");
  const Integer qt = ipow(Integer(p.q), static_cast<unsigned long>(p.t));
  if (!mpz_divisible_p(Integer(static_cast<unsigned long>(t.size())).get_mpz_t(), qt.get_mpz_t())) return false;
  const std::size_t lambda = t.size() / qt.get_ui();
  std::vector<std::vector<long>> words;
  for (Row r : t.members()) words.push_back(oa_row_symbols(p, r));
  std::vector<long> cols(static_cast<std::size_t>(p.t));
  for (long i = 0; i < p.t; ++i) cols[static_cast<std::size_t>(i)] = i;
  std::vector<std::size_t> hits(qt.get_ui());
  for (;;) {
    std::fill(hits.begin(), hits.end(), 0);
    for (const auto& w : words) {
      std::size_t code = 0;
      for (long c : cols) code = code * static_cast<std::size_t>(p.q) + static_cast<std::size_t>(w[static_cast<std::size_t>(c)] - 1);
      ++hits[code];
    }
    for (auto h : hits)
      if (h != lambda) return false;
    long j = p.t - 1;
    while (j >= 0 && cols[static_cast<std::size_t>(j)] == p.n - p.t + j) --j;
    if (j < 0) return true;
    ++cols[static_cast<std::size_t>(j)];
    for (long k = j + 1; k < p.t; ++k) cols[static_cast<std::size_t>(k)] = cols[static_cast<std::size_t>(k - 1)] + 1;
  }
}

/// m = 1 certificate: γ^{(I,v)} = Σ_{J⊆I} (−1)^{|I|−|J|} u^{b(J)}, where b(J)
/// agrees with v on J and is q elsewhere.
inline DecodingCertificate oa_decoding_vectors(const OAParams& p, const Limits& lim = {}) {
  validate(p);
  check_map_size(oa_ground_size(p), oa_dim(p), lim);
  const Row nb = oa_ground_size(p).get_ui();
  DecodingCertificate cert;
  cert.multiplier = 1;
  cert.c4 = ipow(Integer(2), static_cast<unsigned long>(p.t));
  for (const auto& a : oa_indices(p)) {
    std::vector<Integer> g(nb, 0);
    const std::size_t s = a.I.size();
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << s); ++mask) {
      std::vector<long> x(static_cast<std::size_t>(p.n), p.q);
      int bits = 0;
      for (std::size_t i = 0; i < s; ++i)
        if (mask >> i & 1) {
          x[static_cast<std::size_t>(a.I[i] - 1)] = a.v[i];
          ++bits;
        }
      g[oa_row_index(p, x)] += ((s - bits) % 2) ? -1 : 1;
    }
    cert.gammas.push_back(std::move(g));
  }
  return cert;
}

/// log_q det(φᵗφ) = n·C(n−1,t)(q−1)^t.
inline Integer oa_gram_exponent(long q, long n, long t) {
  return n * binomial(n - 1, t) * ipow(Integer(q - 1), static_cast<unsigned long>(t));
}

inline Integer oa_gram_det(const OAParams& p) {
  validate(p);
  return ipow(Integer(p.q), oa_gram_exponent(p.q, p.n, p.t).get_ui());
}

/// Checks a_{n,t} = a_{n−1,t} + d_{n−1,t} + (q−1)a_{n−1,t−1} − d_{n−1,t−1}
/// for every n > t > 0 with n ≤ n_max, where a is the closed form.
inline bool oa_recursion_holds(long q, long n_max) {
  auto d = [q](long n, long t) { return oa_dim({q, n, t}); };
  for (long n = 2; n <= n_max; ++n)
    for (long t = 1; t < n; ++t) {
      Integer rhs = oa_gram_exponent(q, n - 1, t) + d(n - 1, t) + (q - 1) * oa_gram_exponent(q, n - 1, t - 1) -
                    d(n - 1, t - 1);
      if (rhs != oa_gram_exponent(q, n, t)) return false;
    }
  return true;
}

/// Closed form, cross-checked against the direct Gram determinant.
inline Integer oa_gram_det_checked(const OAParams& p, const Limits& lim = {}) {
  Integer closed = oa_gram_det(p);
  Integer direct = feature_gram_determinant(oa_feature_map(p, lim));
  if (direct != closed)
    throw Error("OA Gram determinant mismatch: direct " + direct.get_str() + " vs closed form " + closed.get_str());
  return closed;
}

inline CountResult oa_count(const OAParams& p, const Integer& n, const Real& c) {
  validate(p);
  if (p.t < 1) throw DomainError("OA counting formula needs t >= 1");
  const Integer ground = oa_ground_size(p);
  if (auto r = trivial_count(n, ground)) return *r;
  CountResult r;
  r.p = Rational(n, ground);
  r.p.canonicalize();
  const Integer qt = ipow(Integer(p.q), static_cast<unsigned long>(p.t));
  if (!mpz_divisible_p(n.get_mpz_t(), qt.get_mpz_t())) {
    r.exact = 0;
    r.reason = "N is not a multiple of q^t = " + qt.get_str();
    return r;
  }
  // ρ² = q^{−n·C(n−1,t)(q−1)^t} since the lattice is Z^A.
  const Real half_exp = to_real(oa_gram_exponent(p.q, p.n, p.t)) / 2;
  Rational pq = r.p * (1 - r.p);
  r.log_main = -half_exp * boost::multiprecision::log(Real(p.q)) -
               to_real(oa_dim(p)) / 2 * boost::multiprecision::log(2 * real_pi() * to_real(pq)) -
               to_real(n) * real_log(r.p) - to_real(Integer(ground - n)) * real_log(Rational(1 - r.p));
  r.delta_bound = delta_bound(c * p.q * p.n / p.t, c, p.t, n, ground);
  return r;
}

}  // namespace regcomb
