#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "regcomb/counting.hpp"
#include "regcomb/framework.hpp"

namespace regcomb {

/// t-(v,k,λ) designs: B is the family of k-subsets of [v] in colex order,
/// A the family of t-subsets, φ(b)_a = 1 iff a ⊆ b.
struct DesignParams {
  long v = 1;
  long k = 1;
  long t = 1;
};

using Subset = std::vector<long>;  // sorted, 1-based

inline void validate(const DesignParams& p) {
  if (p.t < 1 || p.k < p.t || p.v < p.k)
    throw DomainError("design parameters must satisfy 1 <= t <= k <= v");
}

inline void require_nontrivial(const DesignParams& p) {
  if (p.k > p.v - p.t)
    throw DomainError("k > v - t: every family of k-sets then satisfies the t-wise condition trivially, and the "
                      "t-subset indicators are dependent");
}

/// Colex rank of a sorted subset: Σ C(x_i − 1, i).
inline Row colex_rank(const Subset& s) {
  Row r = 0;
  for (std::size_t i = 0; i < s.size(); ++i) r += binomial_u64(s[i] - 1, static_cast<long>(i + 1));
  return r;
}

inline Subset colex_unrank(Row r, long k) {
  Subset s(static_cast<std::size_t>(k));
  for (long i = k; i >= 1; --i) {
    long x = i;  // largest x with C(x − 1, i) ≤ r
    while (binomial_u64(x, i) <= r) ++x;
    s[static_cast<std::size_t>(i - 1)] = x;
    r -= binomial_u64(x - 1, i);
  }
  return s;
}

/// Calls fn on each size-m subset of `items` (kept in the given order).
template <typename Fn>
void for_each_sub(const Subset& items, long m, Fn&& fn) {
  const long n = static_cast<long>(items.size());
  if (m > n || m < 0) return;
  std::vector<long> idx(static_cast<std::size_t>(m));
  for (long i = 0; i < m; ++i) idx[static_cast<std::size_t>(i)] = i;
  Subset cur(static_cast<std::size_t>(m));
  for (;;) {
    for (long i = 0; i < m; ++i) cur[static_cast<std::size_t>(i)] = items[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])];
    fn(cur);
    long j = m - 1;
    while (j >= 0 && idx[static_cast<std::size_t>(j)] == n - m + j) --j;
    if (j < 0) return;
    ++idx[static_cast<std::size_t>(j)];
    for (long i = j + 1; i < m; ++i) idx[static_cast<std::size_t>(i)] = idx[static_cast<std::size_t>(i - 1)] + 1;
  }
}

inline Subset iota_set(long v) {
  Subset s(static_cast<std::size_t>(v));
  for (long i = 0; i < v; ++i) s[static_cast<std::size_t>(i)] = i + 1;
  return s;
}

inline std::string subset_string(const Subset& s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) out += (i ? "," : "") + std::to_string(s[i]);
  return out;
}

inline Subset parse_subset(const std::string& text) {
  Subset s;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find(',', start);
    if (end == std::string::npos) end = text.size();
    std::size_t pos = 0;
    std::string tok = text.substr(start, end - start);
    long x = std::stol(tok, &pos);
    if (pos != tok.size()) throw DomainError("bad block element: " + tok);
    s.push_back(x);
    start = end + 1;
  }
  std::sort(s.begin(), s.end());
  return s;
}

inline void check_block(const DesignParams& p, const Subset& b) {
  if (static_cast<long>(b.size()) != p.k) throw DomainError("block " + subset_string(b) + " is not a k-subset");
  for (std::size_t i = 0; i < b.size(); ++i)
    if (b[i] < 1 || b[i] > p.v || (i && b[i] == b[i - 1]))
      throw DomainError("block " + subset_string(b) + " is not a k-subset of [v]");
}

inline FeatureMap design_feature_map(const DesignParams& p, const Limits& lim = {}) {
  validate(p);
  require_nontrivial(p);
  const Integer nb = binomial(p.v, p.k), na = binomial(p.v, p.t);
  check_map_size(nb, na, lim);
  Matrix<std::int64_t> phi(nb.get_ui(), na.get_ui(), 0);
  for (Row b = 0; b < phi.rows(); ++b)
    for_each_sub(colex_unrank(b, p.k), p.t, [&](const Subset& a) { phi(b, colex_rank(a)) = 1; });
  std::vector<std::string> labels;
  for (Row a = 0; a < phi.cols(); ++a) labels.push_back("{" + subset_string(colex_unrank(a, p.t)) + "}");
  FeatureMap fm(std::move(phi), std::move(labels), 1, "design", {{"v", p.v}, {"k", p.k}, {"t", p.t}});
  fm.set_codec({[p](Row r) { return subset_string(colex_unrank(r, p.k)); },
                [p](const std::string& s) {
                  Subset b = parse_subset(s);
                  check_block(p, b);
                  return colex_rank(b);
                }});
  // Relabeling of [v] that sends block `from` onto block `to` in order and
  // the complements onto each other in order.
  fm.set_symmetry([p, n = nb.get_ui()](Row from, Row to) {
    Subset f = colex_unrank(from, p.k), g = colex_unrank(to, p.k);
    std::vector<long> sigma(static_cast<std::size_t>(p.v + 1));
    Subset fc, gc;
    for (long x = 1; x <= p.v; ++x) {
      if (!std::binary_search(f.begin(), f.end(), x)) fc.push_back(x);
      if (!std::binary_search(g.begin(), g.end(), x)) gc.push_back(x);
    }
    for (std::size_t i = 0; i < f.size(); ++i) sigma[static_cast<std::size_t>(f[i])] = g[i];
    for (std::size_t i = 0; i < fc.size(); ++i) sigma[static_cast<std::size_t>(fc[i])] = gc[i];
    Permutation pi(n);
    for (Row b = 0; b < n; ++b) {
      Subset s = colex_unrank(b, p.k);
      for (auto& x : s) x = sigma[static_cast<std::size_t>(x)];
      std::sort(s.begin(), s.end());
      pi[b] = colex_rank(s);
    }
    return pi;
  });
  return fm;
}

/// λ_s = C(k,s)/C(v,s)·N for 0 ≤ s ≤ t.
inline std::vector<Rational> lambda_profile(const DesignParams& p, const Integer& n) {
  std::vector<Rational> out;
  for (long s = 0; s <= p.t; ++s) {
    Rational l(binomial(p.k, s) * n, binomial(p.v, s));
    l.canonicalize();
    out.push_back(l);
  }
  return out;
}

struct DesignCheck {
  bool is_design = false;
  std::vector<Rational> lambda;
};

/// Direct coverage check of every t-subset.
inline DesignCheck is_design(const DesignParams& p, const std::vector<Subset>& blocks) {
  validate(p);
  for (const auto& b : blocks) check_block(p, b);
  DesignCheck res;
  res.lambda = lambda_profile(p, Integer(static_cast<unsigned long>(blocks.size())));
  std::vector<Subset> sorted = blocks;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) throw DomainError("repeated block");
  const Rational& lt = res.lambda.back();
  if (!is_integral(lt)) return res;
  std::vector<std::uint64_t> cover(binomial_u64(p.v, p.t), 0);
  for (const auto& b : blocks) for_each_sub(b, p.t, [&](const Subset& a) { ++cover[colex_rank(a)]; });
  const auto want = lt.get_num().get_ui();
  res.is_design = std::all_of(cover.begin(), cover.end(), [&](std::uint64_t c) { return c == want; });
  return res;
}

inline DesignCheck is_design(const DesignParams& p, const Structure& t) {
  std::vector<Subset> blocks;
  for (Row r : t.members()) {
    if (Integer(static_cast<unsigned long>(r)) >= binomial(p.v, p.k)) throw DomainError("block index out of range");
    blocks.push_back(colex_unrank(r, p.k));
  }
  return is_design(p, blocks);
}

/// Least c₁ with C(v,s) | C(k,s)·c₁ for 1 ≤ s ≤ t.
inline Integer design_divisibility(const DesignParams& p) {
  validate(p);
  Integer c = 1;
  for (long s = 1; s <= p.t; ++s) {
    Integer vs = binomial(p.v, s);
    c = lcm(c, Integer(vs / gcd(vs, binomial(p.k, s))));
  }
  return c;
}

/// lcm{C(t,s) : 0 ≤ s ≤ t}.
inline Integer lcm_binomials(long t) {
  if (t < 0) throw DomainError("lcm_binomials needs t >= 0");
  Integer c = 1;
  for (long s = 0; s <= t; ++s) c = lcm(c, binomial(t, s));
  return c;
}

/// u = a ∪ {k smallest elements of [v] ∖ a}.
inline Subset canonical_u(const DesignParams& p, const Subset& a) {
  Subset u = a;
  for (long x = 1; x <= p.v && static_cast<long>(u.size()) < p.k + p.t; ++x)
    if (!std::binary_search(a.begin(), a.end(), x)) u.push_back(x);
  std::sort(u.begin(), u.end());
  if (static_cast<long>(u.size()) != p.k + p.t) throw DomainError("no (k+t)-subset available: need k <= v - t");
  return u;
}

namespace detail {

inline void check_decoding_args(const DesignParams& p, const Subset& a, const Subset& u) {
  validate(p);
  require_nontrivial(p);
  if (static_cast<long>(a.size()) != p.t || static_cast<long>(u.size()) != p.k + p.t)
    throw DomainError("a must be a t-subset and u a (k+t)-subset");
  if (!std::includes(u.begin(), u.end(), a.begin(), a.end())) throw DomainError("u does not contain a");
  for (long x : u)
    if (x < 1 || x > p.v) throw DomainError("u is not a subset of [v]");
}

inline long intersection_size(const Subset& a, const Subset& b) {
  long s = 0;
  for (long x : a) s += std::binary_search(b.begin(), b.end(), x);
  return s;
}

}  // namespace detail

/// γ_{a,u} with coefficient (−1)^{t−s} s!(k−s−1)!/(k−t−1)! on each
/// b ⊆ u, s = |a ∩ b|; φ(γ_{a,u}) = k!/(k−t)!·e_a. Requires k > t.
inline std::vector<Integer> design_gamma(const DesignParams& p, const Subset& a, const Subset& u) {
  detail::check_decoding_args(p, a, u);
  if (p.k == p.t) throw DomainError("γ_{a,u} is undefined for k = t");
  std::vector<Integer> g(binomial_u64(p.v, p.k), 0);
  for_each_sub(u, p.k, [&](const Subset& b) {
    long s = detail::intersection_size(a, b);
    Integer c = factorial(s) * factorial(p.k - s - 1) / factorial(p.k - p.t - 1);
    g[colex_rank(b)] = (p.t - s) % 2 ? Integer(-c) : c;
  });
  return g;
}

/// γ′_{a,u} = lcm(t)/t!·γ_{a,u}, an integer vector with
/// φ(γ′) = C(k,t)·lcm(t)·e_a.
inline std::vector<Integer> design_decoding_vectors(const DesignParams& p, const Subset& a, const Subset& u) {
  detail::check_decoding_args(p, a, u);
  const Integer l = lcm_binomials(p.t);
  std::vector<Integer> g(binomial_u64(p.v, p.k), 0);
  if (p.k == p.t) {
    g[colex_rank(a)] = l;
    return g;
  }
  for_each_sub(u, p.k, [&](const Subset& b) {
    long s = detail::intersection_size(a, b);
    Integer c = binomial(p.k - s - 1, p.t - s) * l / binomial(p.t, s);
    g[colex_rank(b)] = (p.t - s) % 2 ? Integer(-c) : c;
  });
  return g;
}

/// Certificate with m = C(k,t)·lcm(t) using canonical u for every a.
inline DecodingCertificate design_certificate(const DesignParams& p) {
  validate(p);
  require_nontrivial(p);
  DecodingCertificate cert;
  cert.multiplier = binomial(p.k, p.t) * lcm_binomials(p.t);
  cert.c4 = ipow(8, static_cast<unsigned long>(p.t)) * binomial(p.k, p.t);
  const Row na = binomial_u64(p.v, p.t);
  for (Row r = 0; r < na; ++r) {
    Subset a = colex_unrank(r, p.t);
    cert.gammas.push_back(design_decoding_vectors(p, a, canonical_u(p, a)));
  }
  return cert;
}

namespace detail {
// C(v,s) − C(v,s−1), with C(v,−1) = 0.
inline unsigned long design_multiplicity(const DesignParams& p, long s) {
  Integer m = binomial(p.v, s) - binomial(p.v, s - 1);
  return m.get_ui();
}
}  // namespace detail

/// ρ² = ∏_{s=0}^t [C(k−s,t−s)/C(v−t−s,k−t)]^{C(v,s)−C(v,s−1)}.
inline Rational design_rho_squared(const DesignParams& p) {
  validate(p);
  require_nontrivial(p);
  Rational r = 1;
  for (long s = 0; s <= p.t; ++s) {
    Rational f(binomial(p.k - s, p.t - s), binomial(p.v - p.t - s, p.k - p.t));
    f.canonicalize();
    r *= rpow(f, detail::design_multiplicity(p, s));
  }
  return r;
}

/// det(φᵗφ) = ∏_s [C(k−s,t−s)·C(v−t−s,k−t)]^{C(v,s)−C(v,s−1)}.
inline Integer design_gram_det(const DesignParams& p) {
  validate(p);
  require_nontrivial(p);
  Integer d = 1;
  for (long s = 0; s <= p.t; ++s)
    d *= ipow(binomial(p.k - s, p.t - s) * binomial(p.v - p.t - s, p.k - p.t), detail::design_multiplicity(p, s));
  return d;
}

/// det 𝓛(φ) = ∏_s C(k−s,t−s)^{C(v,s)−C(v,s−1)}.
inline Integer design_lattice_det(const DesignParams& p) {
  validate(p);
  require_nontrivial(p);
  Integer d = 1;
  for (long s = 0; s <= p.t; ++s) d *= ipow(binomial(p.k - s, p.t - s), detail::design_multiplicity(p, s));
  return d;
}

inline CountResult design_count(const DesignParams& p, const Integer& n, const Real& c) {
  validate(p);
  require_nontrivial(p);
  const Integer ground = binomial(p.v, p.k);
  if (auto r = trivial_count(n, ground)) return *r;
  CountResult r;
  r.p = Rational(n, ground);
  r.p.canonicalize();
  auto lambda = lambda_profile(p, n);
  for (long s = 1; s <= p.t; ++s)
    if (!is_integral(lambda[static_cast<std::size_t>(s)])) {
      r.exact = 0;
      r.reason = "lambda_" + std::to_string(s) + " = " + lambda[static_cast<std::size_t>(s)].get_str() +
                 " is not an integer";
      return r;
    }
  r.log_main = log_main_term(design_rho_squared(p), binomial(p.v, p.t), n, ground);
  r.delta_bound = delta_bound(c * p.v / p.t, c, p.t, n, ground);
  return r;
}

/// d-regular k-uniform hypergraphs on n vertices (1-(n,k,d) designs).
inline CountResult hypergraph_count(long n, long k, long d, const Real& c) {
  if (n < 2 || k < 1 || k > n) throw DomainError("hypergraph needs n >= 2 and 1 <= k <= n");
  if (d < 1 || Integer(d) > binomial(n - 1, k - 1)) throw DomainError("degree must satisfy 1 <= d <= C(n-1,k-1)");
  CountResult r;
  if ((n * d) % k != 0) {
    r.exact = 0;
    r.reason = "n*d is not divisible by k";
    return r;
  }
  const Integer edges = n * d / k;
  const Integer ground = binomial(n, k);
  if (auto t = trivial_count(edges, ground)) return *t;
  r.p = Rational(edges, ground);
  r.p.canonicalize();
  Rational pq = r.p * (1 - r.p);
  r.log_main = (real_log(Rational(Integer(k), binomial(n - 1, k - 1))) -
                to_real(Integer(n - 1)) * real_log(binomial(n - 2, k - 1))) /
                   2 -
               Real(n) / 2 * boost::multiprecision::log(2 * real_pi() * to_real(pq)) -
               to_real(edges) * real_log(r.p) - to_real(Integer(ground - edges)) * real_log(Rational(1 - r.p));
  Integer m = edges < ground - edges ? edges : Integer(ground - edges);
  r.delta_bound = boost::multiprecision::pow(Real(n), c) / boost::multiprecision::sqrt(to_real(m));
  return r;
}

}  // namespace regcomb
