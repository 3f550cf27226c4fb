#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "regcomb/counting.hpp"
#include "regcomb/framework.hpp"

namespace regcomb {

/// X = Σ_b T_b φ(b) with independent T_b ~ Bernoulli(p).
struct WalkSpec {
  const FeatureMap& fm;
  Rational p;
};

inline void validate(const WalkSpec& w) {
  if (w.p <= 0 || w.p >= 1) throw DomainError("inclusion probability p must lie in (0,1)");
}

/// φ ≡ 1 on m elements: X is Binomial(m, p).
inline FeatureMap constant_feature_map(std::size_t m) {
  if (m == 0) throw DomainError("constants-only map needs m >= 1");
  FeatureMap fm(Matrix<std::int64_t>(m, 1, 1), {"1"}, 1, "const", {{"m", m}});
  fm.set_symmetry([m](Row from, Row to) {
    Permutation pi(m);
    std::iota(pi.begin(), pi.end(), Row{0});
    std::swap(pi[from], pi[to]);
    return pi;
  });
  return fm;
}

using Point = std::vector<std::int64_t>;
using ExactDistribution = std::map<Point, Rational>;

struct WalkMoments {
  std::vector<Rational> mean;  // p·Σ_b φ(b)
  RatMatrix covariance;        // p(1−p)·φᵗφ
};

inline WalkMoments walk_moments(const WalkSpec& w) {
  validate(w);
  WalkMoments m;
  for (auto s : w.fm.column_sum()) m.mean.push_back(w.p * Rational(to_integer(s)));
  m.covariance = to_rational_matrix(feature_gram(w.fm));
  const Rational v = w.p * (1 - w.p);
  for (std::size_t i = 0; i < m.covariance.rows(); ++i)
    for (std::size_t j = 0; j < m.covariance.cols(); ++j) m.covariance(i, j) *= v;
  return m;
}

/// Upper estimate of the support size: min(2^|B|, ∏_a (Σ_b |φ(b)_a| + 1)).
inline double dp_state_estimate(const FeatureMap& fm) {
  double prod = 1;
  for (std::size_t a = 0; a < fm.dim(); ++a) {
    double s = 1;
    for (std::size_t b = 0; b < fm.size(); ++b) s += static_cast<double>(std::llabs(fm[b][a]));
    prod *= s;
  }
  return std::min(prod, std::pow(2.0, static_cast<double>(fm.size())));
}

/// Exact law of X by convolving the point masses {0: 1−p, φ(b): p} in row
/// order.
inline ExactDistribution exact_distribution(const WalkSpec& w, const Limits& lim = {}) {
  validate(w);
  const double est = dp_state_estimate(w.fm);
  if (est > static_cast<double>(lim.dp_states)) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", est);
    throw WorkBoundExceeded(std::string("exact distribution needs up to ") + buf + " states, above the bound of " +
                            std::to_string(lim.dp_states));
  }
  const Rational q = 1 - w.p;
  ExactDistribution cur{{Point(w.fm.dim(), 0), Rational(1)}};
  for (std::size_t b = 0; b < w.fm.size(); ++b) {
    ExactDistribution next;
    auto row = w.fm[b];
    for (const auto& [pt, pr] : cur) {
      next[pt] += pr * q;
      Point moved = pt;
      for (std::size_t a = 0; a < moved.size(); ++a) moved[a] += row[a];
      next[moved] += pr * w.p;
    }
    cur = std::move(next);
  }
  return cur;
}

struct PointProbability {
  Rational prob = 0;
  bool in_lattice = true;
};

inline PointProbability prob_at(const ExactDistribution& dist, const Point& lambda,
                                const IntegerLattice* lattice = nullptr) {
  PointProbability r;
  if (lattice) {
    std::vector<Rational> v;
    for (auto x : lambda) v.emplace_back(to_integer(x));
    r.in_lattice = lattice_membership(v, *lattice);
  }
  auto it = dist.find(lambda);
  if (it != dist.end()) r.prob = it->second;
  return r;
}

inline PointProbability prob_at(const WalkSpec& w, const Point& lambda, const Limits& lim = {}) {
  if (lambda.size() != w.fm.dim()) throw DomainError("lattice point has wrong dimension");
  IntegerLattice lat = feature_lattice(w.fm);
  std::vector<Rational> v;
  for (auto x : lambda) v.emplace_back(to_integer(x));
  if (!lattice_membership(v, lat)) return {Rational(0), false};
  return prob_at(exact_distribution(w, lim), lambda);
}

/// α_N = Pr[X = E[X]] / (p^N (1−p)^{|B|−N}) with p = N/|B|: the number of
/// size-N structures, provided constant functions lie in V.
inline Integer count_via_identity(const FeatureMap& fm, const Integer& n, const Limits& lim = {}) {
  const Integer ground(static_cast<unsigned long>(fm.size()));
  if (!constants_in_span(fm)) throw DomainError("counting identity needs the constant function in V");
  if (n < 0 || n > ground) return 0;
  if (n == 0 || n == ground) return 1;
  Rational p(n, ground);
  p.canonicalize();
  WalkSpec w{fm, p};
  Point target(fm.dim());
  for (std::size_t a = 0; a < fm.dim(); ++a) {
    Rational e = p * Rational(to_integer(fm.column_sum()[a]));
    if (!is_integral(e)) return 0;
    target[a] = e.get_num().get_si();
  }
  std::vector<Rational> tv;
  for (auto x : target) tv.emplace_back(to_integer(x));
  if (!lattice_membership(tv, feature_lattice(fm))) return 0;
  Rational pr = prob_at(exact_distribution(w, lim), target).prob;
  Rational alpha = pr / (rpow(p, n.get_ui()) * rpow(Rational(1 - p), Integer(ground - n).get_ui()));
  if (!is_integral(alpha)) throw Error("counting identity produced a non-integer " + alpha.get_str());
  return alpha.get_num();
}

struct MainTerm {
  Rational half_exponent;  // ½(λ−E)ᵗΣ⁻¹(λ−E), exact
  Real log_value;
  Real value;
};

/// det 𝓛 · (2π)^{−|A|/2} · det(Σ)^{−1/2} · exp(−½(λ−E)ᵗΣ⁻¹(λ−E)).
inline MainTerm gaussian_main_term(const WalkSpec& w, const Point& lambda) {
  validate(w);
  if (lambda.size() != w.fm.dim()) throw DomainError("lattice point has wrong dimension");
  auto mom = walk_moments(w);
  std::vector<Rational> d(lambda.size());
  for (std::size_t a = 0; a < d.size(); ++a) d[a] = Rational(to_integer(lambda[a])) - mom.mean[a];
  auto x = solve_spd(mom.covariance, d);
  Rational quad = 0;
  for (std::size_t a = 0; a < d.size(); ++a) quad += d[a] * x[a];
  MainTerm m;
  m.half_exponent = quad / 2;
  const Integer ldet = feature_lattice(w.fm).det();
  const Rational pq = w.p * (1 - w.p);
  const Real dim = Real(static_cast<unsigned long>(w.fm.dim()));
  // log det Σ = |A| log(p(1−p)) + log det R
  Real log_det_sigma = dim * real_log(pq) + real_log(feature_gram_determinant(w.fm));
  m.log_value = real_log(ldet) - dim / 2 * boost::multiprecision::log(2 * real_pi()) - log_det_sigma / 2 -
                to_real(m.half_exponent);
  m.value = boost::multiprecision::exp(m.log_value);
  return m;
}

struct DeltaReport {
  Real delta;              // Pr / main − 1
  bool log_scale = false;  // main term below double range
  Real log_ratio;          // log Pr − log main
};

inline DeltaReport empirical_delta(const WalkSpec& w, const Point& lambda, const Limits& lim = {}) {
  auto pr = prob_at(w, lambda, lim).prob;
  auto m = gaussian_main_term(w, lambda);
  DeltaReport r;
  r.log_scale = m.log_value < Real(-700);
  r.log_ratio = pr > 0 ? Real(real_log(pr) - m.log_value) : Real(-std::numeric_limits<double>::infinity());
  r.delta = to_real(pr) / m.value - 1;
  return r;
}

/// X̂(θ) = ∏_b (1 − p + p e^{2πi⟨φ(b),θ⟩}).
inline Complex fourier_transform(const WalkSpec& w, const std::vector<Real>& theta) {
  validate(w);
  if (theta.size() != w.fm.dim()) throw DomainError("θ has wrong dimension");
  const Real q = to_real(Rational(1 - w.p)), p = to_real(w.p);
  Complex acc{Real(1), Real(0)};
  for (std::size_t b = 0; b < w.fm.size(); ++b) {
    Real ip = 0;
    auto row = w.fm[b];
    for (std::size_t a = 0; a < theta.size(); ++a)
      if (row[a] != 0) ip += theta[a] * row[a];
    Complex e = unit_phase(ip);
    acc = acc * Complex{q + p * e.re, p * e.im};
  }
  return acc;
}

/// Σ_λ Pr[X=λ] e^{2πi⟨λ,θ⟩} over an exact distribution.
inline Complex fourier_from_distribution(const ExactDistribution& dist, const std::vector<Real>& theta) {
  Complex acc;
  for (const auto& [pt, pr] : dist) {
    Real ip = 0;
    for (std::size_t a = 0; a < theta.size(); ++a)
      if (pt[a] != 0) ip += theta[a] * pt[a];
    Complex e = unit_phase(ip);
    Real prr = to_real(pr);
    acc = acc + Complex{prr * e.re, prr * e.im};
  }
  return acc;
}

/// max_b |⟨φ(b),θ⟩| / ‖θ‖_R with ‖θ‖²_R = (1/|B|) Σ_b ⟨φ(b),θ⟩².
inline Real tameness_ratio(const FeatureMap& fm, const std::vector<Real>& theta) {
  if (theta.size() != fm.dim()) throw DomainError("θ has wrong dimension");
  Real mx = 0, sq = 0;
  for (std::size_t b = 0; b < fm.size(); ++b) {
    Real ip = 0;
    auto row = fm[b];
    for (std::size_t a = 0; a < theta.size(); ++a)
      if (row[a] != 0) ip += theta[a] * row[a];
    mx = std::max(mx, Real(abs(ip)));
    sq += ip * ip;
  }
  if (sq == 0) throw DomainError("θ has zero R-norm");
  return mx / boost::multiprecision::sqrt(sq / fm.size());
}

struct TamenessSweep {
  std::size_t samples = 0;
  Real max_ratio = 0;
  Real mean_ratio = 0;
};

/// Ratios at `samples` Gaussian random directions from a seeded generator.
inline TamenessSweep tameness_sweep(const FeatureMap& fm, std::size_t samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  TamenessSweep s;
  Real total = 0;
  for (std::size_t i = 0; i < samples; ++i) {
    std::vector<Real> theta;
    for (std::size_t a = 0; a < fm.dim(); ++a) theta.emplace_back(g(rng));
    Real r = tameness_ratio(fm, theta);
    s.max_ratio = std::max(s.max_ratio, r);
    total += r;
  }
  s.samples = samples;
  if (samples) s.mean_ratio = total / samples;
  return s;
}

/// ε = √(2|A| ln N / N).
inline Real epsilon_diagnostic(std::size_t dim, const Integer& n) {
  if (n < 2) throw DomainError("ε needs N >= 2");
  return boost::multiprecision::sqrt(2 * Real(static_cast<unsigned long>(dim)) * real_log(n) / to_real(n));
}

// ---------------------------------------------------------------------------
// Short null vectors and local correction.

struct NullVector {
  std::vector<Row> support;  // rows of S, in the order given
  std::vector<int> coeffs;   // in {−1,0,1}, first nonzero positive
};

namespace detail {

inline std::uint64_t hash_point(const std::vector<std::int64_t>& v) {
  std::uint64_t h = 0x9e3779b97f4a7c15ULL;
  for (auto x : v) {
    h ^= static_cast<std::uint64_t>(x) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    h *= 0xff51afd7ed558ccdULL;
  }
  return h;
}

// Decodes a base-3 code into coefficients −1/0/+1 (digit 0 ↦ 0, 1 ↦ +1,
// 2 ↦ −1).
inline void decode_ternary(std::uint64_t code, std::size_t len, std::vector<int>& out) {
  out.assign(len, 0);
  for (std::size_t i = 0; i < len; ++i) {
    int d = static_cast<int>(code % 3);
    code /= 3;
    out[i] = d == 0 ? 0 : (d == 1 ? 1 : -1);
  }
}

}  // namespace detail

/// γ ∈ {−1,0,1}^S with Σ γ_b φ(b) = 0 and at least max(1, ⌈|S|/4⌉)
/// nonzero entries, by exhaustive meet-in-the-middle search.
inline std::optional<NullVector> find_short_null_vector(const FeatureMap& fm, const std::vector<Row>& s) {
  if (s.size() > 30) throw DomainError("short null vector search needs |S| <= 30");
  for (Row b : s)
    if (b >= fm.size()) throw DomainError("row out of range");
  const std::size_t need = std::max<std::size_t>(1, (s.size() + 3) / 4);
  const std::size_t nl = s.size() / 2, nr = s.size() - nl;
  const std::size_t na = fm.dim();

  auto sum_of = [&](std::size_t offset, const std::vector<int>& c) {
    std::vector<std::int64_t> v(na, 0);
    for (std::size_t i = 0; i < c.size(); ++i)
      if (c[i] != 0) {
        auto row = fm[s[offset + i]];
        for (std::size_t a = 0; a < na; ++a) v[a] += c[i] * row[a];
      }
    return v;
  };

  struct Entry {
    std::uint64_t hash;
    int nonzeros;
    std::uint64_t code;
  };
  std::uint64_t left_total = 1;
  for (std::size_t i = 0; i < nl; ++i) left_total *= 3;
  std::vector<Entry> left;
  left.reserve(left_total);
  std::vector<int> c;
  for (std::uint64_t code = 0; code < left_total; ++code) {
    detail::decode_ternary(code, nl, c);
    int nz = static_cast<int>(std::count_if(c.begin(), c.end(), [](int x) { return x != 0; }));
    left.push_back({detail::hash_point(sum_of(0, c)), nz, code});
  }
  // Per hash: most nonzeros first, then smallest code.
  std::sort(left.begin(), left.end(), [](const Entry& x, const Entry& y) {
    if (x.hash != y.hash) return x.hash < y.hash;
    if (x.nonzeros != y.nonzeros) return x.nonzeros > y.nonzeros;
    return x.code < y.code;
  });

  std::uint64_t right_total = 1;
  for (std::size_t i = 0; i < nr; ++i) right_total *= 3;
  std::vector<int> cr, cl;
  for (std::uint64_t code = 0; code < right_total; ++code) {
    detail::decode_ternary(code, nr, cr);
    int nz = static_cast<int>(std::count_if(cr.begin(), cr.end(), [](int x) { return x != 0; }));
    if (static_cast<std::size_t>(nz) + nl < need) continue;
    auto target = sum_of(nl, cr);
    for (auto& x : target) x = -x;
    const std::uint64_t h = detail::hash_point(target);
    auto it = std::lower_bound(left.begin(), left.end(), h, [](const Entry& e, std::uint64_t v) { return e.hash < v; });
    for (; it != left.end() && it->hash == h; ++it) {
      if (static_cast<std::size_t>(it->nonzeros + nz) < need) break;  // sorted by nonzeros within the hash
      detail::decode_ternary(it->code, nl, cl);
      if (sum_of(0, cl) != target) continue;  // hash collision
      NullVector nv;
      nv.support = s;
      nv.coeffs = cl;
      nv.coeffs.insert(nv.coeffs.end(), cr.begin(), cr.end());
      auto first = std::find_if(nv.coeffs.begin(), nv.coeffs.end(), [](int x) { return x != 0; });
      if (*first < 0)
        for (auto& x : nv.coeffs) x = -x;
      return nv;
    }
  }
  return std::nullopt;
}

struct Correction {
  std::vector<Integer> gamma;  // over B, zero on E
  Integer l1;
  std::size_t attempts = 0;
};

struct CorrectionFailure {
  std::size_t attempts = 0;
};

/// Expresses φ(e) as an integer combination of rows outside E via the
/// randomized procedure: a short null vector on a random S, a support
/// element b0, and a symmetry sending b0 to e.
inline std::variant<Correction, CorrectionFailure> local_correct(const FeatureMap& fm, const std::vector<Row>& erased,
                                                                 Row e, std::uint64_t seed,
                                                                 std::optional<std::size_t> s_size = std::nullopt,
                                                                 std::size_t retries = 200) {
  if (erased.empty()) throw DomainError("local correction needs a nonempty erased set E");
  if (std::find(erased.begin(), erased.end(), e) == erased.end()) throw DomainError("e must belong to E");
  for (Row b : erased)
    if (b >= fm.size()) throw DomainError("erased row out of range");
  if (!fm.symmetry()) throw DomainError("local correction needs a transitive symmetry oracle");
  std::vector<char> in_e(fm.size(), 0);
  for (Row b : erased) in_e[b] = 1;
  const std::size_t s = std::min<std::size_t>(fm.size(), s_size.value_or(std::min<std::size_t>(20, 2 * fm.dim() + 4)));
  if (s < 2 || s > 30) throw DomainError("sample size must lie in [2, 30]");

  std::mt19937_64 rng(seed);
  std::vector<Row> all(fm.size());
  std::iota(all.begin(), all.end(), Row{0});
  for (std::size_t attempt = 1; attempt <= retries; ++attempt) {
    // Partial Fisher–Yates for a uniform s-subset.
    for (std::size_t i = 0; i < s; ++i) {
      std::uniform_int_distribution<std::size_t> d(i, all.size() - 1);
      std::swap(all[i], all[d(rng)]);
    }
    std::vector<Row> sample(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(s));
    auto nv = find_short_null_vector(fm, sample);
    if (!nv) continue;
    std::vector<std::size_t> nz;
    for (std::size_t i = 0; i < nv->coeffs.size(); ++i)
      if (nv->coeffs[i] != 0) nz.push_back(i);
    std::uniform_int_distribution<std::size_t> pick(0, nz.size() - 1);
    const std::size_t i0 = nz[pick(rng)];
    const Row b0 = sample[i0];
    Permutation pi = fm.symmetry()(b0, e);
    bool clear = true;
    for (std::size_t i = 0; i < sample.size() && clear; ++i)
      if (i != i0 && nv->coeffs[i] != 0 && in_e[pi[sample[i]]]) clear = false;
    if (!clear) continue;
    Correction c;
    c.gamma.assign(fm.size(), 0);
    const int g0 = nv->coeffs[i0];
    for (std::size_t i = 0; i < sample.size(); ++i)
      if (i != i0 && nv->coeffs[i] != 0) c.gamma[pi[sample[i]]] += -nv->coeffs[i] * g0;
    // Exact verification: Σ γ_b φ(b) = φ(e).
    auto img = apply_phi(fm, c.gamma);
    bool ok = true;
    for (std::size_t a = 0; a < fm.dim(); ++a) ok = ok && img[a] == fm[e][a];
    if (!ok) continue;
    c.l1 = vector_norm(c.gamma, Norm::L1);
    c.attempts = attempt;
    return c;
  }
  return CorrectionFailure{retries};
}

}  // namespace regcomb
