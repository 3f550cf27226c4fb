#pragma once

#include <json.hpp>

#include <algorithm>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "regcomb/exact/determinant.hpp"
#include "regcomb/exact/lattice.hpp"
#include "regcomb/exact/matrix.hpp"
#include "regcomb/exact/solve.hpp"
#include "regcomb/real.hpp"

namespace regcomb {

using Row = std::size_t;
using Permutation = std::vector<std::size_t>;

/// Family-specific bijection between external element strings and row
/// indices of B.
struct ElementCodec {
  std::function<std::string(Row)> encode;
  std::function<Row(const std::string&)> decode;
};

/// symmetry(from, to) returns a symmetry π of V (as a permutation of row
/// indices, π[b] = image of b) with π[from] = to.
using SymmetryOracle = std::function<Permutation(Row from, Row to)>;

struct Unchecked {};

/// φ : B → Z^A stored as a |B| x |A| matrix of small integers.
class FeatureMap {
 public:
  FeatureMap(Matrix<std::int64_t> phi, std::vector<std::string> labels, std::int64_t declared_c2,
             std::string family = "generic", nlohmann::json params = nlohmann::json::object())
      : FeatureMap(Unchecked{}, std::move(phi), std::move(labels), declared_c2, std::move(family),
                   std::move(params)) {
    if (column_rank() != dim())
      throw RankDeficientError("feature map columns are linearly dependent", column_rank());
  }

  /// For families whose construction proves column independence.
  FeatureMap(Unchecked, Matrix<std::int64_t> phi, std::vector<std::string> labels, std::int64_t declared_c2,
             std::string family = "generic", nlohmann::json params = nlohmann::json::object())
      : phi_(std::move(phi)),
        labels_(std::move(labels)),
        c2_(declared_c2),
        family_(std::move(family)),
        params_(std::move(params)) {
    if (phi_.rows() == 0 || phi_.cols() == 0) throw DomainError("feature map must be nonempty");
    if (labels_.empty()) {
      for (std::size_t a = 0; a < phi_.cols(); ++a) labels_.push_back(std::to_string(a));
    }
    if (labels_.size() != phi_.cols()) throw DomainError("feature map label count mismatch");
    if (c2_ < 1) throw DomainError("declared c2 must be at least 1");
    for (auto x : phi_.data())
      if (x > c2_ || x < -c2_) throw DomainError("feature map entry exceeds declared c2");
    if (static_cast<double>(phi_.rows()) * static_cast<double>(c2_) * static_cast<double>(c2_) > 9e18)
      throw DomainError("feature map too large for 64-bit accumulation");
    column_sum_.assign(dim(), 0);
    for (std::size_t b = 0; b < size(); ++b)
      for (std::size_t a = 0; a < dim(); ++a) column_sum_[a] += phi_(b, a);
  }

  std::size_t size() const noexcept { return phi_.rows(); }  // |B|
  std::size_t dim() const noexcept { return phi_.cols(); }   // |A|
  const Matrix<std::int64_t>& matrix() const noexcept { return phi_; }
  std::span<const std::int64_t> operator[](Row b) const { return phi_.row(b); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  std::int64_t c2() const noexcept { return c2_; }
  const std::string& family() const noexcept { return family_; }
  const nlohmann::json& params() const noexcept { return params_; }
  /// Σ_b φ(b).
  const std::vector<std::int64_t>& column_sum() const noexcept { return column_sum_; }

  IntMatrix integer_matrix() const { return to_integer_matrix(phi_); }

  const ElementCodec& codec() const noexcept { return codec_; }
  void set_codec(ElementCodec c) { codec_ = std::move(c); }
  const SymmetryOracle& symmetry() const noexcept { return symmetry_; }
  void set_symmetry(SymmetryOracle s) { symmetry_ = std::move(s); }

  std::string encode(Row b) const { return codec_.encode ? codec_.encode(b) : std::to_string(b); }
  Row decode(const std::string& s) const {
    if (codec_.decode) return codec_.decode(s);
    std::size_t pos = 0;
    unsigned long long v = std::stoull(s, &pos);
    if (pos != s.size() || v >= size()) throw DomainError("bad element index: " + s);
    return static_cast<Row>(v);
  }

  std::size_t column_rank() const {
    RowEchelon e(dim());
    for (std::size_t b = 0; b < size() && e.rank() < dim(); ++b) e.insert_small(phi_.row(b));
    return e.rank();
  }

 private:
  Matrix<std::int64_t> phi_;
  std::vector<std::string> labels_;
  std::int64_t c2_;
  std::string family_;
  nlohmann::json params_;
  std::vector<std::int64_t> column_sum_;
  ElementCodec codec_;
  SymmetryOracle symmetry_;
};

/// A subset T of B, as sorted distinct row indices.
class Structure {
 public:
  Structure() = default;
  explicit Structure(std::vector<Row> members) : members_(std::move(members)) {
    std::sort(members_.begin(), members_.end());
    if (std::adjacent_find(members_.begin(), members_.end()) != members_.end())
      throw DomainError("structure has duplicate members");
  }
  const std::vector<Row>& members() const noexcept { return members_; }
  std::size_t size() const noexcept { return members_.size(); }

 private:
  std::vector<Row> members_;
};

inline void check_in_range(const FeatureMap& fm, const Structure& t) {
  if (!t.members().empty() && t.members().back() >= fm.size())
    throw DomainError("structure member " + std::to_string(t.members().back()) + " out of range [0," +
                      std::to_string(fm.size()) + ")");
}

inline nlohmann::json structure_to_json(const FeatureMap& fm, const Structure& t) {
  nlohmann::json members = nlohmann::json::array();
  for (Row b : t.members()) members.push_back(fm.encode(b));
  return {{"family", fm.family()}, {"params", fm.params()}, {"members", members}};
}

inline Structure structure_from_json(const FeatureMap& fm, const nlohmann::json& j) {
  if (!j.contains("members") || !j["members"].is_array()) throw DomainError("structure JSON needs members");
  if (j.contains("family") && j["family"] != fm.family())
    throw DomainError("structure family does not match feature map");
  std::vector<Row> rows;
  for (const auto& m : j["members"]) rows.push_back(fm.decode(m.is_string() ? m.get<std::string>() : m.dump()));
  Structure t(std::move(rows));
  check_in_range(fm, t);
  return t;
}

/// |B|·Σ_{t∈T} φ(t) == N·Σ_b φ(b), componentwise.
inline bool verify_structure(const FeatureMap& fm, const Structure& t) {
  check_in_range(fm, t);
  std::vector<std::int64_t> s(fm.dim(), 0);
  for (Row b : t.members()) {
    auto r = fm[b];
    for (std::size_t a = 0; a < fm.dim(); ++a) s[a] += r[a];
  }
  const auto bsz = static_cast<__int128>(fm.size());
  const auto n = static_cast<__int128>(t.size());
  for (std::size_t a = 0; a < fm.dim(); ++a)
    if (bsz * s[a] != n * fm.column_sum()[a]) return false;
  return true;
}

inline IntegerLattice feature_lattice(const FeatureMap& fm) { return lattice_from_generators(fm.integer_matrix()); }

/// Least N > 0 with (N/|B|)·Σ_b φ(b) ∈ 𝓛(φ).
inline Integer divisibility_constant(const FeatureMap& fm, const IntegerLattice& lattice) {
  std::vector<Rational> mean(fm.dim());
  for (std::size_t a = 0; a < fm.dim(); ++a) {
    mean[a] = Rational(to_integer(fm.column_sum()[a]), Integer(static_cast<unsigned long>(fm.size())));
    mean[a].canonicalize();
  }
  return minimal_multiplier(mean, lattice);
}

inline Integer divisibility_constant(const FeatureMap& fm) { return divisibility_constant(fm, feature_lattice(fm)); }

inline IntMatrix feature_gram(const FeatureMap& fm) { return gram_matrix(fm.matrix()); }

inline Integer feature_gram_determinant(const FeatureMap& fm) {
  Integer d = bareiss_determinant(feature_gram(fm));
  if (d == 0) throw RankDeficientError("feature map columns are linearly dependent", fm.column_rank());
  return d;
}

/// ρ² = det(𝓛(φ))² / det(φᵗφ).
inline Rational rho_squared(const FeatureMap& fm) {
  Integer l = feature_lattice(fm).det();
  Rational r(l * l, feature_gram_determinant(fm));
  r.canonicalize();
  return r;
}

/// True iff every column of φ∘π lies in the column span of φ.
inline bool check_symmetry(const FeatureMap& fm, const Permutation& pi) {
  const std::size_t nb = fm.size(), na = fm.dim();
  if (pi.size() != nb) throw DomainError("permutation size does not match |B|");
  std::vector<char> seen(nb, 0);
  for (auto x : pi) {
    if (x >= nb || seen[x]) throw DomainError("not a permutation of B");
    seen[x] = 1;
  }
  // Rank of the |B| x 2|A| matrix [φ | φ∘π], computed on its transpose so
  // the echelon dimension is |B|.
  RowEchelon e(nb);
  std::vector<Integer> col(nb);
  for (std::size_t a = 0; a < na; ++a) {
    for (std::size_t b = 0; b < nb; ++b) col[b] = to_integer(fm[b][a]);
    e.insert(col);
  }
  for (std::size_t a = 0; a < na; ++a) {
    for (std::size_t b = 0; b < nb; ++b) col[b] = to_integer(fm[pi[b]][a]);
    if (!e.reduces_to_zero(col)) return false;
  }
  return true;
}

enum class Norm { L1, LInf };
enum class Target { V, VPerp };

inline Integer vector_norm(std::span<const Integer> v, Norm norm) {
  Integer n = 0;
  for (const auto& x : v) {
    if (norm == Norm::L1)
      n += abs(x);
    else if (abs(x) > n)
      n = abs(x);
  }
  return n;
}

/// True iff all vectors have norm ≤ c and together span exactly the target
/// space (V = column span of φ, or its orthogonal complement).
inline bool verify_bounded_basis(const FeatureMap& fm, const std::vector<std::vector<Integer>>& vectors,
                                 const Integer& c, Norm norm, Target target) {
  const std::size_t nb = fm.size(), na = fm.dim();
  for (const auto& v : vectors) {
    if (v.size() != nb) throw DomainError("basis vector dimension does not match |B|");
    if (vector_norm(v, norm) > c) return false;
  }
  RowEchelon span(nb);
  for (const auto& v : vectors) span.insert(v);
  if (target == Target::V) {
    if (span.rank() != na) return false;
    for (std::size_t a = 0; a < na; ++a) {
      std::vector<Integer> col(nb);
      for (std::size_t b = 0; b < nb; ++b) col[b] = to_integer(fm[b][a]);
      if (!span.reduces_to_zero(col)) return false;
    }
    return true;
  }
  if (span.rank() != nb - na) return false;
  Integer dot;
  for (const auto& v : vectors)
    for (std::size_t a = 0; a < na; ++a) {
      dot = 0;
      for (std::size_t b = 0; b < nb; ++b)
        if (v[b] != 0 && fm[b][a] != 0) dot += v[b] * to_integer(fm[b][a]);
      if (dot != 0) return false;
    }
  return true;
}

/// Vectors γᵃ over B with φ(γᵃ) := Σ_b γᵃ_b φ(b) = m·eᵃ and ‖γᵃ‖₁ ≤ c4.
struct DecodingCertificate {
  Integer multiplier = 1;
  std::vector<std::vector<Integer>> gammas;  // one per a, length |B|
  Integer c4 = 0;
};

/// Σ_b γ_b φ(b).
inline std::vector<Integer> apply_phi(const FeatureMap& fm, std::span<const Integer> gamma) {
  if (gamma.size() != fm.size()) throw DomainError("vector dimension does not match |B|");
  std::vector<Integer> out(fm.dim(), 0);
  for (std::size_t b = 0; b < fm.size(); ++b) {
    if (gamma[b] == 0) continue;
    auto r = fm[b];
    for (std::size_t a = 0; a < fm.dim(); ++a)
      if (r[a] != 0) out[a] += gamma[b] * to_integer(r[a]);
  }
  return out;
}

/// Index of the first a whose certificate vector fails, if any.
inline std::optional<std::size_t> find_certificate_failure(const FeatureMap& fm, const DecodingCertificate& cert) {
  if (cert.gammas.size() != fm.dim()) return 0;
  for (std::size_t a = 0; a < fm.dim(); ++a) {
    if (vector_norm(cert.gammas[a], Norm::L1) > cert.c4) return a;
    auto img = apply_phi(fm, cert.gammas[a]);
    for (std::size_t j = 0; j < fm.dim(); ++j)
      if (img[j] != (j == a ? cert.multiplier : Integer(0))) return a;
  }
  return std::nullopt;
}

/// δᵇ = m·uᵇ − Σ_a φ(b)_a γᵃ for every b ∈ B.
inline std::vector<std::vector<Integer>> perp_basis_from_decoding(const FeatureMap& fm,
                                                                  const DecodingCertificate& cert) {
  if (auto bad = find_certificate_failure(fm, cert))
    throw DomainError("invalid decoding certificate at a = " +
                      (*bad < fm.labels().size() ? fm.labels()[*bad] : std::to_string(*bad)));
  std::vector<std::vector<Integer>> out;
  out.reserve(fm.size());
  for (std::size_t b = 0; b < fm.size(); ++b) {
    std::vector<Integer> d(fm.size(), 0);
    d[b] = cert.multiplier;
    auto r = fm[b];
    for (std::size_t a = 0; a < fm.dim(); ++a) {
      if (r[a] == 0) continue;
      Integer f = to_integer(r[a]);
      const auto& g = cert.gammas[a];
      for (std::size_t x = 0; x < fm.size(); ++x)
        if (g[x] != 0) d[x] -= f * g[x];
    }
    out.push_back(std::move(d));
  }
  return out;
}

/// ⌈C·c2·c3²·dimV⁶·ln(2·c3·dimV)⁶⌉. c1 is accepted for signature parity
/// with the theorem (it constrains N to its multiples, not the bound).
inline Integer existence_threshold(const Integer& c1, const Integer& c2, const Integer& c3, const Integer& dim_v,
                                   const Rational& constant) {
  if (c1 < 1 || c2 < 1 || c3 < 1 || dim_v < 1) throw DomainError("threshold arguments must be at least 1");
  if (constant < 0) throw DomainError("threshold constant must be nonnegative");
  if (constant == 0) return 0;
  PrecisionScope scope;
  Real l = real_log(Integer(2 * c3 * dim_v));
  Real v = to_real(constant) * to_real(Integer(c2 * c3 * c3)) * pow(to_real(dim_v), 6) * pow(l, 6);
  Real up = ceil(v);
  Integer out;
  mpfr_get_z(out.get_mpz_t(), up.backend().data(), MPFR_RNDN);
  return out;
}

/// ‖γ − p𝟏‖²_V: squared length of the orthogonal projection onto V.
inline Rational projection_norm_sq(const FeatureMap& fm, std::span<const Rational> gamma, const Rational& p) {
  if (gamma.size() != fm.size()) throw DomainError("vector dimension does not match |B|");
  std::vector<Rational> y(fm.dim(), 0);
  for (std::size_t b = 0; b < fm.size(); ++b) {
    Rational w = gamma[b] - p;
    if (w == 0) continue;
    auto r = fm[b];
    for (std::size_t a = 0; a < fm.dim(); ++a)
      if (r[a] != 0) y[a] += w * Rational(to_integer(r[a]));
  }
  auto x = solve_spd(to_rational_matrix(feature_gram(fm)), y);
  Rational s = 0;
  for (std::size_t a = 0; a < fm.dim(); ++a) s += x[a] * y[a];
  return s;
}

inline bool constants_in_span(const FeatureMap& fm) {
  RowEchelon e(fm.size());
  std::vector<Integer> col(fm.size());
  for (std::size_t a = 0; a < fm.dim(); ++a) {
    for (std::size_t b = 0; b < fm.size(); ++b) col[b] = to_integer(fm[b][a]);
    e.insert(col);
  }
  return e.reduces_to_zero(std::vector<Integer>(fm.size(), Integer(1)));
}

// ---------------------------------------------------------------------------
// Brute-force enumeration oracle.

struct EnumerationOptions {
  std::optional<std::uint64_t> cap;  // stop after this many solutions
  double work_bound = 1e9;           // max C(|B|, N) without a cap
  bool collect = false;
  unsigned threads = 1;
};

struct EnumerationResult {
  Integer count = 0;
  bool truncated = false;  // cap reached
  std::vector<Structure> structures;
};

namespace detail {

class Enumerator {
 public:
  Enumerator(const FeatureMap& fm, std::size_t n, std::vector<std::int64_t> target, bool nonneg,
             std::optional<std::uint64_t> cap, bool collect)
      : fm_(fm), n_(n), target_(std::move(target)), nonneg_(nonneg), cap_(cap), collect_(collect) {
    const std::size_t nb = fm.size(), na = fm.dim();
    // suffix_[i] = Σ_{b ≥ i} φ(b), used for the undershoot test.
    suffix_.assign((nb + 1) * na, 0);
    for (std::size_t b = nb; b-- > 0;)
      for (std::size_t a = 0; a < na; ++a) suffix_[b * na + a] = suffix_[(b + 1) * na + a] + fm[b][a];
  }

  // Counts solutions whose smallest member is `first`.
  void run_from(std::size_t first) {
    std::vector<std::int64_t> sum(fm_.dim(), 0);
    chosen_.clear();
    push(first, sum);
    if (feasible(first + 1, sum, 1)) dfs(first + 1, sum, 1);
  }

  std::uint64_t count() const noexcept { return count_; }
  bool truncated() const noexcept { return truncated_; }
  std::vector<Structure>& found() { return found_; }

 private:
  void push(std::size_t b, std::vector<std::int64_t>& sum) {
    auto r = fm_[b];
    for (std::size_t a = 0; a < sum.size(); ++a) sum[a] += r[a];
    chosen_.push_back(b);
  }
  void pop(std::size_t b, std::vector<std::int64_t>& sum) {
    auto r = fm_[b];
    for (std::size_t a = 0; a < sum.size(); ++a) sum[a] -= r[a];
    chosen_.pop_back();
  }

  bool feasible(std::size_t next, const std::vector<std::int64_t>& sum, std::size_t depth) const {
    if (fm_.size() - next < n_ - depth) return false;
    if (!nonneg_) return true;
    const std::size_t na = fm_.dim();
    for (std::size_t a = 0; a < na; ++a) {
      if (sum[a] > target_[a]) return false;
      if (sum[a] + suffix_[next * na + a] < target_[a]) return false;
    }
    return true;
  }

  void dfs(std::size_t next, std::vector<std::int64_t>& sum, std::size_t depth) {
    if (truncated_) return;
    if (depth == n_) {
      if (sum == target_) {
        ++count_;
        if (collect_) found_.emplace_back(chosen_);
        if (cap_ && count_ >= *cap_) truncated_ = true;
      }
      return;
    }
    for (std::size_t b = next; b + (n_ - depth) <= fm_.size(); ++b) {
      push(b, sum);
      if (feasible(b + 1, sum, depth + 1)) dfs(b + 1, sum, depth + 1);
      pop(b, sum);
      if (truncated_) return;
    }
  }

  const FeatureMap& fm_;
  std::size_t n_;
  std::vector<std::int64_t> target_;
  bool nonneg_;
  std::optional<std::uint64_t> cap_;
  bool collect_;
  std::vector<std::int64_t> suffix_;
  std::vector<Row> chosen_;
  std::uint64_t count_ = 0;
  bool truncated_ = false;
  std::vector<Structure> found_;
};

}  // namespace detail

/// Number of size-N subsets T ⊆ B with verify_structure(T), visiting subsets
/// in lexicographic order of their sorted member lists.
inline EnumerationResult enumerate_structures(const FeatureMap& fm, std::size_t n, const EnumerationOptions& opt = {}) {
  const std::size_t nb = fm.size();
  EnumerationResult res;
  if (n > nb) return res;
  Integer work = binomial(static_cast<long>(nb), static_cast<long>(n));
  if (!opt.cap && work.get_d() > opt.work_bound)
    throw WorkBoundExceeded("enumeration needs C(" + std::to_string(nb) + "," + std::to_string(n) +
                            ") = " + work.get_str() + " subsets, above the work bound");
  // Target Σ_T φ = N·Σ_B φ/|B| must be integral.
  std::vector<std::int64_t> target(fm.dim());
  for (std::size_t a = 0; a < fm.dim(); ++a) {
    __int128 num = static_cast<__int128>(n) * fm.column_sum()[a];
    if (num % static_cast<__int128>(nb) != 0) return res;
    target[a] = static_cast<std::int64_t>(num / static_cast<__int128>(nb));
  }
  if (n == 0) {
    res.count = 1;
    if (opt.collect) res.structures.emplace_back();
    return res;
  }
  const auto& data = fm.matrix().data();
  const bool nonneg = std::all_of(data.begin(), data.end(), [](std::int64_t x) { return x >= 0; });

  const std::size_t firsts = nb - n + 1;
  const unsigned threads = opt.cap ? 1u : std::max(1u, std::min<unsigned>(opt.threads, static_cast<unsigned>(firsts)));
  if (threads == 1) {
    detail::Enumerator e(fm, n, target, nonneg, opt.cap, opt.collect);
    for (std::size_t f = 0; f < firsts && !e.truncated(); ++f) e.run_from(f);
    res.count = Integer(static_cast<unsigned long>(e.count()));
    res.truncated = e.truncated();
    res.structures = std::move(e.found());
    return res;
  }
  // Each worker owns a strided set of first elements; per-first results are
  // merged in first-element order so the output is deterministic.
  std::vector<std::uint64_t> counts(firsts, 0);
  std::vector<std::vector<Structure>> found(firsts);
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < threads; ++w)
    pool.emplace_back([&, w] {
      for (std::size_t f = w; f < firsts; f += threads) {
        detail::Enumerator e(fm, n, target, nonneg, std::nullopt, opt.collect);
        e.run_from(f);
        counts[f] = e.count();
        found[f] = std::move(e.found());
      }
    });
  for (auto& th : pool) th.join();
  for (std::size_t f = 0; f < firsts; ++f) {
    res.count += Integer(static_cast<unsigned long>(counts[f]));
    for (auto& s : found[f]) res.structures.push_back(std::move(s));
  }
  return res;
}

}  // namespace regcomb
