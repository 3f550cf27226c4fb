#pragma once

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "regcomb/counting.hpp"
#include "regcomb/framework.hpp"

namespace regcomb {

/// Permutations in one-line notation, 1-based: perm[i] = σ(i+1).
using Perm = std::vector<int>;

struct PermParams {
  long n = 1;
  long t = 1;
};

inline void validate(const PermParams& p) {
  if (p.n < 1 || p.t < 1 || p.t > p.n) throw DomainError("permutation parameters must satisfy 1 <= t <= n");
}

inline bool is_permutation(const Perm& s) {
  std::vector<char> seen(s.size() + 1, 0);
  for (int x : s) {
    if (x < 1 || x > static_cast<int>(s.size()) || seen[static_cast<std::size_t>(x)]) return false;
    seen[static_cast<std::size_t>(x)] = 1;
  }
  return true;
}

inline Perm identity_perm(long n) {
  Perm p(static_cast<std::size_t>(n));
  std::iota(p.begin(), p.end(), 1);
  return p;
}

inline Perm compose(const Perm& a, const Perm& b) {  // (a∘b)(i) = a(b(i))
  Perm c(b.size());
  for (std::size_t i = 0; i < b.size(); ++i) c[i] = a[static_cast<std::size_t>(b[i] - 1)];
  return c;
}

inline Perm inverse(const Perm& a) {
  Perm c(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) c[static_cast<std::size_t>(a[i] - 1)] = static_cast<int>(i + 1);
  return c;
}

inline int sign(const Perm& a) {
  int s = 1;
  std::vector<char> seen(a.size(), 0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (seen[i]) continue;
    std::size_t len = 0;
    for (std::size_t j = i; !seen[j]; j = static_cast<std::size_t>(a[j] - 1)) {
      seen[j] = 1;
      ++len;
    }
    if (len % 2 == 0) s = -s;
  }
  return s;
}

/// Lexicographic rank in S_n (Lehmer code).
inline Row perm_rank(const Perm& s) {
  const std::size_t n = s.size();
  Row r = 0;
  for (std::size_t i = 0; i < n; ++i) {
    Row smaller = 0;
    for (std::size_t j = i + 1; j < n; ++j) smaller += s[j] < s[i];
    r = r * (n - i) + smaller;
  }
  return r;
}

inline Perm perm_unrank(Row r, long n) {
  std::vector<Row> code(static_cast<std::size_t>(n));
  for (long i = n; i-- > 0;) {
    code[static_cast<std::size_t>(i)] = r % static_cast<Row>(n - i);
    r /= static_cast<Row>(n - i);
  }
  std::vector<int> pool = identity_perm(n);
  Perm s;
  for (long i = 0; i < n; ++i) {
    auto it = pool.begin() + static_cast<std::ptrdiff_t>(code[static_cast<std::size_t>(i)]);
    s.push_back(*it);
    pool.erase(it);
  }
  return s;
}

inline std::string perm_string(const Perm& s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s.size() > 9) out += (i ? "," : "") + std::to_string(s[i]);
    else out += static_cast<char>('0' + s[i]);
  }
  return out;
}

inline Perm parse_perm(const std::string& text) {
  Perm s;
  if (text.find(',') != std::string::npos) {
    std::size_t start = 0;
    while (start <= text.size()) {
      std::size_t end = text.find(',', start);
      if (end == std::string::npos) end = text.size();
      s.push_back(std::stoi(text.substr(start, end - start)));
      start = end + 1;
    }
  } else {
    for (char c : text) {
      if (c < '1' || c > '9') throw DomainError("bad permutation: " + text);
      s.push_back(c - '0');
    }
  }
  if (!is_permutation(s)) throw DomainError("not a permutation: " + text);
  return s;
}

// ---------------------------------------------------------------------------
// Longest increasing subsequence.

enum class LisPolicy { First, Last };

struct LisResult {
  std::size_t length = 0;
  std::vector<std::size_t> indices;  // 0-based positions of S(σ)
};

/// LIS length and the lexicographically first (or last) index sequence of
/// a longest increasing subsequence.
inline LisResult lis(const Perm& s, LisPolicy policy = LisPolicy::First) {
  const std::size_t n = s.size();
  // from[i] = length of the longest increasing subsequence starting at i.
  std::vector<std::size_t> from(n, 1);
  for (std::size_t i = n; i-- > 0;)
    for (std::size_t j = i + 1; j < n; ++j)
      if (s[j] > s[i]) from[i] = std::max(from[i], from[j] + 1);
  LisResult r;
  r.length = n ? *std::max_element(from.begin(), from.end()) : 0;
  std::size_t need = r.length;
  int last = 0;
  std::size_t start = 0;
  while (need > 0) {
    std::size_t pick = n;
    for (std::size_t i = start; i < n; ++i)
      if (s[i] > last && from[i] == need) {
        pick = i;
        if (policy == LisPolicy::First) break;
      }
    r.indices.push_back(pick);
    last = s[pick];
    start = pick + 1;
    --need;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Partitions and tableaux.

using Partition = std::vector<long>;

inline Partition conjugate(const Partition& l) {
  Partition c;
  for (long j = 1; !l.empty() && j <= l[0]; ++j) {
    long h = 0;
    for (long x : l) h += x >= j;
    c.push_back(h);
  }
  return c;
}

inline void validate(const Partition& l) {
  for (std::size_t i = 0; i < l.size(); ++i)
    if (l[i] < 1 || (i && l[i] > l[i - 1])) throw DomainError("not a partition");
}

/// All partitions of n, in reverse lexicographic order.
inline std::vector<Partition> partitions(long n) {
  std::vector<Partition> out;
  Partition cur;
  auto rec = [&](auto&& self, long rest, long max) -> void {
    if (rest == 0) {
      out.push_back(cur);
      return;
    }
    for (long x = std::min(rest, max); x >= 1; --x) {
      cur.push_back(x);
      self(self, rest - x, x);
      cur.pop_back();
    }
  };
  rec(rec, n, n);
  return out;
}

/// n!/∏ hook lengths.
inline Integer hook_length_dim(const Partition& l) {
  validate(l);
  Partition c = conjugate(l);
  long n = std::accumulate(l.begin(), l.end(), 0L);
  Integer hooks = 1;
  for (std::size_t i = 0; i < l.size(); ++i)
    for (long j = 0; j < l[i]; ++j) hooks *= (l[i] - j - 1) + (c[static_cast<std::size_t>(j)] - static_cast<long>(i) - 1) + 1;
  return factorial(n) / hooks;
}

/// dim W = Σ_{λ₁ ≥ n−t} (dim V_λ)².
inline Integer dim_w_hook(const PermParams& p) {
  validate(p);
  Integer d = 0;
  for (const auto& l : partitions(p.n))
    if (l[0] >= p.n - p.t) {
      Integer f = hook_length_dim(l);
      d += f * f;
    }
  return d;
}

/// #{σ ∈ S_n : LIS(σ) ≥ n−t}.
inline Integer dim_w_census(const PermParams& p, const Limits& lim = {}) {
  validate(p);
  check_map_size(factorial(p.n), 1, lim);
  Perm s = identity_perm(p.n);
  unsigned long c = 0;
  do c += static_cast<long>(lis(s).length) >= p.n - p.t;
  while (std::next_permutation(s.begin(), s.end()));
  return c;
}

/// Both computations, asserted equal.
inline Integer dim_w(const PermParams& p, const Limits& lim = {}) {
  Integer h = dim_w_hook(p);
  if (factorial(p.n) <= static_cast<unsigned long>(lim.max_ground)) {
    Integer c = dim_w_census(p, lim);
    if (c != h) throw Error("dim W mismatch: census " + c.get_str() + " vs hook sum " + h.get_str());
  }
  return h;
}

/// Tableau: rows of entries (a filling of a Young diagram with 1..n).
struct Tableau {
  std::vector<std::vector<int>> rows;

  Partition shape() const {
    Partition l;
    for (const auto& r : rows) l.push_back(static_cast<long>(r.size()));
    return l;
  }
  std::vector<std::vector<int>> columns() const {
    std::vector<std::vector<int>> cols(rows.empty() ? 0 : rows[0].size());
    for (const auto& r : rows)
      for (std::size_t j = 0; j < r.size(); ++j) cols[j].push_back(r[j]);
    return cols;
  }
};

inline void validate(const Tableau& t) {
  validate(t.shape());
  std::vector<int> all;
  for (const auto& r : t.rows) all.insert(all.end(), r.begin(), r.end());
  if (!is_permutation(all)) throw DomainError("tableau filling is not a bijection onto [n]");
}

struct SignedPerm {
  Perm perm;
  int sign;
};

/// Every permutation of [n] preserving each column of T as a set.
inline std::vector<SignedPerm> column_stabilizer(const Tableau& t) {
  validate(t);
  std::size_t n = 0;
  for (const auto& r : t.rows) n += r.size();
  std::vector<SignedPerm> out{{identity_perm(static_cast<long>(n)), 1}};
  for (const auto& col : t.columns()) {
    std::vector<int> sorted = col;
    std::sort(sorted.begin(), sorted.end());
    std::vector<SignedPerm> next;
    std::vector<int> img = sorted;
    do {
      // the permutation sending sorted[i] ↦ img[i], fixing everything else
      Perm local = identity_perm(static_cast<long>(n));
      for (std::size_t i = 0; i < sorted.size(); ++i) local[static_cast<std::size_t>(sorted[i] - 1)] = img[i];
      int sg = sign(local);
      for (const auto& sp : out) next.push_back({compose(local, sp.perm), sp.sign * sg});
    } while (std::next_permutation(img.begin(), img.end()));
    out = std::move(next);
  }
  std::sort(out.begin(), out.end(), [](const SignedPerm& a, const SignedPerm& b) { return a.perm < b.perm; });
  return out;
}

// ---------------------------------------------------------------------------
// Feature map.

inline Integer perm_divisibility(const PermParams& p) {
  validate(p);
  return factorial(p.n) / factorial(p.n - p.t);
}

/// Columns σ with LIS(σ) ≥ n−t, lexicographic; f_σ(π) = 1 iff π agrees with
/// σ off S(σ).
inline FeatureMap perm_feature_map(const PermParams& p, LisPolicy policy = LisPolicy::First, const Limits& lim = {}) {
  validate(p);
  const Integer nf = factorial(p.n);
  check_map_size(nf, dim_w_hook(p), lim);
  const Row nb = nf.get_ui();
  std::vector<Perm> perms;
  perms.reserve(nb);
  Perm s = identity_perm(p.n);
  do perms.push_back(s);
  while (std::next_permutation(s.begin(), s.end()));

  struct Column {
    Row row;
    std::vector<std::size_t> fixed;  // positions outside S(σ)
  };
  std::vector<Column> cols;
  for (Row r = 0; r < nb; ++r) {
    auto l = lis(perms[r], policy);
    if (static_cast<long>(l.length) < p.n - p.t) continue;
    Column c{r, {}};
    std::vector<char> in_s(static_cast<std::size_t>(p.n), 0);
    for (auto i : l.indices) in_s[i] = 1;
    for (std::size_t i = 0; i < in_s.size(); ++i)
      if (!in_s[i]) c.fixed.push_back(i);
    cols.push_back(std::move(c));
  }
  Matrix<std::int64_t> phi(nb, cols.size(), 0);
  std::vector<std::string> labels;
  for (std::size_t a = 0; a < cols.size(); ++a) {
    const Perm& sigma = perms[cols[a].row];
    labels.push_back(perm_string(sigma));
    for (Row b = 0; b < nb; ++b) {
      bool hit = true;
      for (auto i : cols[a].fixed)
        if (perms[b][i] != sigma[i]) {
          hit = false;
          break;
        }
      phi(b, a) = hit;
    }
  }
  // Column-echelon shape (first nonzero of column σ at row σ, equal to 1)
  // proves independence without an exact rank computation.
  bool echelon = true;
  for (std::size_t a = 0; a < cols.size() && echelon; ++a) {
    if (phi(cols[a].row, a) != 1) echelon = false;
    for (Row b = 0; b < cols[a].row && echelon; ++b)
      if (phi(b, a) != 0) echelon = false;
  }
  nlohmann::json params{{"n", p.n}, {"t", p.t}};
  FeatureMap fm = echelon ? FeatureMap(Unchecked{}, std::move(phi), std::move(labels), 1, "perm", params)
                          : FeatureMap(std::move(phi), std::move(labels), 1, "perm", params);
  const long n = p.n;
  fm.set_codec({[n](Row r) { return perm_string(perm_unrank(r, n)); },
                [n](const std::string& text) {
                  Perm s = parse_perm(text);
                  if (static_cast<long>(s.size()) != n) throw DomainError("permutation has wrong length: " + text);
                  return perm_rank(s);
                }});
  // Left multiplication π ↦ (to ∘ from⁻¹) ∘ π relabels values.
  fm.set_symmetry([n, nb](Row from, Row to) {
    Perm tau = compose(perm_unrank(to, n), inverse(perm_unrank(from, n)));
    Permutation pi(nb);
    for (Row b = 0; b < nb; ++b) pi[b] = perm_rank(compose(tau, perm_unrank(b, n)));
    return pi;
  });
  return fm;
}

/// True iff every pair of injective t-tuples (I, J) has exactly
/// |T|(n−t)!/n! members with π(I) = J.
inline bool is_twise(const std::vector<Perm>& t, long strength) {
  if (t.empty()) return true;
  const long n = static_cast<long>(t[0].size());
  for (const auto& s : t)
    if (static_cast<long>(s.size()) != n || !is_permutation(s)) throw DomainError("members must lie in one S_n");
  if (strength < 1 || strength > n) throw DomainError("t must satisfy 1 <= t <= n");
  const Integer tuples = factorial(n) / factorial(n - strength);
  if (!mpz_divisible_p(Integer(static_cast<unsigned long>(t.size())).get_mpz_t(), tuples.get_mpz_t())) return false;
  const unsigned long want = Integer(Integer(static_cast<unsigned long>(t.size())) / tuples).get_ui();
  // Index injective tuples by their rank among arrangements.
  auto tuple_code = [n](const std::vector<int>& x) {
    Row r = 0;
    std::vector<char> used(static_cast<std::size_t>(n + 1), 0);
    for (std::size_t i = 0; i < x.size(); ++i) {
      Row smaller = 0;
      for (int v = 1; v < x[i]; ++v) smaller += !used[static_cast<std::size_t>(v)];
      used[static_cast<std::size_t>(x[i])] = 1;
      r = r * static_cast<Row>(n - static_cast<long>(i)) + smaller;
    }
    return r;
  };
  std::map<std::pair<Row, Row>, unsigned long> hits;
  std::vector<std::vector<int>> arrangements;
  {
    std::vector<int> idx(static_cast<std::size_t>(strength));
    std::vector<char> used(static_cast<std::size_t>(n + 1), 0);
    auto rec = [&](auto&& self, long depth) -> void {
      if (depth == strength) {
        arrangements.push_back(idx);
        return;
      }
      for (int x = 1; x <= n; ++x) {
        if (used[static_cast<std::size_t>(x)]) continue;
        used[static_cast<std::size_t>(x)] = 1;
        idx[static_cast<std::size_t>(depth)] = x;
        self(self, depth + 1);
        used[static_cast<std::size_t>(x)] = 0;
      }
    };
    rec(rec, 0);
  }
  std::vector<int> img(static_cast<std::size_t>(strength));
  for (const auto& s : t)
    for (const auto& I : arrangements) {
      for (std::size_t i = 0; i < I.size(); ++i) img[i] = s[static_cast<std::size_t>(I[i] - 1)];
      ++hits[{tuple_code(I), tuple_code(img)}];
    }
  if (hits.size() != arrangements.size() * arrangements.size()) return false;
  return std::all_of(hits.begin(), hits.end(), [&](const auto& h) { return h.second == want; });
}

/// det(φᵗφ) for the LIS basis; refused above n = max_n.
inline Integer perm_gram_det(const PermParams& p, long max_n = 7, LisPolicy policy = LisPolicy::First,
                             const Limits& lim = {}) {
  validate(p);
  if (p.n > max_n)
    throw WorkBoundExceeded("permutation Gram determinant refused for n = " + std::to_string(p.n) + " > " +
                            std::to_string(max_n));
  return feature_gram_determinant(perm_feature_map(p, policy, lim));
}

/// Set partitions of [n] into blocks with sizes λ′ (sorted blocks, listed
/// by decreasing size then lexicographically), without repetition.
inline std::vector<std::vector<std::vector<int>>> column_set_partitions(const Partition& conj, long n) {
  std::set<std::vector<std::vector<int>>> out;
  std::vector<std::vector<int>> cur;
  std::vector<char> used(static_cast<std::size_t>(n + 1), 0);
  auto rec = [&](auto&& self, std::size_t block) -> void {
    if (block == conj.size()) {
      auto canon = cur;
      std::sort(canon.begin(), canon.end(), [](const auto& x, const auto& y) {
        return x.size() != y.size() ? x.size() > y.size() : x < y;
      });
      out.insert(std::move(canon));
      return;
    }
    std::vector<int> pool;
    for (int x = 1; x <= n; ++x)
      if (!used[static_cast<std::size_t>(x)]) pool.push_back(x);
    std::vector<int> blk;
    auto pick = [&](auto&& pself, std::size_t from) -> void {
      if (static_cast<long>(blk.size()) == conj[block]) {
        for (int x : blk) used[static_cast<std::size_t>(x)] = 1;
        cur.push_back(blk);
        self(self, block + 1);
        cur.pop_back();
        for (int x : blk) used[static_cast<std::size_t>(x)] = 0;
        return;
      }
      for (std::size_t j = from; j < pool.size(); ++j) {
        blk.push_back(pool[j]);
        pself(pself, j + 1);
        blk.pop_back();
      }
    };
    pick(pick, 0);
  };
  rec(rec, 0);
  return {out.begin(), out.end()};
}

/// Vectors γ over B with γ_{σ⁻¹π} = sign(σ) for σ ∈ Q_T, over all shapes
/// with λ₁ = n−t−1, all tableaux T of that shape and all π ∈ S_n. Tableaux
/// with the same column sets share Q_T, and vectors equal up to sign are
/// emitted once.
inline std::vector<std::vector<Integer>> antisymmetrizer_vectors(const PermParams& p, const Limits& lim = {}) {
  validate(p);
  std::vector<std::vector<Integer>> out;
  if (p.n - p.t - 1 < 1) return out;  // no shape with λ₁ = n−t−1
  const Integer nf = factorial(p.n);
  check_map_size(nf, nf, lim);
  const Row nb = nf.get_ui();
  std::vector<Perm> perms;
  Perm s = identity_perm(p.n);
  do perms.push_back(s);
  while (std::next_permutation(s.begin(), s.end()));

  std::set<std::vector<std::pair<Row, int>>> seen;
  for (const auto& shape : partitions(p.n)) {
    if (shape[0] != p.n - p.t - 1) continue;
    Partition conj = conjugate(shape);
    for (const auto& blocks : column_set_partitions(conj, p.n)) {
      // Q_T depends only on the column sets; build it from a tableau whose
      // columns are these blocks.
      Tableau tab;
      tab.rows.assign(static_cast<std::size_t>(conj[0]), {});
      for (const auto& b : blocks)
        for (std::size_t i = 0; i < b.size(); ++i) tab.rows[i].push_back(b[i]);
      std::vector<std::pair<Perm, int>> q;
      for (const auto& sp : column_stabilizer(tab)) q.push_back({inverse(sp.perm), sp.sign});
      for (const auto& pi : perms) {
        std::vector<std::pair<Row, int>> entries;
        for (const auto& [sinv, sg] : q) entries.push_back({perm_rank(compose(sinv, pi)), sg});
        std::sort(entries.begin(), entries.end());
        if (entries[0].second < 0)
          for (auto& e : entries) e.second = -e.second;
        if (!seen.insert(entries).second) continue;
        std::vector<Integer> v(nb, 0);
        for (const auto& [r, sg] : entries) v[r] = sg;
        out.push_back(std::move(v));
      }
    }
  }
  return out;
}

}  // namespace regcomb
