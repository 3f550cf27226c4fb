// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on failure.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

#include "regcomb/designs.hpp"
#include "regcomb/lclt.hpp"
#include "regcomb/orthogonal_arrays.hpp"
#include "regcomb/permutations.hpp"

using namespace regcomb;

namespace {

struct Check {
  std::ostringstream note;
  bool ok = true;

  void expect(bool cond, const std::string& what) {
    if (!cond && ok) note << "first failure: " << what;
    ok = ok && cond;
  }
};

std::vector<Perm> cyclic_group(int n) {
  std::vector<Perm> out;
  for (int a = 0; a < n; ++a) {
    Perm s(static_cast<std::size_t>(n));
    for (int x = 0; x < n; ++x) s[static_cast<std::size_t>(x)] = (x + a) % n + 1;
    out.push_back(s);
  }
  return out;
}

std::vector<Perm> symmetric_group(int n) {
  std::vector<Perm> out;
  Perm s = identity_perm(n);
  do out.push_back(s);
  while (std::next_permutation(s.begin(), s.end()));
  return out;
}

Integer pp(long p, unsigned long e) { return ipow(Integer(p), e); }

void criterion1(Check& c) {
  struct Row {
    long n, t;
    Integer det;
  };
  const std::vector<Row> table{
      {3, 1, 6},
      {3, 2, 1},
      {4, 1, 3 * pp(2, 18)},
      {4, 2, 3 * pp(2, 3)},
      {4, 3, 1},
      {5, 1, pp(5, 9) * pp(3, 17) * pp(2, 19)},
      {5, 2, pp(5, 9) * pp(3, 2) * pp(2, 84)},
      {5, 3, 5 * 3 * pp(2, 3)},
      {6, 1, 5 * pp(3, 42) * pp(2, 94)},
  };
  auto start = std::chrono::steady_clock::now();
  for (const auto& r : table) {
    Integer got = perm_gram_det({r.n, r.t});
    c.expect(got == r.det, "(" + std::to_string(r.n) + "," + std::to_string(r.t) + ") got " + got.get_str());
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  c.expect(secs < 300, "took " + std::to_string(secs) + " s");
  if (c.ok) c.note << "9 table entries, " << std::fixed << secs << " s";
}

void criterion2(Check& c) {
  int cases = 0;
  for (long q : {2L, 3L})
    for (long n = 1; n <= 4; ++n)
      for (long t = 0; t <= n; ++t) {
        OAParams p{q, n, t};
        Integer direct = gram_determinant(oa_feature_map(p).integer_matrix());
        const Integer e = Integer(n) * binomial(n - 1, t) * ipow(Integer(q - 1), static_cast<unsigned long>(t));
        Integer closed = ipow(Integer(q), e.get_ui());
        c.expect(direct == closed, "q=" + std::to_string(q) + " n=" + std::to_string(n) + " t=" + std::to_string(t));
        ++cases;
      }
  for (long q : {2L, 3L, 4L, 5L}) c.expect(oa_recursion_holds(q, 12), "recursion q=" + std::to_string(q));
  if (c.ok) c.note << cases << " direct determinants, recursion for q <= 5, n <= 12";
}

void criterion3(Check& c) {
  struct Case {
    FeatureMap fm;
    std::size_t step;
  };
  std::vector<Case> cases;
  cases.push_back({oa_feature_map({2, 2, 1}), 2});
  cases.push_back({oa_feature_map({2, 3, 1}), 2});
  cases.push_back({design_feature_map({4, 2, 1}), 1});
  cases.push_back({design_feature_map({5, 2, 1}), 1});
  cases.push_back({perm_feature_map({3, 1}), 3});
  int checked = 0;
  for (const auto& [fm, step] : cases)
    for (std::size_t n = 0; n <= fm.size(); n += step) {
      Integer a = count_via_identity(fm, n);
      Integer e = enumerate_structures(fm, n).count;
      c.expect(a == e, fm.family() + fm.params().dump() + " N=" + std::to_string(n) + ": " + a.get_str() + " vs " + e.get_str());
      ++checked;
    }
  if (c.ok) c.note << checked << " (instance, N) pairs";
}

void criterion4(Check& c) {
  c.expect(enumerate_structures(oa_feature_map({2, 2, 1}), 2).count == 2, "OA (2,2,1,N=2)");
  c.expect(enumerate_structures(design_feature_map({4, 2, 1}), 2).count == 3, "perfect matchings of K4");
  c.expect(enumerate_structures(perm_feature_map({3, 1}), 3).count == 2, "1-wise 3-subsets of S3");
  std::vector<Subset> fano{{1, 2, 3}, {1, 4, 5}, {1, 6, 7}, {2, 4, 6}, {2, 5, 7}, {3, 4, 7}, {3, 5, 6}};
  auto chk = is_design({7, 3, 2}, fano);
  c.expect(chk.is_design && chk.lambda.back() == 1, "Fano plane");
  if (c.ok) c.note << "2, 3, 2, Fano lambda=1";
}

void criterion5(Check& c) {
  for (DesignParams p : {DesignParams{3, 2, 1}, DesignParams{4, 2, 1}, DesignParams{5, 2, 1}, DesignParams{5, 3, 1},
                         DesignParams{6, 3, 2}}) {
    Rational a = design_rho_squared(p), b = rho_squared(design_feature_map(p));
    c.expect(a == b, "(" + std::to_string(p.v) + "," + std::to_string(p.k) + "," + std::to_string(p.t) + ") " +
                         a.get_str() + " vs " + b.get_str());
  }
  if (c.ok) c.note << "5 parameter sets";
}

void criterion6(Check& c) {
  int oa_cases = 0, design_vectors = 0;
  for (long q : {2L, 3L})
    for (long n = 1; n <= 4; ++n)
      for (long t = 0; t <= n; ++t) {
        OAParams p{q, n, t};
        auto fm = oa_feature_map(p);
        auto cert = oa_decoding_vectors(p);
        c.expect(cert.multiplier == 1 && cert.c4 == ipow(Integer(2), static_cast<unsigned long>(t)), "OA certificate constants");
        c.expect(!find_certificate_failure(fm, cert), "OA q=" + std::to_string(q) + " n=" + std::to_string(n) + " t=" + std::to_string(t));
        ++oa_cases;
      }
  for (long v = 2; v <= 8; ++v)
    for (long k = 1; k < v; ++k)
      for (long t = 1; t <= k && k <= v - t; ++t) {
        if (binomial(v, k) > 35) continue;
        DesignParams p{v, k, t};
        auto fm = design_feature_map(p);
        auto cert = design_certificate(p);
        c.expect(cert.c4 == ipow(Integer(8), static_cast<unsigned long>(t)) * binomial(k, t), "design c4");
        c.expect(!find_certificate_failure(fm, cert), "design certificate (" + std::to_string(v) + "," + std::to_string(k) + "," + std::to_string(t) + ")");
        if (k == t) continue;
        const Integer m = factorial(k) / factorial(k - t);
        for (Row r = 0; r < fm.dim(); ++r) {
          Subset a = colex_unrank(r, t);
          auto g = design_gamma(p, a, canonical_u(p, a));
          auto img = apply_phi(fm, g);
          for (std::size_t j = 0; j < fm.dim(); ++j) c.expect(img[j] == (j == r ? m : Integer(0)), "phi(gamma_{a,u}) = k!/(k-t)! e_a");
          ++design_vectors;
        }
      }
  if (c.ok) c.note << oa_cases << " OA certificates, " << design_vectors << " design vectors";
}

void criterion7(Check& c) {
  for (long n = 1; n <= 7; ++n)
    for (long t = 1; t <= n; ++t) c.expect(dim_w_census({n, t}) == dim_w_hook({n, t}), "dim W n=" + std::to_string(n) + " t=" + std::to_string(t));
  int perp_cases = 0;
  for (long n = 2; n <= 5; ++n)
    for (long t = 1; t < n; ++t) {
      PermParams p{n, t};
      auto fm = perm_feature_map(p);
      auto vecs = antisymmetrizer_vectors(p);
      const Integer bound = factorial(t + 2);
      bool ortho = true;
      for (const auto& v : vecs) {
        for (const auto& x : apply_phi(fm, v)) ortho = ortho && x == 0;
        c.expect(vector_norm(v, Norm::L1) <= bound, "l1 bound n=" + std::to_string(n) + " t=" + std::to_string(t));
      }
      c.expect(ortho, "orthogonality n=" + std::to_string(n) + " t=" + std::to_string(t));
      RowEchelon e(fm.size());
      for (const auto& v : vecs) e.insert(v);
      c.expect(Integer(static_cast<unsigned long>(e.rank())) == factorial(n) - dim_w_hook(p),
               "rank n=" + std::to_string(n) + " t=" + std::to_string(t));
      ++perp_cases;
    }
  for (long n = 1; n <= 5; ++n)
    for (long t = 1; t <= n; ++t)
      c.expect(divisibility_constant(perm_feature_map({n, t})) == factorial(n) / factorial(n - t),
               "divisibility n=" + std::to_string(n) + " t=" + std::to_string(t));
  if (c.ok) c.note << "census n <= 7, " << perp_cases << " perp spans, divisibility n <= 5";
}

void criterion8(Check& c) {
  PrecisionScope scope;
  Real prev = 1;
  Real d16 = 0;
  for (std::size_t m : {16u, 32u, 64u}) {
    auto fm = constant_feature_map(m);
    auto r = empirical_delta({fm, Rational(1, 2)}, Point{static_cast<std::int64_t>(m / 2)});
    Real a = abs(r.delta);
    if (m == 16) {
      d16 = r.delta;
      c.expect(a < Real("0.02"), "|delta| < 0.02 at |B| = 16");
    } else {
      c.expect(a < prev, "|delta| decreasing at |B| = " + std::to_string(m));
    }
    prev = a;
  }
  auto fm = oa_feature_map({2, 4, 1});
  WalkSpec w{fm, Rational(1, 2)};
  Point mean;
  for (auto s : fm.column_sum()) mean.push_back(s / 2);
  auto r = empirical_delta(w, mean);
  c.expect(abs(r.delta) < 1, "OA (2,4,1) |delta| < 1");
  auto dist = exact_distribution(w);
  auto mom = walk_moments(w);
  const std::size_t d = fm.dim();
  std::vector<Rational> mu(d, 0);
  RatMatrix second(d, d, Rational(0));
  for (const auto& [pt, pr] : dist)
    for (std::size_t i = 0; i < d; ++i) {
      mu[i] += pr * pt[i];
      for (std::size_t j = 0; j < d; ++j) second(i, j) += pr * pt[i] * pt[j];
    }
  c.expect(mu == mom.mean, "mean matches");
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) c.expect(second(i, j) - mu[i] * mu[j] == mom.covariance(i, j), "covariance matches");
  if (c.ok) c.note << "delta(16) = " << format_real(d16, 6) << ", OA (2,4,1) delta = " << format_real(r.delta, 6);
}

void criterion9(Check& c) {
  for (int n = 1; n <= 8; ++n) c.expect(is_twise(cyclic_group(n), 1), "cyclic n=" + std::to_string(n));
  std::vector<Perm> affine;
  for (int a = 1; a < 5; ++a)
    for (int b = 0; b < 5; ++b) {
      Perm s(5);
      for (int x = 0; x < 5; ++x) s[static_cast<std::size_t>(x)] = (a * x + b) % 5 + 1;
      affine.push_back(s);
    }
  c.expect(is_twise(affine, 2), "affine group over F5");
  for (int n = 1; n <= 5; ++n)
    for (int t = 1; t <= n; ++t) c.expect(is_twise(symmetric_group(n), t), "S_" + std::to_string(n) + " t=" + std::to_string(t));
  if (c.ok) c.note << "cyclic n <= 8, AGL(1,5), S_n n <= 5";
}

void criterion10(Check& c) {
  for (long t = 1; t <= 30; ++t) c.expect(lcm_binomials(t) <= ipow(Integer(4), static_cast<unsigned long>(t)), "t=" + std::to_string(t));
  c.expect(lcm_binomials(4) == 12, "lcm(4) = 12");
  if (c.ok) c.note << "t <= 30, lcm(4) = 12";
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<void(Check&)>>> criteria{
      {"permutation Gram table", criterion1},
      {"OA Gram closed form and recursion", criterion2},
      {"counting identity equals enumeration", criterion3},
      {"hand-verifiable counts", criterion4},
      {"design rho consistency", criterion5},
      {"decoding certificates", criterion6},
      {"permutation structure", criterion7},
      {"LCLT quality", criterion8},
      {"known t-wise families", criterion9},
      {"lcm(t) <= 4^t", criterion10},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Check c;
    try {
      criteria[i].second(c);
    } catch (const std::exception& e) {
      c.ok = false;
      c.note << "exception: " << e.what();
    }
    std::cout << (c.ok ? "PASS" : "FAIL") << " criterion " << i + 1 << ": " << criteria[i].first << " (" << c.note.str()
              << ")" << std::endl;
    failed += !c.ok;
  }
  return failed ? 1 : 0;
}
