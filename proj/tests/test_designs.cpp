#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "regcomb/designs.hpp"

using namespace regcomb;

namespace {

std::vector<DesignParams> constructible(std::size_t max_blocks) {
  std::vector<DesignParams> out;
  for (long v = 2; v <= 9; ++v)
    for (long k = 1; k <= v; ++k)
      for (long t = 1; t <= k; ++t)
        if (k <= v - t && binomial(v, k) <= static_cast<unsigned long>(max_blocks)) out.push_back({v, k, t});
  return out;
}

std::vector<Subset> fano() {
  return {{1, 2, 4}, {2, 3, 5}, {3, 4, 6}, {4, 5, 7}, {1, 5, 6}, {2, 6, 7}, {1, 3, 7}};
}

// Column a of φ applied to γ: Σ_b γ_b [a ⊆ b], recomputed from subsets.
std::vector<Integer> image(const DesignParams& p, const std::vector<Integer>& g) {
  std::vector<Integer> out(binomial_u64(p.v, p.t), 0);
  for (Row b = 0; b < g.size(); ++b) {
    if (g[b] == 0) continue;
    Subset blk = colex_unrank(b, p.k);
    for (Row a = 0; a < out.size(); ++a) {
      Subset s = colex_unrank(a, p.t);
      if (std::includes(blk.begin(), blk.end(), s.begin(), s.end())) out[a] += g[b];
    }
  }
  return out;
}

}  // namespace

TEST(Colex, RankUnrank) {
  for (long k = 1; k <= 4; ++k) {
    Row n = binomial_u64(8, k);
    Subset prev;
    for (Row r = 0; r < n; ++r) {
      Subset s = colex_unrank(r, k);
      EXPECT_EQ(colex_rank(s), r);
      if (r) {
        // colex: compare reversed sequences
        EXPECT_TRUE(std::lexicographical_compare(prev.rbegin(), prev.rend(), s.rbegin(), s.rend()));
      }
      prev = s;
    }
  }
}

TEST(DesignMap, Examples) {
  auto k4 = design_feature_map({4, 2, 1});
  EXPECT_EQ(k4.size(), 6u);
  EXPECT_EQ(k4.dim(), 4u);
  for (Row b = 0; b < 6; ++b) {
    int s = 0;
    for (std::size_t a = 0; a < 4; ++a) s += k4[b][a];
    EXPECT_EQ(s, 2);
  }
  auto f = design_feature_map({7, 3, 2});
  EXPECT_EQ(f.size(), 35u);
  EXPECT_EQ(f.dim(), 21u);
  EXPECT_THROW(design_feature_map({4, 3, 2}), DomainError);
  EXPECT_EQ(k4.encode(k4.decode("3,1")), "1,3");
  EXPECT_THROW(k4.decode("1,2,3"), DomainError);
}

TEST(IsDesign, Examples) {
  auto all = is_design({5, 2, 1}, [] {
    std::vector<Subset> b;
    for_each_sub(iota_set(5), 2, [&](const Subset& s) { b.push_back(s); });
    return b;
  }());
  EXPECT_TRUE(all.is_design);
  EXPECT_EQ(all.lambda.back(), binomial(4, 1));
  auto fp = is_design({7, 3, 2}, fano());
  EXPECT_TRUE(fp.is_design);
  EXPECT_EQ(fp.lambda.back(), 1);
  EXPECT_TRUE(is_design({4, 2, 1}, std::vector<Subset>{{1, 2}, {3, 4}}).is_design);
  EXPECT_FALSE(is_design({4, 2, 1}, std::vector<Subset>{{1, 2}, {1, 3}}).is_design);
  EXPECT_THROW(is_design({4, 2, 1}, std::vector<Subset>{{1, 2, 3}}), DomainError);
  EXPECT_THROW(is_design({4, 2, 1}, std::vector<Subset>{{1, 5}}), DomainError);
}

TEST(IsDesign, AgreesWithFeatureMapExhaustively) {
  for (const auto& p : constructible(15)) {
    auto fm = design_feature_map(p);
    const Row nb = fm.size();
    for (std::uint32_t mask = 0; mask < (1u << nb); ++mask) {
      std::vector<Row> rows;
      for (Row b = 0; b < nb; ++b)
        if (mask >> b & 1) rows.push_back(b);
      Structure t(rows);
      auto chk = is_design(p, t);
      ASSERT_EQ(chk.is_design, verify_structure(fm, t)) << p.v << p.k << p.t << " " << mask;
      if (chk.is_design) {
        for (const auto& l : chk.lambda) EXPECT_TRUE(is_integral(l));
      }
    }
  }
}

TEST(DesignDivisibility, Examples) {
  EXPECT_EQ(design_divisibility({4, 2, 1}), 2);
  EXPECT_EQ(design_divisibility({7, 3, 2}), 7);
  for (const auto& p : constructible(200))
    EXPECT_LE(design_divisibility(p), binomial(p.v, p.t) * lcm_binomials(p.t));
}

TEST(DesignDivisibility, MatchesLattice) {
  for (const auto& p : constructible(35)) {
    auto fm = design_feature_map(p);
    EXPECT_EQ(divisibility_constant(fm), design_divisibility(p)) << p.v << p.k << p.t;
  }
}

TEST(LcmBinomials, Values) {
  EXPECT_EQ(lcm_binomials(1), 1);
  EXPECT_EQ(lcm_binomials(4), 12);
  for (long t = 1; t <= 30; ++t) {
    // independent oracle: lcm over the row of Pascal's triangle built by addition
    std::vector<Integer> row{1};
    for (long i = 0; i < t; ++i) {
      std::vector<Integer> next(row.size() + 1, 0);
      for (std::size_t j = 0; j < row.size(); ++j) {
        next[j] += row[j];
        next[j + 1] += row[j];
      }
      row = next;
    }
    Integer l = 1;
    for (const auto& x : row) l = lcm(l, x);
    EXPECT_EQ(lcm_binomials(t), l);
    EXPECT_LE(l, ipow(4, static_cast<unsigned long>(t)));
  }
}

TEST(DesignDecoding, Example) {
  DesignParams p{4, 2, 1};
  auto g = design_gamma(p, {1}, {1, 2, 3});
  auto img = image(p, g);
  EXPECT_EQ(img, (std::vector<Integer>{2, 0, 0, 0}));
  EXPECT_THROW(design_gamma(p, {4}, {1, 2, 3}), DomainError);
}

TEST(DesignDecoding, AllConstructible) {
  for (const auto& p : constructible(35)) {
    const Integer kf = factorial(p.k) / factorial(p.k - p.t);
    const Integer scaled = binomial(p.k, p.t) * lcm_binomials(p.t);
    const Integer bound = ipow(8, static_cast<unsigned long>(p.t)) * binomial(p.k, p.t);
    for (Row r = 0; r < binomial_u64(p.v, p.t); ++r) {
      Subset a = colex_unrank(r, p.t);
      Subset u = canonical_u(p, a);
      auto gp = design_decoding_vectors(p, a, u);
      auto img = image(p, gp);
      for (Row j = 0; j < img.size(); ++j) EXPECT_EQ(img[j], j == r ? scaled : Integer(0));
      EXPECT_LE(vector_norm(gp, Norm::L1), bound);
      if (p.k > p.t) {
        auto g = design_gamma(p, a, u);
        auto im = image(p, g);
        for (Row j = 0; j < im.size(); ++j) EXPECT_EQ(im[j], j == r ? kf : Integer(0));
        // γ′ is the lcm(t)/t! multiple of γ.
        for (Row b = 0; b < g.size(); ++b) EXPECT_EQ(gp[b] * factorial(p.t), g[b] * lcm_binomials(p.t));
      }
    }
    EXPECT_FALSE(find_certificate_failure(design_feature_map(p), design_certificate(p)));
  }
}

TEST(DesignDecoding, NonCanonicalU) {
  for (DesignParams p : {DesignParams{5, 3, 1}, DesignParams{6, 3, 2}}) {
    const Integer bound = ipow(8, static_cast<unsigned long>(p.t)) * binomial(p.k, p.t);
    for (Row r = 0; r < binomial_u64(p.v, p.t); ++r) {
      Subset a = colex_unrank(r, p.t);
      Subset rest;
      for (long x = 1; x <= p.v; ++x)
        if (!std::binary_search(a.begin(), a.end(), x)) rest.push_back(x);
      for_each_sub(rest, p.k, [&](const Subset& extra) {
        Subset u = a;
        u.insert(u.end(), extra.begin(), extra.end());
        std::sort(u.begin(), u.end());
        EXPECT_LE(vector_norm(design_decoding_vectors(p, a, u), Norm::L1), bound);
      });
    }
  }
}

TEST(BinomialIdentity, AlternatingSum) {
  // Σ_i (−1)^i C(a,i) C(c+i,b) = 0 for a > b ≥ 0, c ≥ 0.
  for (long a = 1; a <= 8; ++a)
    for (long b = 0; b < a; ++b)
      for (long c = 0; c <= 8; ++c) {
        Integer s = 0;
        for (long i = 0; i <= a; ++i) s += (i % 2 ? -1 : 1) * binomial(a, i) * binomial(c + i, b);
        EXPECT_EQ(s, 0) << a << b << c;
      }
}

TEST(DesignRho, Examples) {
  EXPECT_EQ(design_rho_squared({3, 2, 1}), 1);
  EXPECT_EQ(design_rho_squared({4, 2, 1}), Rational(1, 12));
  EXPECT_EQ(rho_squared(design_feature_map({4, 2, 1})), Rational(1, 12));
  for (DesignParams p : {DesignParams{4, 2, 1}, DesignParams{5, 2, 1}, DesignParams{5, 3, 1}, DesignParams{6, 3, 2}})
    EXPECT_EQ(design_gram_det(p), gram_determinant(design_feature_map(p).integer_matrix()));
}

TEST(DesignRho, ProductMatchesLatticeAndGram) {
  for (const auto& p : constructible(35)) {
    auto fm = design_feature_map(p);
    EXPECT_EQ(design_rho_squared(p), rho_squared(fm)) << p.v << p.k << p.t;
    EXPECT_EQ(design_lattice_det(p), feature_lattice(fm).det());
  }
}

TEST(DesignSymmetry, Relabelings) {
  auto fm = design_feature_map({5, 2, 1});
  for (Row to = 0; to < fm.size(); ++to) {
    auto pi = fm.symmetry()(3, to);
    EXPECT_EQ(pi[3], to);
    EXPECT_TRUE(check_symmetry(fm, pi));
  }
}

TEST(DesignCount, Examples) {
  PrecisionScope scope;
  auto h = hypergraph_count(4, 2, 1, Real(1));
  ASSERT_TRUE(h.log_main);
  // ρ = 1/√12, dim 4, p = 1/3, N = 2.
  const double pq = (1.0 / 3) * (2.0 / 3);
  const double oracle = std::sqrt(1.0 / 12) / (std::pow(2 * M_PI * pq, 2) * std::pow(1.0 / 3, 2) * std::pow(2.0 / 3, 4));
  EXPECT_NEAR(static_cast<double>(h.main()), oracle, 1e-12);
  EXPECT_NEAR(static_cast<double>(h.main()), 6.75, 0.01);
  auto z = design_count({7, 3, 2}, 3, Real(1));
  ASSERT_TRUE(z.exact);
  EXPECT_EQ(*z.exact, 0);
  EXPECT_NE(z.reason.find("lambda_1"), std::string::npos);
  EXPECT_EQ(*hypergraph_count(5, 2, 1, Real(1)).exact, 0);
}

TEST(DesignCount, MatchesGenericAndHypergraph) {
  PrecisionScope scope;
  for (const auto& p : constructible(35)) {
    auto fm = design_feature_map(p);
    Rational rho = rho_squared(fm);
    Integer ground = binomial(p.v, p.k);
    for (Integer n = 1; n < ground; ++n) {
      auto r = design_count(p, n, Real(1));
      if (r.exact) continue;
      EXPECT_LT(static_cast<double>(abs(*r.log_main - log_main_term(rho, binomial(p.v, p.t), n, ground))), 1e-50);
      if (p.t == 1) {
        auto n_long = n.get_si();
        if ((n_long * p.k) % p.v != 0) continue;
        long d = n_long * p.k / p.v;
        auto h = hypergraph_count(p.v, p.k, d, Real(1));
        EXPECT_LT(static_cast<double>(abs(*r.log_main - *h.log_main)), 1e-50);
      }
    }
  }
}
