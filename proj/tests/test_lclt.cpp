#include <gtest/gtest.h>

#include <random>

#include "regcomb/designs.hpp"
#include "regcomb/lclt.hpp"
#include "regcomb/orthogonal_arrays.hpp"
#include "regcomb/permutations.hpp"

using namespace regcomb;

namespace {

Point mean_point(const FeatureMap& fm, const Rational& p) {
  Point out;
  for (auto s : fm.column_sum()) {
    Rational e = p * Rational(to_integer(s));
    EXPECT_TRUE(is_integral(e));
    out.push_back(Rational(e).get_num().get_si());
  }
  return out;
}

std::vector<Real> random_theta(std::mt19937_64& rng, std::size_t d) {
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<Real> th;
  for (std::size_t a = 0; a < d; ++a) th.emplace_back(u(rng));
  return th;
}

Real abs_diff(const Complex& x, const Complex& y) { return (x - y).abs(); }

}  // namespace

TEST(ExactDistribution, BinomialCase) {
  auto fm = constant_feature_map(10);
  Rational p(1, 3);
  auto dist = exact_distribution({fm, p});
  ASSERT_EQ(dist.size(), 11u);
  for (long k = 0; k <= 10; ++k) {
    Rational want = Rational(binomial(10, k)) * rpow(p, static_cast<unsigned long>(k)) *
                    rpow(Rational(1 - p), static_cast<unsigned long>(10 - k));
    EXPECT_EQ(dist.at(Point{k}), want) << k;
  }
}

TEST(ExactDistribution, OaMeanProbability) {
  auto fm = oa_feature_map({2, 2, 1});
  WalkSpec w{fm, Rational(1, 2)};
  EXPECT_EQ(mean_point(fm, w.p), (Point{2, 1, 1}));
  EXPECT_EQ(prob_at(w, Point{2, 1, 1}).prob, Rational(1, 8));
  EXPECT_EQ(prob_at(w, Point{50, 1, 1}).prob, 0);
  auto off = prob_at(w, Point{2, 1, 1});
  EXPECT_TRUE(off.in_lattice);
}

TEST(ExactDistribution, OffLatticePointIsZero) {
  // φ = [[2]]: the lattice is 2Z.
  FeatureMap fm(Matrix<std::int64_t>{{2}, {2}}, {}, 2);
  auto r = prob_at(WalkSpec{fm, Rational(1, 2)}, Point{1});
  EXPECT_FALSE(r.in_lattice);
  EXPECT_EQ(r.prob, 0);
}

TEST(ExactDistribution, MassAndMoments) {
  std::vector<FeatureMap> maps;
  maps.push_back(oa_feature_map({2, 2, 1}));
  maps.push_back(oa_feature_map({2, 3, 2}));
  maps.push_back(oa_feature_map({3, 2, 1}));
  maps.push_back(design_feature_map({5, 2, 1}));
  maps.push_back(perm_feature_map({3, 1}));
  maps.push_back(perm_feature_map({3, 3}));
  for (const auto& fm : maps)
    for (Rational p : {Rational(1, 2), Rational(1, 3), Rational(5, 7)}) {
      WalkSpec w{fm, p};
      auto dist = exact_distribution(w);
      auto mom = walk_moments(w);
      const std::size_t d = fm.dim();
      Rational mass = 0;
      std::vector<Rational> mean(d, 0);
      RatMatrix second(d, d, Rational(0));
      for (const auto& [pt, pr] : dist) {
        mass += pr;
        for (std::size_t i = 0; i < d; ++i) {
          mean[i] += pr * pt[i];
          for (std::size_t j = 0; j < d; ++j) second(i, j) += pr * pt[i] * pt[j];
        }
      }
      EXPECT_EQ(mass, 1);
      EXPECT_EQ(mean, mom.mean);
      for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) EXPECT_EQ(second(i, j) - mean[i] * mean[j], mom.covariance(i, j));
      // Support lies in the lattice.
      auto lat = feature_lattice(fm);
      for (const auto& [pt, pr] : dist) {
        std::vector<Rational> v;
        for (auto x : pt) v.emplace_back(to_integer(x));
        ASSERT_TRUE(lattice_membership(v, lat));
      }
    }
}

TEST(ExactDistribution, ComplementSymmetry) {
  for (const auto& fm : {oa_feature_map({2, 3, 1}), design_feature_map({4, 2, 1}), perm_feature_map({3, 2})}) {
    Rational p(2, 7);
    auto a = exact_distribution({fm, p});
    auto b = exact_distribution({fm, Rational(1 - p)});
    ASSERT_EQ(a.size(), b.size());
    for (const auto& [pt, pr] : a) {
      Point flip(pt.size());
      for (std::size_t i = 0; i < pt.size(); ++i) flip[i] = fm.column_sum()[i] - pt[i];
      EXPECT_EQ(b.at(flip), pr);
      // p = 1/2 is self-dual.
    }
    auto h = exact_distribution({fm, Rational(1, 2)});
    for (const auto& [pt, pr] : h) {
      Point flip(pt.size());
      for (std::size_t i = 0; i < pt.size(); ++i) flip[i] = fm.column_sum()[i] - pt[i];
      EXPECT_EQ(h.at(flip), pr);
    }
  }
}

TEST(ExactDistribution, StateBound) {
  Limits lim;
  lim.dp_states = 10;
  auto fm = oa_feature_map({2, 3, 1});
  EXPECT_THROW(exact_distribution({fm, Rational(1, 2)}, lim), WorkBoundExceeded);
  EXPECT_THROW(exact_distribution({fm, Rational(0)}), DomainError);
  EXPECT_THROW(exact_distribution({fm, Rational(1)}), DomainError);
}

TEST(CountingIdentity, Examples) {
  auto oa = oa_feature_map({2, 2, 1});
  EXPECT_EQ(count_via_identity(oa, 2), 2);
  EXPECT_EQ(count_via_identity(oa, 1), 0);
  EXPECT_EQ(count_via_identity(design_feature_map({4, 2, 1}), 2), 3);
}

TEST(CountingIdentity, MatchesEnumeration) {
  std::vector<FeatureMap> maps;
  for (long n = 1; n <= 4; ++n) maps.push_back(oa_feature_map({2, n, 1}));
  for (long v = 3; v <= 5; ++v) maps.push_back(design_feature_map({v, 2, 1}));
  maps.push_back(perm_feature_map({3, 1}));
  maps.push_back(perm_feature_map({3, 2}));
  for (const auto& fm : maps)
    for (std::size_t n = 0; n <= fm.size(); ++n) {
      auto e = enumerate_structures(fm, n);
      EXPECT_EQ(count_via_identity(fm, n), e.count)
          << fm.family() << fm.params().dump() << " N=" << n;
    }
}

TEST(CountingIdentity, NeedsConstants) {
  FeatureMap fm(Matrix<std::int64_t>{{1, 0}, {0, 1}, {1, 1}}, {}, 1);
  // Column span of φ does not contain (1,1,1).
  EXPECT_THROW(count_via_identity(fm, 1), DomainError);
}

TEST(MainTerm, ConstantsOnlyDensity) {
  PrecisionScope scope;
  auto fm = constant_feature_map(16);
  auto m = gaussian_main_term({fm, Rational(1, 2)}, Point{8});
  EXPECT_EQ(m.half_exponent, 0);
  Real want = 1 / boost::multiprecision::sqrt(8 * real_pi());
  EXPECT_LT(abs(m.value - want), Real("1e-55"));
  EXPECT_NEAR(m.value.convert_to<double>(), 0.199471, 1e-6);
}

TEST(MainTerm, ExponentIsProjectionNorm) {
  std::mt19937_64 rng(11);
  for (const auto& fm : {oa_feature_map({2, 3, 1}), design_feature_map({5, 2, 1}), perm_feature_map({4, 2})})
    for (Rational p : {Rational(1, 2), Rational(1, 5)}) {
      for (int it = 0; it < 10; ++it) {
        std::vector<Rational> g(fm.size());
        std::vector<Integer> gi(fm.size());
        for (std::size_t b = 0; b < fm.size(); ++b) {
          gi[b] = static_cast<long>(rng() % 5) - 2;
          g[b] = gi[b];
        }
        auto img = apply_phi(fm, gi);
        Point lambda;
        for (const auto& x : img) lambda.push_back(x.get_si());
        auto m = gaussian_main_term({fm, p}, lambda);
        EXPECT_EQ(m.half_exponent, projection_norm_sq(fm, g, p) / (2 * p * (1 - p)));
      }
    }
}

TEST(MainTerm, MatchesClosedFormAtMean) {
  // At the mean the term is det L/√((2π p(1−p))^d det R).
  PrecisionScope scope;
  auto fm = oa_feature_map({2, 3, 1});
  Rational p(1, 2);
  auto m = gaussian_main_term({fm, p}, mean_point(fm, p));
  Real d = 4;
  Real want = 1 / boost::multiprecision::sqrt(boost::multiprecision::pow(2 * real_pi() / 4, d) *
                                              to_real(feature_gram_determinant(fm)));
  EXPECT_LT(abs(m.value / want - 1), Real("1e-50"));
}

TEST(EmpiricalDelta, BinomialValueAndMonotone) {
  PrecisionScope scope;
  Real prev = 1;
  for (std::size_t m : {16u, 32u, 64u}) {
    auto fm = constant_feature_map(m);
    auto r = empirical_delta({fm, Rational(1, 2)}, Point{static_cast<std::int64_t>(m / 2)});
    EXPECT_FALSE(r.log_scale);
    // Oracle: C(m, m/2)/2^m against 1/√(π m/2).
    Real exact = to_real(Rational(binomial(static_cast<long>(m), static_cast<long>(m / 2)),
                                  ipow(Integer(2), static_cast<unsigned long>(m))));
    Real gauss = 1 / boost::multiprecision::sqrt(real_pi() * m / 2);
    EXPECT_LT(abs(r.delta - (exact / gauss - 1)), Real("1e-50"));
    Real a = abs(r.delta);
    EXPECT_LT(a, prev);
    prev = a;
    if (m == 16) {
      EXPECT_NEAR(r.delta.convert_to<double>(), -0.01549, 5e-5);
      EXPECT_LT(a, Real("0.02"));
    }
  }
}

TEST(EmpiricalDelta, OrthogonalArray241) {
  auto fm = oa_feature_map({2, 4, 1});
  WalkSpec w{fm, Rational(1, 2)};
  auto r = empirical_delta(w, mean_point(fm, w.p));
  EXPECT_LT(abs(r.delta), 1);
}

TEST(Fourier, ZeroAndConsistency) {
  PrecisionScope scope;
  std::mt19937_64 rng(3);
  for (const auto& fm : {oa_feature_map({2, 2, 1}), oa_feature_map({2, 3, 1}), design_feature_map({4, 2, 1}),
                         perm_feature_map({3, 1})}) {
    WalkSpec w{fm, Rational(2, 5)};
    auto one = fourier_transform(w, std::vector<Real>(fm.dim(), Real(0)));
    EXPECT_LT(abs_diff(one, Complex{Real(1), Real(0)}), Real("1e-55"));
    auto dist = exact_distribution(w);
    for (int it = 0; it < 20; ++it) {
      auto th = random_theta(rng, fm.dim());
      EXPECT_LT(abs_diff(fourier_transform(w, th), fourier_from_distribution(dist, th)), Real("1e-30"));
    }
  }
}

TEST(Fourier, DualLatticePeriodicity) {
  PrecisionScope scope;
  std::mt19937_64 rng(4);
  for (const auto& fm : {oa_feature_map({2, 3, 1}), design_feature_map({5, 2, 1}), oa_feature_map({3, 2, 1})}) {
    WalkSpec w{fm, Rational(1, 3)};
    auto dual = dual_basis(feature_lattice(fm));
    for (int it = 0; it < 10; ++it) {
      auto th = random_theta(rng, fm.dim());
      auto shifted = th;
      for (std::size_t i = 0; i < dual.rows(); ++i) {
        long k = static_cast<long>(rng() % 7) - 3;
        for (std::size_t a = 0; a < fm.dim(); ++a) shifted[a] += to_real(Rational(k * dual(i, a)));
      }
      EXPECT_LT(abs_diff(fourier_transform(w, th), fourier_transform(w, shifted)), Real("1e-40"));
    }
  }
}

TEST(Tameness, Ratios) {
  PrecisionScope scope;
  std::mt19937_64 rng(8);
  auto c = constant_feature_map(9);
  for (int it = 0; it < 5; ++it) {
    auto th = random_theta(rng, 1);
    EXPECT_LT(abs(tameness_ratio(c, th) - 1), Real("1e-55"));
  }
  auto oa = oa_feature_map({2, 2, 1});
  for (std::size_t a = 0; a < oa.dim(); ++a) {
    std::vector<Real> th(oa.dim(), Real(0));
    th[a] = 1;
    EXPECT_GE(tameness_ratio(oa, th), 1);
  }
  EXPECT_THROW(tameness_ratio(oa, std::vector<Real>(oa.dim(), Real(0))), DomainError);
  auto s1 = tameness_sweep(oa_feature_map({2, 3, 1}), 1000, 7);
  auto s2 = tameness_sweep(oa_feature_map({2, 3, 1}), 1000, 7);
  EXPECT_EQ(s1.samples, 1000u);
  EXPECT_EQ(s1.max_ratio, s2.max_ratio);
  EXPECT_GE(s1.max_ratio, s1.mean_ratio);
  EXPECT_GE(s1.mean_ratio, 1);
}

TEST(Epsilon, Value) {
  PrecisionScope scope;
  Real e = epsilon_diagnostic(3, 100);
  EXPECT_NEAR(e.convert_to<double>(), std::sqrt(6 * std::log(100.0) / 100), 1e-12);
  EXPECT_THROW(epsilon_diagnostic(3, 1), DomainError);
}

TEST(NullVector, Examples) {
  FeatureMap dup(Matrix<std::int64_t>{{1, 0}, {0, 1}, {1, 0}}, {}, 1);
  auto nv = find_short_null_vector(dup, {0, 2});
  ASSERT_TRUE(nv);
  EXPECT_EQ(nv->coeffs, (std::vector<int>{1, -1}));
  EXPECT_FALSE(find_short_null_vector(dup, {1}));

  auto oa = oa_feature_map({2, 3, 1});
  std::mt19937_64 rng(21);
  for (int it = 0; it < 20; ++it) {
    std::vector<Row> all(oa.size());
    std::iota(all.begin(), all.end(), Row{0});
    std::shuffle(all.begin(), all.end(), rng);
    std::vector<Row> s(all.begin(), all.begin() + 6);
    auto r = find_short_null_vector(oa, s);
    if (!r) continue;
    std::vector<Integer> g(oa.size(), 0);
    std::size_t nz = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      g[s[i]] = r->coeffs[i];
      nz += r->coeffs[i] != 0;
    }
    EXPECT_GE(nz, 2u);
    for (const auto& x : apply_phi(oa, g)) EXPECT_EQ(x, 0);
  }
}

TEST(NullVector, ExhaustiveAgreement) {
  // Oracle: brute force over {−1,0,1}^S.
  auto oa = oa_feature_map({2, 3, 1});
  std::mt19937_64 rng(9);
  for (int it = 0; it < 30; ++it) {
    std::vector<Row> all(oa.size());
    std::iota(all.begin(), all.end(), Row{0});
    std::shuffle(all.begin(), all.end(), rng);
    const std::size_t k = 2 + rng() % 5;
    std::vector<Row> s(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k));
    const std::size_t need = std::max<std::size_t>(1, (k + 3) / 4);
    bool exists = false;
    std::size_t total = 1;
    for (std::size_t i = 0; i < k; ++i) total *= 3;
    for (std::size_t code = 1; code < total && !exists; ++code) {
      std::vector<Integer> g(oa.size(), 0);
      std::size_t c = code, nz = 0;
      for (std::size_t i = 0; i < k; ++i, c /= 3) {
        int d = static_cast<int>(c % 3);
        g[s[i]] = d == 0 ? 0 : (d == 1 ? 1 : -1);
        nz += d != 0;
      }
      if (nz < need) continue;
      auto img = apply_phi(oa, g);
      exists = std::all_of(img.begin(), img.end(), [](const Integer& x) { return x == 0; });
    }
    EXPECT_EQ(find_short_null_vector(oa, s).has_value(), exists) << k;
  }
}

TEST(LocalCorrection, OrthogonalArrayAndDesign) {
  for (const auto& fm : {oa_feature_map({2, 3, 1}), design_feature_map({5, 2, 1}), perm_feature_map({3, 1})}) {
    for (Row e : {Row{0}, Row{3}}) {
      auto r = local_correct(fm, {e}, e, 1234);
      ASSERT_TRUE(std::holds_alternative<Correction>(r)) << fm.family();
      const auto& c = std::get<Correction>(r);
      EXPECT_EQ(c.gamma[e], 0);
      auto img = apply_phi(fm, c.gamma);
      for (std::size_t a = 0; a < fm.dim(); ++a) EXPECT_EQ(img[a], fm[e][a]);
      EXPECT_EQ(c.l1, vector_norm(c.gamma, Norm::L1));
      EXPECT_GE(c.attempts, 1u);
    }
  }
  // Larger erased set keeps E untouched.
  auto oa = oa_feature_map({2, 4, 1});
  std::vector<Row> erased{0, 5, 9};
  auto r = local_correct(oa, erased, 5, 99);
  ASSERT_TRUE(std::holds_alternative<Correction>(r));
  for (Row b : erased) EXPECT_EQ(std::get<Correction>(r).gamma[b], 0);
}

TEST(LocalCorrection, Deterministic) {
  auto fm = design_feature_map({5, 2, 1});
  auto a = std::get<Correction>(local_correct(fm, {2}, 2, 5));
  auto b = std::get<Correction>(local_correct(fm, {2}, 2, 5));
  EXPECT_EQ(a.gamma, b.gamma);
  EXPECT_EQ(a.attempts, b.attempts);
}

TEST(LocalCorrection, Errors) {
  auto fm = oa_feature_map({2, 3, 1});
  EXPECT_THROW(local_correct(fm, {}, 0, 1), DomainError);
  EXPECT_THROW(local_correct(fm, {1}, 0, 1), DomainError);
  FeatureMap bare(Matrix<std::int64_t>{{1}, {1}}, {}, 1);
  EXPECT_THROW(local_correct(bare, {0}, 0, 1), DomainError);
  // Every row erased: no correction can exist.
  auto c = constant_feature_map(4);
  auto r = local_correct(c, {0, 1, 2, 3}, 0, 1, std::nullopt, 5);
  ASSERT_TRUE(std::holds_alternative<CorrectionFailure>(r));
  EXPECT_EQ(std::get<CorrectionFailure>(r).attempts, 5u);
}
