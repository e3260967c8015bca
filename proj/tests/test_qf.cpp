#include <map>
#include <random>

#include <gtest/gtest.h>

#include "wpstack/qf.hpp"

using namespace wpstack;

namespace {

// Prime ideal norms from the factorization of x^2 - D mod p, found by trying
// every residue; a repeated root means p ramifies.
std::vector<IdealNorm> ideal_norms_oracle(std::int64_t D, std::uint64_t Q) {
  std::map<std::uint64_t, unsigned> by_norm;
  for (std::uint64_t p = 2; p <= Q; ++p) {
    bool prime = true;
    for (std::uint64_t q = 2; q * q <= p; ++q) prime = prime && p % q;
    if (!prime) continue;
    const auto Dp = static_cast<std::uint64_t>(((D % static_cast<std::int64_t>(p)) + static_cast<std::int64_t>(p)) %
                                               static_cast<std::int64_t>(p));
    std::vector<std::uint64_t> roots;
    for (std::uint64_t x = 0; x < p; ++x)
      if (x * x % p == Dp) roots.push_back(x);
    if (roots.size() == 2) {
      by_norm[p] += 2;
    } else if (roots.size() == 1) {
      by_norm[p] += 1;
    } else if (p * p <= Q) {
      by_norm[p * p] += 1;
    }
  }
  std::vector<IdealNorm> out;
  for (auto [n, m] : by_norm) out.push_back({n, m});
  return out;
}

double to_double(const Real& r) { return r.convert_to<double>(); }

}  // namespace

TEST(QuadField, FundamentalUnits) {
  EXPECT_EQ(fundamental_unit(2), QuadInt(1, 1, 2));
  EXPECT_EQ(fundamental_unit(3), QuadInt(2, 1, 3));
  EXPECT_EQ(fundamental_unit(7), QuadInt(8, 3, 7));
  EXPECT_EQ(fundamental_unit(6), QuadInt(5, 2, 6));
  EXPECT_EQ(fundamental_unit(11), QuadInt(10, 3, 11));
  EXPECT_EQ(fundamental_unit(19), QuadInt(170, 39, 19));
  EXPECT_THROW(fundamental_unit(5), ValidationError);
  EXPECT_THROW(fundamental_unit(4), ValidationError);
}

TEST(QuadField, UnitsHaveNormOneAndBalancedLogs) {
  for (auto D : supported_discriminant_radicands()) {
    QuadField k(D);
    const BigInt n = k.unit().norm();
    EXPECT_TRUE(n == 1 || n == -1) << D;
    auto [l1, l2] = log_embed(k, k.unit());
    EXPECT_GT(l1, 0);
    EXPECT_LT(to_double(boost::multiprecision::abs(l1 + l2)), 1e-12);
    EXPECT_EQ(k.unit() * k.unit_power(-1), k.element(1, 0));
    // brute force: no smaller unit a + b sqrt D > 1 with b >= 1
    for (std::int64_t b = 1; b <= k.unit().b; ++b)
      for (std::int64_t sgn : {1, -1}) {
        BigInt target = BigInt(D) * b * b + sgn;
        if (target > 0 && is_perfect_square(target) && isqrt(target) < k.unit().a)
          ADD_FAILURE() << "smaller unit for D=" << D;
      }
  }
}

TEST(QuadField, LogEmbedExamples) {
  QuadField k(2);
  auto [a1, a2] = log_embed(k, k.unit());
  EXPECT_NEAR(to_double(a1), 0.881373587019543, 1e-12);
  EXPECT_NEAR(to_double(a2), -0.881373587019543, 1e-12);
  auto [b1, b2] = log_embed(k, k.element(1, 0));
  EXPECT_EQ(b1, 0);
  EXPECT_EQ(b2, 0);
  auto [c1, c2] = log_embed(k, k.element(0, 1));
  EXPECT_NEAR(to_double(c1), 0.346573590279973, 1e-12);
  EXPECT_NEAR(to_double(c2), 0.346573590279973, 1e-12);
  EXPECT_THROW(log_embed(k, k.element(0, 0)), ValidationError);
  // a large unit power loses nothing in the small embedding
  auto [d1, d2] = log_embed(k, k.unit_power(40));
  EXPECT_LT(to_double(boost::multiprecision::abs(d1 + d2)), 1e-40);
}

TEST(Domain, Examples) {
  DomainSpec spec(QuadField(2), WeightVector{1});
  QuadField k = spec.field;
  EXPECT_TRUE(in_domain({k.element(1, 0)}, spec));
  EXPECT_FALSE(in_domain({k.element(3, 2)}, spec));
  EXPECT_FALSE(in_domain({k.element(1, 1)}, spec));
  EXPECT_THROW(in_domain({k.element(0, 0)}, spec), ValidationError);

  auto r = reduce_to_domain({k.element(3, 2)}, spec);
  EXPECT_EQ(r.reduced, (QuadTuple{k.element(1, 0)}));
  EXPECT_EQ(r.k, -2);
  r = reduce_to_domain({k.element(7, 5)}, spec);
  EXPECT_EQ(r.reduced, (QuadTuple{k.element(1, 0)}));
  EXPECT_EQ(r.k, -3);
  r = reduce_to_domain({k.element(1, 0)}, spec);
  EXPECT_EQ(r.k, 0);
  DomainSpec spec12(QuadField(7), WeightVector{1, 2});
  QuadField k7 = spec12.field;
  r = reduce_to_domain({k7.element(1, 0), k7.element(1, 0)}, spec12);
  EXPECT_EQ(r.k, 0);
}

TEST(Domain, HeightExamples) {
  QuadField k(2);
  EXPECT_NEAR(to_double(height_infty_k(k, {k.element(1, 1)}, WeightVector{1})), 1.0, 1e-30);
  EXPECT_NEAR(to_double(height_infty_k(k, {k.element(2, 0)}, WeightVector{1})), 4.0, 1e-30);
  EXPECT_NEAR(to_double(height_infty_k(k, {k.element(0, 1)}, WeightVector{2})), std::sqrt(2.0), 1e-14);
  EXPECT_THROW(height_infty_k(k, {k.element(0, 0)}, WeightVector{1}), ValidationError);
}

TEST(Domain, FiniteTBoundaryIsClosed) {
  DomainSpec spec(QuadField(3), WeightVector{1});
  QuadTuple x{spec.field.element(2, 0)};
  EXPECT_TRUE(in_domain(x, spec, Real(2)));
  EXPECT_FALSE(in_domain(x, spec, Real("1.999999")));
}

TEST(Domain, RandomTuplesReduceUniquelyAndMatchHeight) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> coef(-40, 40), unit_exp(-5, 5), pick(0, 1);
  std::uniform_real_distribution<double> scale(0.3, 3.0);
  for (std::int64_t D : {2, 3, 6, 7}) {
    QuadField k(D);
    for (int trial = 0; trial < 250; ++trial) {
      WeightVector a = pick(rng) ? WeightVector{1} : WeightVector{1, 2};
      DomainSpec spec(k, a);
      QuadTuple x;
      for (std::size_t i = 0; i < a.size(); ++i) x.push_back(k.element(coef(rng), coef(rng)));
      if (std::all_of(x.begin(), x.end(), [](const QuadInt& q) { return q.is_zero(); })) x[0] = k.element(1, 0);
      x = unit_act(x, spec, unit_exp(rng));

      Reduction r = reduce_to_domain(x, spec);
      ASSERT_TRUE(in_domain(r.reduced, spec));
      for (std::int64_t kk = -10; kk <= 10; ++kk)
        if (kk != 0) ASSERT_FALSE(in_domain(unit_act(r.reduced, spec, kk), spec)) << "D=" << D << " k'=" << kk;

      const Real logH = log_height_infty_k(k, x, a);
      ASSERT_LT(to_double(boost::multiprecision::abs(logH - log_height_infty_k(k, r.reduced, a))), 1e-30);

      const Real T = boost::multiprecision::exp(logH) * scale(rng);
      if (boost::multiprecision::abs(boost::multiprecision::log(T) - logH) < Real("1e-20")) continue;
      const bool below = logH <= boost::multiprecision::log(T);
      ASSERT_EQ(below, in_domain(r.reduced, spec, boost::multiprecision::sqrt(T)));
    }
  }
}

TEST(Ideals, Examples) {
  EXPECT_EQ(prime_ideal_norms_up_to(QuadField(2), 10), (std::vector<IdealNorm>{{2, 1}, {7, 2}, {9, 1}}));
  EXPECT_EQ(prime_ideal_norms_up_to(QuadField(3), 2), (std::vector<IdealNorm>{{2, 1}}));
  EXPECT_TRUE(prime_ideal_norms_up_to(QuadField(7), 1).empty());
}

TEST(Ideals, MatchFactorizationOracle) {
  for (auto D : supported_discriminant_radicands()) {
    QuadField k(D);
    for (std::uint64_t Q : {2, 10, 97, 1000, 10000})
      ASSERT_EQ(prime_ideal_norms_up_to(k, Q), ideal_norms_oracle(D, Q)) << "D=" << D << " Q=" << Q;
  }
}

TEST(Ideals, GExamples) {
  QuadField k(2);
  EXPECT_EQ(compute_G_k(k, 10, Rational(1, 2)), 5);
  EXPECT_EQ(compute_G_k(k, 14, Rational(1, 2)), 7);
  EXPECT_EQ(compute_G_k(k, 1000, 0), 1);
  EXPECT_EQ(compute_G_k(k, 1, Rational(1, 2)), 1);
  EXPECT_THROW(compute_G_k(k, 10, 1), ValidationError);
  // nu = 1/3 weights each prime ideal by 1/2
  EXPECT_EQ(compute_G_k(k, 14, Rational(1, 3)), Rational(1) + Rational(4, 2) + Rational(2, 4));
}

TEST(Ideals, GMonotone) {
  QuadField k(6);
  Rational prev = 0;
  for (std::uint64_t Q = 1; Q <= 200; ++Q) {
    Rational g = compute_G_k(k, Q, Rational(2, 5));
    ASSERT_GE(g, prev);
    ASSERT_GE(g, compute_G_k(k, Q, Rational(1, 5)));
    prev = g;
  }
}
