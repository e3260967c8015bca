#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "support.hpp"
#include "wpstack/sieve.hpp"

using namespace wpstack;
using wpstack::testing::random_residue_system;
using wpstack::testing::squarefree_count;
using wpstack::testing::survivors_oracle;

namespace {

ResidueSystem constant_density(std::uint64_t q_max, Rational nu) {
  ResidueSystem rs;
  for (auto p : primes_up_to(std::max<std::uint64_t>(q_max, 2))) rs.add_density(p, nu);
  return rs;
}

}  // namespace

TEST(ComputeG, Examples) {
  EXPECT_EQ(compute_G(3, constant_density(3, Rational(1, 2))), 3);
  EXPECT_EQ(compute_G(50, constant_density(50, 0)), 1);
  EXPECT_EQ(compute_G(10, constant_density(10, Rational(1, 2))), 7);
  EXPECT_EQ(compute_G(100, constant_density(100, Rational(1, 2))), 61);
}

TEST(ComputeG, HalfDensityCountsSquarefree) {
  auto rs = constant_density(2000, Rational(1, 2));
  for (std::uint64_t q : {1u, 2u, 17u, 10u, 100u, 1000u, 2000u}) EXPECT_EQ(compute_G(q, rs), squarefree_count(q)) << q;
}

TEST(ComputeG, RejectsFullDensity) {
  ResidueSystem rs;
  rs.add_density(3, 1);
  EXPECT_THROW(compute_G(5, rs), ValidationError);
  EXPECT_NO_THROW(compute_G(2, rs));  // p = 3 lies beyond Q
  EXPECT_THROW(compute_G(0, rs), ValidationError);
}

TEST(ComputeG, MonotoneInQAndDensity) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    auto rs = random_residue_system(rng, 2, 20);
    Rational prev = 0;
    for (std::uint64_t q = 1; q <= 20; ++q) {
      Rational g = compute_G(q, rs);
      EXPECT_GE(g, prev);
      prev = g;
    }
    ResidueSystem bigger;
    for (const auto& [p, e] : rs.entries()) bigger.add_density(p, e.density + (1 - e.density) / 2);
    EXPECT_GE(compute_G(20, bigger), compute_G(20, rs));
  }
}

TEST(SieveUpperBound, Examples) {
  auto half = constant_density(3, Rational(1, 2));
  EXPECT_NEAR(static_cast<double>(sieve_upper_bound({10, 3, WeightVector{1, 1}}, half)), 361.0 / 3.0, 1e-9);
  EXPECT_NEAR(static_cast<double>(sieve_upper_bound({10, 1, WeightVector{1, 1}}, half)), 121.0, 1e-9);
  ResidueSystem two;
  two.add_density(2, Rational(1, 4));
  EXPECT_NEAR(static_cast<double>(sieve_upper_bound({2, 2, WeightVector{4, 6}}, two)), 1020.0, 1e-9);
}

TEST(Survivors, Examples) {
  WeightVector a{1, 1};
  ResidueSystem rs(1, 2);
  rs.add_explicit(2, {{0, 0}});
  EXPECT_EQ(survivors({1, 2, a}, rs), 4u);

  ResidueSystem empty(1, 2);
  EXPECT_EQ(survivors({3, 7, a}, empty), survivors_oracle({1, 1}, 3, {}));

  ResidueSystem even_x0(1, 2);
  even_x0.add_explicit(2, {{0, 0}, {0, 1}});
  EXPECT_EQ(survivors({2, 2, a}, even_x0), survivors_oracle({1, 1}, 2, {{2, {{0, 0}, {0, 1}}}}));
  // sign-canonical tuples with x0 odd: x0 in {1}, x1 in [-2, 2]
  EXPECT_EQ(survivors({2, 2, a}, even_x0), 5u);
}

TEST(Survivors, DensityOnlyEntryCannotSieve) {
  ResidueSystem rs;
  rs.add_density(2, Rational(1, 4));
  EXPECT_THROW(survivors({2, 3, WeightVector{1, 1}}, rs), ValidationError);
}

TEST(Survivors, MatchesOracleOnRandomSystems) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<unsigned> w = trial % 2 ? std::vector<unsigned>{1, 2} : std::vector<unsigned>{1, 1};
    std::int64_t b = 1 + trial % 5;
    auto rs = random_residue_system(rng, 2, 11);
    std::vector<std::pair<std::uint64_t, std::set<Residue>>> omega;
    for (const auto& [p, e] : rs.entries()) {
      std::set<Residue> s;
      for (std::uint64_t i = 0; i < p * p; ++i)
        if ((*e.table)[i]) s.insert({i % p, i / p});
      omega.emplace_back(p, s);
    }
    EXPECT_EQ(survivors({b, 11, WeightVector(w)}, rs), survivors_oracle(w, b, omega));
  }
}

TEST(Survivors, PredicateEntriesAndPrimePowers) {
  // Omega_{4} = {x0 = 0 mod 4} through a predicate, m = 2.
  ResidueSystem rs(2);
  rs.add_predicate(2, 2, [](const std::uint64_t* r) { return r[0] == 0; });
  EXPECT_EQ(rs.density(2), Rational(1, 4));
  std::set<Residue> omega;
  for (std::uint64_t y = 0; y < 4; ++y) omega.insert({0, y});
  EXPECT_EQ(survivors({3, 2, WeightVector{1, 2}}, rs), survivors_oracle({1, 2}, 3, {{2, omega}}, 2));
}

TEST(Survivors, NonincreasingInQ) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    auto rs = random_residue_system(rng, 2, 13);
    std::uint64_t prev = ~0ull;
    for (std::uint64_t q = 1; q <= 13; ++q) {
      auto s = survivors({4, q, WeightVector{1, 2}}, rs);
      EXPECT_LE(s, prev);
      prev = s;
    }
  }
}

TEST(LargeSieve, Examples) {
  ResidueSystem rs(1, 2);
  rs.add_explicit(2, {{0, 0}});
  auto r = testable_ls_inequality({1, 2, WeightVector{1, 1}}, rs);
  EXPECT_EQ(r.lhs, 4u);
  // (sqrt 3 + 2)^4 / G with G = 1 + (1/4)/(3/4) = 4/3
  EXPECT_NEAR(static_cast<double>(r.rhs), (97.0 + 56.0 * std::sqrt(3.0)) * 0.75, 1e-9);
  EXPECT_TRUE(r.holds);

  ResidueSystem none(1, 2);
  auto t = testable_ls_inequality({3, 5, WeightVector{1, 2}}, none);
  EXPECT_EQ(t.lhs, survivors_oracle({1, 2}, 3, {}));
  EXPECT_NEAR(static_cast<double>(t.rhs), std::pow(std::sqrt(7.0) + 5, 2) * std::pow(std::sqrt(19.0) + 5, 2), 1e-6);
  EXPECT_TRUE(t.holds);
}

TEST(LargeSieve, HoldsOnRandomSystemsIncludingPrimePowers) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 40; ++trial) {
    unsigned m = trial % 4 == 3 ? 2 : 1;
    std::uint64_t q = 2 + trial % (m == 2 ? 6 : 19);
    auto rs = random_residue_system(rng, 2, q, m, 0.95);
    auto r = testable_ls_inequality({1 + trial % 8, q, WeightVector{1, 1}}, rs);
    EXPECT_TRUE(r.holds) << "lhs " << r.lhs << " rhs " << static_cast<double>(r.rhs);
  }
}

TEST(ResidueFile, ParsesBothRowKinds) {
  std::istringstream in(
      "# comment\n"
      "2 1 explicit 0,0\n"
      "2 1 explicit 1,1\n"
      "3 1 1 3   # density only\n");
  auto rs = parse_residue_system(in);
  EXPECT_EQ(rs.modulus_exponent(), 1u);
  EXPECT_EQ(rs.arity(), 2u);
  EXPECT_EQ(rs.density(2), Rational(1, 2));
  EXPECT_EQ(rs.density(3), Rational(1, 3));
  EXPECT_FALSE(rs.entries().at(3).has_membership());
}

TEST(ResidueFile, RejectsMalformedRows) {
  std::istringstream mixed("2 1 explicit 0,0\n3 2 explicit 0,0\n");
  EXPECT_THROW(parse_residue_system(mixed), ValidationError);
  std::istringstream range("3 1 explicit 0,3\n");
  EXPECT_THROW(parse_residue_system(range), ValidationError);
  std::istringstream notprime("4 1 1 2\n");
  EXPECT_THROW(parse_residue_system(notprime), ValidationError);
  std::istringstream both("2 1 1 2\n2 1 explicit 0,1\n");
  EXPECT_THROW(parse_residue_system(both), ValidationError);
}
