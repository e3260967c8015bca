#pragma once

// Helpers shared by the unit and acceptance suites: seeded random residue
// systems and brute-force oracles that do not touch the library's
// enumeration paths.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <set>
#include <vector>

#include "wpstack/sieve.hpp"

namespace wpstack::testing {

// Random explicit Omega_p at every prime p <= q_max, each with density in
// [0, max_density].
inline ResidueSystem random_residue_system(std::mt19937_64& rng, std::size_t arity, std::uint64_t q_max,
                                           unsigned m = 1, double max_density = 0.6) {
  ResidueSystem rs(m, arity);
  for (std::uint64_t p : primes_up_to(std::max<std::uint64_t>(q_max, 2))) {
    if (p > q_max) break;
    std::uint64_t q = rs.modulus(p);
    std::uint64_t cells = 1;
    for (std::size_t i = 0; i < arity; ++i) cells *= q;
    std::uniform_real_distribution<double> frac(0.0, max_density);
    auto k = static_cast<std::uint64_t>(frac(rng) * static_cast<double>(cells));
    std::vector<std::uint64_t> idx(cells);
    for (std::uint64_t i = 0; i < cells; ++i) idx[i] = i;
    std::shuffle(idx.begin(), idx.end(), rng);
    std::vector<Residue> tuples;
    for (std::uint64_t i = 0; i < k; ++i) {
      Residue r(arity);
      std::uint64_t v = idx[i];
      for (std::size_t j = 0; j < arity; ++j) {
        r[j] = v % q;
        v /= q;
      }
      tuples.push_back(r);
    }
    rs.add_explicit(p, tuples);
  }
  return rs;
}

// Plain nested-loop survivor count with Omega given as sets of tuples.
inline std::uint64_t survivors_oracle(const std::vector<unsigned>& weights, std::int64_t height,
                                      const std::vector<std::pair<std::uint64_t, std::set<Residue>>>& omega,
                                      unsigned m = 1) {
  std::vector<std::int64_t> bound;
  for (unsigned w : weights) {
    std::int64_t b = 1;
    for (unsigned k = 0; k < w; ++k) b *= height;
    bound.push_back(b);
  }
  std::uint64_t count = 0;
  std::vector<std::int64_t> x(weights.size());
  std::function<void(std::size_t)> rec = [&](std::size_t i) {
    if (i == weights.size()) {
      bool zero = true;
      for (auto v : x) zero = zero && v == 0;
      if (zero) return;
      for (std::size_t j = 0; j < weights.size(); ++j) {
        if (weights[j] % 2 == 1 && x[j] != 0) {
          if (x[j] < 0) return;
          break;
        }
      }
      for (const auto& [p, set] : omega) {
        std::int64_t q = 1;
        for (unsigned k = 0; k < m; ++k) q *= static_cast<std::int64_t>(p);
        Residue r;
        for (auto v : x) r.push_back(static_cast<std::uint64_t>(((v % q) + q) % q));
        if (set.count(r)) return;
      }
      ++count;
      return;
    }
    for (std::int64_t v = -bound[i]; v <= bound[i]; ++v) {
      x[i] = v;
      rec(i + 1);
    }
  };
  rec(0);
  return count;
}

// Number of squarefree integers in [1, n], by a divisor-square sieve.
inline std::uint64_t squarefree_count(std::uint64_t n) {
  std::vector<bool> bad(n + 1, false);
  for (std::uint64_t d = 2; d * d <= n; ++d)
    for (std::uint64_t j = d * d; j <= n; j += d * d) bad[j] = true;
  std::uint64_t c = 0;
  for (std::uint64_t i = 1; i <= n; ++i) c += bad[i] ? 0 : 1;
  return c;
}

// Weighted gcd straight from the definition: every prime up to max |x_i|.
inline std::int64_t wgcd_by_definition(const Coords& x, const WeightVector& a) {
  std::int64_t m = 0;
  for (auto v : x) m = std::max(m, std::abs(v));
  std::int64_t result = 1;
  for (std::int64_t p = 2; p <= m; ++p) {
    bool prime = true;
    for (std::int64_t d = 2; d * d <= p; ++d)
      if (p % d == 0) prime = false;
    if (!prime) continue;
    int e = kInfinite;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (x[i] == 0) continue;
      int v = 0;
      for (std::int64_t t = std::abs(x[i]); t % p == 0; t /= p) ++v;
      e = std::min(e, v / static_cast<int>(a[i]));
    }
    for (int k = 0; k < e; ++k) result *= p;
  }
  return result;
}

// Class key of an integer tuple with trivial wgcd: the only units are
// +-1, so the class is {x, (-1)^{a_i} x_i}. Key = the smaller of the two.
inline Coords class_key(Coords x, const WeightVector& a) {
  Coords y = x;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] % 2) y[i] = -y[i];
  return std::min(x, y);
}

// Naive nested-loop oracle over the full box (no sign restriction).
inline std::set<Coords> oracle_classes(const WeightVector& a, std::int64_t height, bool integral) {
  std::vector<std::int64_t> bound;
  for (unsigned w : a.weights()) {
    std::int64_t b = 1;
    for (unsigned k = 0; k < w; ++k) b *= height;
    bound.push_back(b);
  }
  std::set<Coords> classes;
  Coords x(a.size());
  std::function<void(std::size_t)> rec = [&](std::size_t i) {
    if (i == a.size()) {
      bool zero = std::all_of(x.begin(), x.end(), [](auto v) { return v == 0; });
      if (zero) return;
      if (integral) {
        std::int64_t g = 0;
        for (auto v : x) g = std::gcd(g, std::abs(v));
        if (g != 1) return;
      } else if (wgcd_by_definition(x, a) != 1) {
        return;
      }
      classes.insert(class_key(x, a));
      return;
    }
    for (std::int64_t v = -bound[i]; v <= bound[i]; ++v) {
      x[i] = v;
      rec(i + 1);
    }
  };
  rec(0);
  return classes;
}

inline bool weighted_primitive_g1(std::int64_t A, std::int64_t B) {
  for (std::int64_t p = 2; p * p * p * p <= std::llabs(A) || (A == 0 && p * p * p * p * p * p <= std::llabs(B)); ++p) {
    bool prime = true;
    for (std::int64_t q = 2; q * q <= p; ++q) prime = prime && p % q;
    if (!prime) continue;
    const std::int64_t p4 = p * p * p * p, p6 = p4 * p * p;
    if (A % p4 == 0 && B % p6 == 0) return false;
  }
  return true;
}

// Curves t^3 + A t + B with an integer root r are exactly A = c - e^2,
// B = -c e with e = r. Enumerates (e, c), keeps primitive points of the
// box, and deduplicates.
inline std::uint64_t parametrized_thin_count(int height, bool smooth_only) {
  std::int64_t X0 = 1, X1 = 1;
  for (int k = 0; k < 4; ++k) X0 *= height;
  for (int k = 0; k < 6; ++k) X1 *= height;
  std::set<std::pair<std::int64_t, std::int64_t>> seen;
  for (std::int64_t e = -X1; e <= X1; ++e)
    for (std::int64_t c = e * e - X0; c <= e * e + X0; ++c) {
      const std::int64_t A = c - e * e, B = -c * e;
      if (std::llabs(B) > X1 || (A == 0 && B == 0)) continue;
      if (!weighted_primitive_g1(A, B)) continue;
      if (smooth_only && 4 * A * A * A + 27 * B * B == 0) continue;
      seen.insert({A, B});
    }
  return seen.size();
}

}  // namespace wpstack::testing
