#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "wpstack/arith.hpp"

namespace wpstack {

// Dense univariate polynomial over Z; coeffs[k] multiplies t^k.
struct IntPoly {
  std::vector<BigInt> coeffs;

  IntPoly() = default;
  explicit IntPoly(std::vector<BigInt> c) : coeffs(std::move(c)) { trim(); }

  // -1 for the zero polynomial.
  int degree() const { return static_cast<int>(coeffs.size()) - 1; }
  bool is_zero() const { return coeffs.empty(); }
  const BigInt& lead() const { return coeffs.back(); }

  void trim() {
    while (!coeffs.empty() && coeffs.back() == 0) coeffs.pop_back();
  }

  BigInt operator()(const BigInt& t) const {
    BigInt acc = 0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * t + *it;
    return acc;
  }

  IntPoly derivative() const {
    std::vector<BigInt> d;
    for (std::size_t k = 1; k < coeffs.size(); ++k) d.push_back(coeffs[k] * static_cast<unsigned>(k));
    return IntPoly(std::move(d));
  }

  BigInt content() const {
    BigInt g = 0;
    for (const auto& c : coeffs) g = gcd(g, BigInt(abs(c)));
    return g;
  }

  friend bool operator==(const IntPoly&, const IntPoly&) = default;
};

namespace detail {

// lc(b)^{deg a - deg b + 1} a mod b, exact over Z.
inline IntPoly pseudo_remainder(IntPoly a, const IntPoly& b) {
  const int db = b.degree();
  int e = a.degree() - db + 1;
  while (!a.is_zero() && a.degree() >= db) {
    const int shift = a.degree() - db;
    BigInt la = a.lead();
    for (auto& c : a.coeffs) c *= b.lead();
    for (int k = 0; k <= db; ++k) a.coeffs[static_cast<std::size_t>(k + shift)] -= la * b.coeffs[static_cast<std::size_t>(k)];
    a.trim();
    --e;
  }
  BigInt scale = pow(b.lead(), static_cast<unsigned>(std::max(e, 0)));
  for (auto& c : a.coeffs) c *= scale;
  return a;
}

inline BigInt exact_div(const BigInt& x, const BigInt& y) {
  BigInt q = x / y;
  if (q * y != x) throw InvariantViolation("subresultant: inexact division");
  return q;
}

}  // namespace detail

// Res(a, b) by the subresultant algorithm (Collins; Cohen, Alg. 3.3.7).
inline BigInt resultant(IntPoly a, IntPoly b) {
  if (a.is_zero() || b.is_zero()) return 0;
  if (a.degree() == 0 && b.degree() == 0) return 1;
  BigInt ca = a.content(), cb = b.content();
  for (auto& c : a.coeffs) c = detail::exact_div(c, ca);
  for (auto& c : b.coeffs) c = detail::exact_div(c, cb);
  BigInt t = pow(ca, static_cast<unsigned>(b.degree())) * pow(cb, static_cast<unsigned>(a.degree()));
  int s = 1;
  if (a.degree() < b.degree()) {
    std::swap(a, b);
    if (a.degree() % 2 == 1 && b.degree() % 2 == 1) s = -1;
  }
  BigInt g = 1, h = 1;
  while (b.degree() > 0) {
    const int delta = a.degree() - b.degree();
    if (a.degree() % 2 == 1 && b.degree() % 2 == 1) s = -s;
    IntPoly r = detail::pseudo_remainder(a, b);
    a = std::move(b);
    BigInt div = g * pow(h, static_cast<unsigned>(delta));
    for (auto& c : r.coeffs) c = detail::exact_div(c, div);
    b = std::move(r);
    g = a.lead();
    // h <- g^delta / h^{delta-1}
    if (delta > 0)
      h = detail::exact_div(pow(g, static_cast<unsigned>(delta)), pow(h, static_cast<unsigned>(delta - 1)));
    if (b.is_zero()) return 0;
  }
  // b is now a nonzero constant and deg a >= 1
  const auto da = static_cast<unsigned>(a.degree());
  return s * t * detail::exact_div(pow(b.lead(), da), pow(h, da - 1));
}

// disc(f) = (-1)^{n(n-1)/2} Res(f, f') / lc(f).
inline BigInt discriminant(const IntPoly& f) {
  const int n = f.degree();
  if (n < 1) throw ValidationError("discriminant of a constant");
  if (n == 1) return 1;
  BigInt r = detail::exact_div(resultant(f, f.derivative()), f.lead());
  return (n * (n - 1) / 2) % 2 ? BigInt(-r) : r;
}

namespace detail {

inline std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t p) {
  return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % p);
}

inline std::uint64_t powmod(std::uint64_t a, std::uint64_t e, std::uint64_t p) {
  std::uint64_t r = 1 % p;
  a %= p;
  while (e) {
    if (e & 1) r = mulmod(r, a, p);
    a = mulmod(a, a, p);
    e >>= 1;
  }
  return r;
}

inline std::uint64_t invmod(std::uint64_t a, std::uint64_t p) { return powmod(a, p - 2, p); }

}  // namespace detail

// Res(a, b) mod a prime p via the Euclidean algorithm over F_p.
// Coefficients are given already reduced, coeffs[k] for t^k.
inline std::uint64_t resultant_mod(std::vector<std::uint64_t> a, std::vector<std::uint64_t> b, std::uint64_t p) {
  auto trim = [](std::vector<std::uint64_t>& v) {
    while (!v.empty() && v.back() == 0) v.pop_back();
  };
  trim(a);
  trim(b);
  if (a.empty() || b.empty()) return 0;
  std::uint64_t acc = 1;
  for (;;) {
    const std::size_t m = a.size() - 1, n = b.size() - 1;
    if (n == 0) return detail::mulmod(acc, detail::powmod(b[0], m, p), p);
    // r = a mod b
    std::vector<std::uint64_t> r = a;
    const std::uint64_t inv = detail::invmod(b.back(), p);
    for (std::size_t k = m + 1; k-- > n;) {
      if (k >= r.size() || r[k] == 0) continue;
      const std::uint64_t q = detail::mulmod(r[k], inv, p);
      for (std::size_t j = 0; j <= n; ++j) {
        std::uint64_t sub = detail::mulmod(q, b[j], p);
        std::size_t idx = k - n + j;
        r[idx] = (r[idx] + p - sub) % p;
      }
    }
    r.resize(n);
    trim(r);
    if (r.empty()) return 0;
    // Res(a,b) = (-1)^{mn} lc(b)^{m - deg r} Res(b, r)
    if ((m * n) % 2 == 1) acc = (p - acc) % p;
    acc = detail::mulmod(acc, detail::powmod(b.back(), m - (r.size() - 1), p), p);
    a = std::move(b);
    b = std::move(r);
  }
}

}  // namespace wpstack
