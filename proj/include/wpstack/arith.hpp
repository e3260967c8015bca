#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "wpstack/errors.hpp"

namespace wpstack {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

// v_p(0); compares greater than every finite valuation.
inline constexpr int kInfinite = std::numeric_limits<int>::max();

struct PrimePower {
  std::uint64_t prime;
  unsigned exponent;
  friend bool operator==(const PrimePower&, const PrimePower&) = default;
};

struct Factorization {
  std::uint64_t value = 1;
  std::vector<PrimePower> factors;

  // Product of the factors, recomputed; equals value for a well-formed result.
  BigInt product() const {
    BigInt r = 1;
    for (const auto& [p, e] : factors)
      for (unsigned i = 0; i < e; ++i) r *= p;
    return r;
  }
};

namespace detail {

inline std::vector<std::uint32_t> sieve_primes(std::uint64_t limit) {
  std::vector<std::uint32_t> out;
  if (limit < 2) return out;
  std::vector<bool> composite(limit + 1, false);
  for (std::uint64_t i = 2; i <= limit; ++i) {
    if (composite[i]) continue;
    out.push_back(static_cast<std::uint32_t>(i));
    for (std::uint64_t j = i * i; j <= limit; j += i) composite[j] = true;
  }
  return out;
}

// Primes below 2^16, built once and shared read-only.
inline const std::vector<std::uint32_t>& small_primes() {
  static const std::vector<std::uint32_t> table = sieve_primes(1u << 16);
  return table;
}

}  // namespace detail

inline std::vector<std::uint64_t> primes_up_to(std::uint64_t limit) {
  if (limit == 0) throw ValidationError("primes_up_to: bound must be >= 1");
  auto raw = detail::sieve_primes(limit);
  return {raw.begin(), raw.end()};
}

inline Factorization factorize(std::uint64_t n) {
  if (n == 0) throw ValidationError("factorize: zero has no factorization");
  Factorization f;
  f.value = n;
  auto take = [&](std::uint64_t p) {
    unsigned e = 0;
    while (n % p == 0) {
      n /= p;
      ++e;
    }
    if (e) f.factors.push_back({p, e});
  };
  for (std::uint64_t p : detail::small_primes()) {
    if (p * p > n) break;
    take(p);
  }
  // Past the table: 6k +/- 1 trial division. Inputs here stay desk-sized.
  std::uint64_t start = detail::small_primes().back() + 2;
  start += (6 - start % 6) % 6;
  for (std::uint64_t k = start;; k += 6) {
    if ((k - 1) > n / (k - 1)) break;
    take(k - 1);
    if ((k + 1) > n / (k + 1)) break;
    take(k + 1);
  }
  if (n > 1) f.factors.push_back({n, 1});
  return f;
}

// Factorization of |n| for multiprecision inputs. Small primes are stripped
// first; the cofactor must then fit in 64 bits.
inline std::vector<std::pair<BigInt, unsigned>> factorize_big(BigInt n) {
  if (n == 0) throw ValidationError("factorize: zero has no factorization");
  n = abs(n);
  std::vector<std::pair<BigInt, unsigned>> out;
  for (std::uint64_t p : detail::small_primes()) {
    if (BigInt(p) * p > n) break;
    unsigned e = 0;
    while (n % p == 0) {
      n /= p;
      ++e;
    }
    if (e) out.emplace_back(BigInt(p), e);
  }
  if (n == 1) return out;
  if (n > std::numeric_limits<std::uint64_t>::max())
    throw ValidationError("factorize: cofactor " + n.str() + " exceeds 64 bits");
  for (const auto& [p, e] : factorize(static_cast<std::uint64_t>(n)).factors) out.emplace_back(BigInt(p), e);
  return out;
}

inline bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  auto f = factorize(n);
  return f.factors.size() == 1 && f.factors[0].exponent == 1;
}

inline int valuation(const BigInt& n, std::uint64_t p) {
  if (!is_prime(p)) throw ValidationError("valuation: modulus " + std::to_string(p) + " is not prime");
  if (n == 0) return kInfinite;
  BigInt m = abs(n);
  int e = 0;
  while (m % p == 0) {
    m /= p;
    ++e;
  }
  return e;
}

inline int valuation(std::int64_t n, std::uint64_t p) { return valuation(BigInt(n), p); }

inline int moebius(std::uint64_t n) {
  if (n == 0) throw ValidationError("moebius: argument must be positive");
  auto f = factorize(n);
  for (const auto& pe : f.factors)
    if (pe.exponent > 1) return 0;
  return f.factors.size() % 2 ? -1 : 1;
}

// All positive divisors, ascending.
inline std::vector<std::uint64_t> divisors(const Factorization& f) {
  std::vector<std::uint64_t> out{1};
  for (const auto& [p, e] : f.factors) {
    const std::size_t base = out.size();
    std::uint64_t pk = 1;
    for (unsigned k = 1; k <= e; ++k) {
      pk *= p;
      for (std::size_t i = 0; i < base; ++i) out.push_back(out[i] * pk);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Smallest-prime-factor table for fast repeated factoring of bounded values.
class SmallestFactorTable {
 public:
  explicit SmallestFactorTable(std::uint32_t limit) : spf_(std::size_t(limit) + 1, 0) {
    for (std::uint32_t i = 2; i <= limit; ++i) {
      if (spf_[i]) continue;
      for (std::uint64_t j = i; j <= limit; j += i)
        if (!spf_[j]) spf_[j] = i;
    }
  }

  std::uint32_t limit() const { return static_cast<std::uint32_t>(spf_.size() - 1); }
  std::uint32_t smallest(std::uint32_t n) const { return spf_[n]; }

  // Calls sink(p) once per distinct prime p | n, for 1 <= n <= limit.
  template <class Sink>
  void for_each_prime(std::uint32_t n, Sink&& sink) const {
    while (n > 1) {
      std::uint32_t p = spf_[n];
      sink(p);
      while (n % p == 0) n /= p;
    }
  }

  Factorization factorize(std::uint32_t n) const {
    Factorization f;
    f.value = n;
    while (n > 1) {
      std::uint32_t p = spf_[n];
      unsigned e = 0;
      while (n % p == 0) {
        n /= p;
        ++e;
      }
      f.factors.push_back({p, e});
    }
    return f;
  }

 private:
  std::vector<std::uint32_t> spf_;
};

inline std::uint64_t isqrt(std::uint64_t n) {
  auto r = static_cast<std::uint64_t>(std::sqrt(static_cast<long double>(n)));
  while (r * r > n) --r;
  while ((r + 1) * (r + 1) <= n) ++r;
  return r;
}

inline BigInt isqrt(const BigInt& n) {
  if (n < 0) throw ValidationError("isqrt: negative argument");
  return boost::multiprecision::sqrt(n);
}

inline bool is_perfect_square(const BigInt& n) {
  if (n < 0) return false;
  BigInt r = isqrt(n);
  return r * r == n;
}

inline BigInt pow(const BigInt& base, unsigned e) { return boost::multiprecision::pow(base, e); }

inline Rational pow(const Rational& base, unsigned e) {
  return Rational(pow(numerator(base), e), pow(denominator(base), e));
}

// floor(B^e) for rational B >= 0.
inline BigInt floor_pow(const Rational& b, unsigned e) {
  BigInt num = pow(numerator(b), e), den = pow(denominator(b), e);
  return num / den;
}

// Legendre/Jacobi symbol (a | n), n odd positive.
inline int jacobi(std::int64_t a, std::uint64_t n) {
  if (n == 0 || n % 2 == 0) throw ValidationError("jacobi: modulus must be odd and positive");
  auto m = static_cast<std::int64_t>(n);
  a %= m;
  if (a < 0) a += m;
  std::uint64_t x = static_cast<std::uint64_t>(a);
  int sign = 1;
  while (x != 0) {
    while (x % 2 == 0) {
      x /= 2;
      if (n % 8 == 3 || n % 8 == 5) sign = -sign;
    }
    std::swap(x, n);
    if (x % 4 == 3 && n % 4 == 3) sign = -sign;
    x %= n;
  }
  return n == 1 ? sign : 0;
}

// Parses "p", "-p" or "p/q".
inline Rational parse_rational(std::string_view text) {
  std::string s(text);
  auto trim = [](std::string& t) {
    t.erase(0, t.find_first_not_of(" \t"));
    t.erase(t.find_last_not_of(" \t\r\n") + 1);
  };
  trim(s);
  if (s.empty()) throw ValidationError("empty rational");
  auto valid_int = [](const std::string& t) {
    std::size_t i = (!t.empty() && (t[0] == '-' || t[0] == '+')) ? 1 : 0;
    return i < t.size() && std::all_of(t.begin() + i, t.end(), [](char c) { return c >= '0' && c <= '9'; });
  };
  auto slash = s.find('/');
  std::string num = s.substr(0, slash);
  std::string den = slash == std::string::npos ? "1" : s.substr(slash + 1);
  trim(num);
  trim(den);
  if (!valid_int(num) || !valid_int(den)) throw ValidationError("malformed rational '" + s + "'");
  if (num[0] == '+') num.erase(0, 1);
  if (den[0] == '+') den.erase(0, 1);
  BigInt d(den);
  if (d == 0) throw ValidationError("zero denominator in '" + s + "'");
  return Rational(BigInt(num), d);
}

inline std::string to_string(const Rational& r) {
  if (denominator(r) == 1) return numerator(r).str();
  return numerator(r).str() + "/" + denominator(r).str();
}

}  // namespace wpstack
