#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "wpstack/arith.hpp"
#include "wpstack/errors.hpp"
#include "wpstack/wps.hpp"

namespace wpstack {

// 50 decimal digits, about 166 bits.
using Real = boost::multiprecision::cpp_bin_float_50;

// Real quadratic fields Q(sqrt D) with D = 2, 3 mod 4 and class number one,
// so the ring of integers is Z[sqrt D] and every ideal is principal.
inline const std::vector<std::int64_t>& supported_discriminant_radicands() {
  static const std::vector<std::int64_t> list{2, 3, 6, 7, 11, 19};
  return list;
}

// a + b sqrt(D)
struct QuadInt {
  BigInt a = 0;
  BigInt b = 0;
  std::int64_t D = 2;

  QuadInt() = default;
  QuadInt(BigInt a_, BigInt b_, std::int64_t D_) : a(std::move(a_)), b(std::move(b_)), D(D_) {}

  bool is_zero() const { return a == 0 && b == 0; }
  BigInt norm() const { return a * a - b * b * D; }
  QuadInt conj() const { return {a, -b, D}; }

  friend QuadInt operator+(const QuadInt& x, const QuadInt& y) {
    check_same(x, y);
    return {x.a + y.a, x.b + y.b, x.D};
  }
  friend QuadInt operator-(const QuadInt& x, const QuadInt& y) {
    check_same(x, y);
    return {x.a - y.a, x.b - y.b, x.D};
  }
  friend QuadInt operator*(const QuadInt& x, const QuadInt& y) {
    check_same(x, y);
    return {x.a * y.a + x.b * y.b * x.D, x.a * y.b + x.b * y.a, x.D};
  }
  friend bool operator==(const QuadInt& x, const QuadInt& y) { return x.a == y.a && x.b == y.b && x.D == y.D; }

  std::string to_string() const { return a.str() + ":" + b.str(); }

 private:
  static void check_same(const QuadInt& x, const QuadInt& y) {
    if (x.D != y.D) throw ValidationError("mixing elements of different quadratic fields");
  }
};

inline QuadInt pow(const QuadInt& x, unsigned e) {
  QuadInt r{1, 0, x.D}, base = x;
  while (e) {
    if (e & 1) r = r * base;
    base = base * base;
    e >>= 1;
  }
  return r;
}

// Minimal unit > 1 of Z[sqrt D], from the continued fraction of sqrt D.
inline QuadInt fundamental_unit(std::int64_t D) {
  const auto& ok = supported_discriminant_radicands();
  if (std::find(ok.begin(), ok.end(), D) == ok.end())
    throw ValidationError("unsupported D = " + std::to_string(D) + "; supported: 2, 3, 6, 7, 11, 19");
  const auto a0 = static_cast<std::int64_t>(isqrt(static_cast<std::uint64_t>(D)));
  std::int64_t m = 0, d = 1, a = a0;
  BigInt p_prev = 1, p = a0, q_prev = 0, q = 1;
  for (int iter = 0; iter < 1000; ++iter) {
    BigInt n = p * p - q * q * D;
    if (n == 1 || n == -1) return {p, q, D};
    m = d * a - m;
    d = (D - m * m) / d;
    a = (a0 + m) / d;
    BigInt p_next = a * p + p_prev, q_next = a * q + q_prev;
    p_prev = std::exchange(p, p_next);
    q_prev = std::exchange(q, q_next);
  }
  throw InvariantViolation("continued fraction did not reach a unit");
}

class QuadField {
 public:
  explicit QuadField(std::int64_t D) : D_(D), unit_(fundamental_unit(D)), sqrt_d_(boost::multiprecision::sqrt(Real(D))) {
    log_unit_ = boost::multiprecision::log(Real(unit_.a) + Real(unit_.b) * sqrt_d_);
  }

  std::int64_t D() const { return D_; }
  const QuadInt& unit() const { return unit_; }
  const Real& sqrt_d() const { return sqrt_d_; }
  // log sigma_1(eps) > 0; sigma_2 gives the negative of this.
  const Real& log_unit() const { return log_unit_; }

  QuadInt element(BigInt a, BigInt b) const { return {std::move(a), std::move(b), D_}; }

  // eps^k for any integer k; eps^{-1} = N(eps) conj(eps).
  QuadInt unit_power(std::int64_t k) const {
    if (k >= 0) return pow(unit_, static_cast<unsigned>(k));
    QuadInt inv = unit_.conj();
    if (unit_.norm() == -1) inv = {-inv.a, -inv.b, D_};
    return pow(inv, static_cast<unsigned>(-k));
  }

 private:
  std::int64_t D_;
  QuadInt unit_;
  Real sqrt_d_;
  Real log_unit_;
};

// (log|sigma_1 x|, log|sigma_2 x|) with sigma_{1,2}(a + b sqrt D) = a +- b sqrt D.
// The embedding where a and b sqrt D have opposite signs is recovered as
// |N(x)| / (larger one) to avoid cancellation.
inline std::pair<Real, Real> log_embed(const QuadField& k, const QuadInt& x) {
  if (x.D != k.D()) throw ValidationError("element is not in Q(sqrt " + std::to_string(k.D()) + ")");
  if (x.is_zero()) throw ValidationError("log embedding of zero");
  const Real large = Real(abs(x.a)) + Real(abs(x.b)) * k.sqrt_d();
  const Real small = Real(abs(x.norm())) / large;
  const Real L = boost::multiprecision::log(large), S = boost::multiprecision::log(small);
  if ((x.a >= 0) == (x.b >= 0) || x.a == 0 || x.b == 0) return {L, S};
  return {S, L};
}

struct DomainSpec {
  QuadField field;
  WeightVector weights;

  DomainSpec(QuadField f, WeightVector a) : field(std::move(f)), weights(std::move(a)) {}

  // u_1 = l(eps)
  std::pair<Real, Real> u1() const { return {field.log_unit(), -field.log_unit()}; }
};

using QuadTuple = std::vector<QuadInt>;

namespace detail {

// Decomposition coordinates closer than this to an integer are taken to be
// that integer; they arise from exact unit multiples and are computed to
// roughly 45 digits.
inline const Real& snap_tolerance() {
  static const Real tol("1e-30");
  return tol;
}

inline const Real& ambiguity_tolerance() {
  static const Real tol("1e-9");
  return tol;
}

// (log M_1, log M_2) with M_j = max_i |sigma_j x_i|^{1/a_i}.
inline std::pair<Real, Real> log_maxima(const QuadField& k, const QuadTuple& x, const WeightVector& a) {
  check_arity(x.size(), a);
  std::optional<Real> l1, l2;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i].is_zero()) continue;
    auto [e1, e2] = log_embed(k, x[i]);
    e1 /= a[i];
    e2 /= a[i];
    if (!l1 || e1 > *l1) l1 = e1;
    if (!l2 || e2 > *l2) l2 = e2;
  }
  if (!l1) throw ValidationError("all-zero tuple");
  return {*l1, *l2};
}

inline Real snap_integer(const Real& v) {
  Real n = boost::multiprecision::round(v);
  Real dist = boost::multiprecision::abs(v - n);
  if (dist < snap_tolerance()) return n;
  if (dist < ambiguity_tolerance())
    throw BoundaryAmbiguity("unit coordinate " + v.str(20) + " lies within 1e-9 of an integer");
  return v;
}

}  // namespace detail

struct UnitDecomposition {
  Real s;  // coordinate along u_1, snapped when it is an integer
  Real t;  // coordinate along (1, 1)
};

inline UnitDecomposition decompose(const QuadTuple& x, const DomainSpec& spec) {
  auto [l1, l2] = detail::log_maxima(spec.field, x, spec.weights);
  return {detail::snap_integer((l1 - l2) / (2 * spec.field.log_unit())), (l1 + l2) / 2};
}

// Membership in S_{F,a}(T): s in [0, 1) and M_1 M_2 <= T^2 (T = nullopt is infinite).
inline bool in_domain(const QuadTuple& x, const DomainSpec& spec, const std::optional<Real>& T = std::nullopt) {
  UnitDecomposition d = decompose(x, spec);
  if (d.s < 0 || d.s >= 1) return false;
  if (!T) return true;
  if (*T <= 0) throw ValidationError("T must be positive");
  const Real gap = boost::multiprecision::log(*T) - d.t;
  return gap >= 0 || boost::multiprecision::abs(gap) < detail::snap_tolerance();
}

// x_i -> eps^{k a_i} x_i
inline QuadTuple unit_act(const QuadTuple& x, const DomainSpec& spec, std::int64_t k) {
  detail::check_arity(x.size(), spec.weights);
  QuadTuple y;
  for (std::size_t i = 0; i < x.size(); ++i)
    y.push_back(x[i] * spec.field.unit_power(k * static_cast<std::int64_t>(spec.weights[i])));
  return y;
}

struct Reduction {
  QuadTuple reduced;
  std::int64_t k = 0;
};

inline Reduction reduce_to_domain(const QuadTuple& x, const DomainSpec& spec) {
  UnitDecomposition d = decompose(x, spec);
  const auto k = -static_cast<std::int64_t>(boost::multiprecision::floor(d.s));
  Reduction r{unit_act(x, spec, k), k};
  if (!in_domain(r.reduced, spec)) throw InvariantViolation("unit reduction left the fundamental domain");
  return r;
}

inline Real log_height_infty_k(const QuadField& k, const QuadTuple& x, const WeightVector& a) {
  auto [l1, l2] = detail::log_maxima(k, x, a);
  return l1 + l2;
}

// H_{a,infty}(x) = M_1 M_2
inline Real height_infty_k(const QuadField& k, const QuadTuple& x, const WeightVector& a) {
  return boost::multiprecision::exp(log_height_infty_k(k, x, a));
}

// ---------------------------------------------------------------------------
// Prime ideals

enum class Splitting { Split, Inert, Ramified };

inline Splitting splitting(std::int64_t D, std::uint64_t p) {
  if (!is_prime(p)) throw ValidationError(std::to_string(p) + " is not prime");
  // disc = 4D, so 2 and the primes dividing D ramify
  if (p == 2 || D % static_cast<std::int64_t>(p) == 0) return Splitting::Ramified;
  return jacobi(D, p) == 1 ? Splitting::Split : Splitting::Inert;
}

struct IdealNorm {
  std::uint64_t norm;
  unsigned multiplicity;
  friend bool operator==(const IdealNorm&, const IdealNorm&) = default;
};

// Norms of the prime ideals of norm <= Q, ascending, with the number of
// prime ideals of each norm.
inline std::vector<IdealNorm> prime_ideal_norms_up_to(const QuadField& k, std::uint64_t Q) {
  std::vector<IdealNorm> out;
  if (Q < 2) return out;
  for (std::uint64_t p : primes_up_to(Q)) {
    switch (splitting(k.D(), p)) {
      case Splitting::Split: out.push_back({p, 2}); break;
      case Splitting::Ramified: out.push_back({p, 1}); break;
      case Splitting::Inert:
        if (p <= Q / p) out.push_back({p * p, 1});
        break;
    }
  }
  std::sort(out.begin(), out.end(), [](const IdealNorm& x, const IdealNorm& y) { return x.norm < y.norm; });
  return out;
}

// Sum over squarefree ideals q with N(q) <= Q of prod_{p | q} nu / (1 - nu).
inline Rational compute_G_k(const QuadField& k, std::uint64_t Q, const Rational& nu) {
  if (Q == 0) throw ValidationError("Q must be >= 1");
  if (nu < 0 || nu >= 1) throw ValidationError("ideal density must lie in [0, 1)");
  const Rational w = nu / (1 - nu);
  std::vector<std::uint64_t> norms;
  for (const auto& [n, mult] : prime_ideal_norms_up_to(k, Q))
    for (unsigned j = 0; j < mult; ++j) norms.push_back(n);
  // count[j] = number of squarefree ideals with j prime factors and norm <= Q
  std::vector<std::uint64_t> count;
  std::function<void(std::size_t, std::uint64_t, std::size_t)> dfs = [&](std::size_t start, std::uint64_t n,
                                                                         std::size_t depth) {
    if (count.size() <= depth) count.resize(depth + 1, 0);
    ++count[depth];
    for (std::size_t i = start; i < norms.size() && norms[i] <= Q / n; ++i) dfs(i + 1, n * norms[i], depth + 1);
  };
  dfs(0, 1, 0);
  Rational G = 0, wj = 1;
  for (std::size_t j = 0; j < count.size(); ++j, wj *= w) G += wj * count[j];
  return G;
}

}  // namespace wpstack
