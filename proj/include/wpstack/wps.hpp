#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <memory>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wpstack/arith.hpp"
#include "wpstack/errors.hpp"
#include "wpstack/parallel.hpp"

namespace wpstack {

// Weights a = (a_0, ..., a_n) of the scaling action x_i -> lambda^{a_i} x_i.
// Copies share one immutable buffer.
class WeightVector {
 public:
  WeightVector() : WeightVector(std::vector<unsigned>{1}) {}

  explicit WeightVector(std::vector<unsigned> weights) {
    if (weights.empty()) throw ValidationError("weight vector must be nonempty");
    auto d = std::make_shared<Data>();
    d->total = 0;
    d->lcm = 1;
    d->min_weight = weights.front();
    for (unsigned a : weights) {
      if (a == 0) throw ValidationError("weights must be positive");
      d->total += a;
      d->lcm = std::lcm(d->lcm, static_cast<std::uint64_t>(a));
      d->min_weight = std::min(d->min_weight, a);
      d->any_odd = d->any_odd || (a % 2 == 1);
    }
    d->weights = std::move(weights);
    data_ = std::move(d);
  }

  WeightVector(std::initializer_list<unsigned> w) : WeightVector(std::vector<unsigned>(w)) {}

  const std::vector<unsigned>& weights() const { return data_->weights; }
  std::size_t size() const { return data_->weights.size(); }
  unsigned operator[](std::size_t i) const { return data_->weights[i]; }
  unsigned total() const { return data_->total; }
  unsigned min_weight() const { return data_->min_weight; }
  std::uint64_t lcm() const { return data_->lcm; }
  bool any_odd() const { return data_->any_odd; }

  std::string to_string() const {
    std::string s;
    for (std::size_t i = 0; i < size(); ++i) s += (i ? "," : "") + std::to_string(weights()[i]);
    return s;
  }

  friend bool operator==(const WeightVector& x, const WeightVector& y) { return x.weights() == y.weights(); }

 private:
  struct Data {
    std::vector<unsigned> weights;
    unsigned total = 0;
    unsigned min_weight = 1;
    std::uint64_t lcm = 1;
    bool any_odd = false;
  };
  std::shared_ptr<const Data> data_;
};

inline WeightVector parse_weights(const std::string& text) {
  std::vector<unsigned> w;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto comma = text.find(',', pos);
    std::string tok = text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    tok.erase(0, tok.find_first_not_of(" \t"));
    tok.erase(tok.find_last_not_of(" \t") + 1);
    if (tok.empty() || tok.find_first_not_of("0123456789") != std::string::npos)
      throw ValidationError("malformed weight list '" + text + "'");
    w.push_back(static_cast<unsigned>(std::stoul(tok)));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return WeightVector(std::move(w));
}

using Coords = std::vector<std::int64_t>;

// Integer representative with wgcd = 1 and canonical sign.
struct WpsPoint {
  WeightVector weights;
  Coords coords;

  friend bool operator==(const WpsPoint& p, const WpsPoint& q) {
    return p.weights == q.weights && p.coords == q.coords;
  }
};

// Representative with plain gcd 1 and canonical sign.
struct IntegralPoint {
  WeightVector weights;
  Coords coords;

  friend bool operator==(const IntegralPoint& p, const IntegralPoint& q) {
    return p.weights == q.weights && p.coords == q.coords;
  }
};

namespace detail {

inline void check_arity(std::size_t n, const WeightVector& a) {
  if (n != a.size())
    throw ValidationError("tuple has " + std::to_string(n) + " coordinates, weights have " + std::to_string(a.size()));
}

// p^e, or nullopt once it exceeds limit.
inline std::optional<std::uint64_t> bounded_pow(std::uint64_t p, unsigned e, std::uint64_t limit) {
  std::uint64_t r = 1;
  for (unsigned i = 0; i < e; ++i) {
    if (r > limit / p) return std::nullopt;
    r *= p;
  }
  return r;
}

// True iff p^{a_i} | x_i for every i.
inline bool weighted_divides(std::uint64_t p, const std::int64_t* x, const WeightVector& a) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (x[i] == 0) continue;
    auto mag = static_cast<std::uint64_t>(x[i] < 0 ? -x[i] : x[i]);
    auto pk = bounded_pow(p, a[i], mag);
    if (!pk || mag % *pk != 0) return false;
  }
  return true;
}

inline std::uint64_t content(const std::int64_t* x, std::size_t n) {
  std::uint64_t g = 0;
  for (std::size_t i = 0; i < n; ++i) g = std::gcd(g, static_cast<std::uint64_t>(x[i] < 0 ? -x[i] : x[i]));
  return g;
}

// First odd-weight nonzero coordinate is positive (or there is none).
inline bool sign_canonical(const std::int64_t* x, const WeightVector& a) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] % 2 == 1 && x[i] != 0) return x[i] > 0;
  return true;
}

template <class Int>
void apply_sign_canon(std::vector<Int>& x, const WeightVector& a) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] % 2 == 1 && x[i] != 0) {
      if (x[i] < 0)
        for (std::size_t j = 0; j < a.size(); ++j)
          if (a[j] % 2 == 1) x[j] = -x[j];
      return;
    }
  }
}

inline bool all_zero(std::span<const std::int64_t> x) {
  return std::all_of(x.begin(), x.end(), [](std::int64_t v) { return v == 0; });
}

}  // namespace detail

// prod_p p^{min_i floor(v_p(x_i)/a_i)}, zero coordinates ignored.
inline BigInt wgcd(std::span<const BigInt> x, const WeightVector& a) {
  detail::check_arity(x.size(), a);
  BigInt g = 0;
  for (const auto& v : x) g = gcd(g, BigInt(abs(v)));
  if (g == 0) throw ValidationError("wgcd: all-zero tuple");
  BigInt result = 1;
  if (g == 1) return result;
  for (const auto& [p, e_g] : factorize_big(g)) {
    int e = kInfinite;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (x[i] == 0) continue;
      int v = 0;
      BigInt m = abs(x[i]);
      while (m % p == 0) {
        m /= p;
        ++v;
      }
      e = std::min(e, v / static_cast<int>(a[i]));
    }
    result *= pow(p, static_cast<unsigned>(e));
  }
  return result;
}

inline BigInt wgcd(std::span<const std::int64_t> x, const WeightVector& a) {
  std::vector<BigInt> big(x.begin(), x.end());
  return wgcd(big, a);
}

// The unique canonical representative of the class of x under
// x_i -> lambda^{a_i} x_i, lambda in Q^x.
inline WpsPoint normalize(std::span<const Rational> x, const WeightVector& a) {
  detail::check_arity(x.size(), a);
  if (std::all_of(x.begin(), x.end(), [](const Rational& r) { return r == 0; }))
    throw ValidationError("normalize: all-zero tuple");

  // Clear denominators with lambda = lcm of denominators.
  BigInt den = 1;
  for (const auto& r : x) den = boost::multiprecision::lcm(den, denominator(r));
  std::vector<BigInt> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = numerator(x[i]) * pow(den, a[i]) / denominator(x[i]);

  // Every prime with a positive weighted exponent divides the content.
  BigInt g = 0;
  for (const auto& v : y) g = gcd(g, BigInt(abs(v)));
  if (g != 1) {
    for (const auto& [p, e_g] : factorize_big(g)) {
      int e = kInfinite;
      for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] == 0) continue;
        int v = 0;
        BigInt m = abs(y[i]);
        while (m % p == 0) {
          m /= p;
          ++v;
        }
        e = std::min(e, v / static_cast<int>(a[i]));
      }
      if (e == 0) continue;
      for (std::size_t i = 0; i < y.size(); ++i) y[i] /= pow(p, a[i] * static_cast<unsigned>(e));
    }
  }
  detail::apply_sign_canon(y, a);

  WpsPoint out{a, Coords(y.size())};
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] > std::numeric_limits<std::int64_t>::max() || y[i] < -std::numeric_limits<std::int64_t>::max())
      throw ValidationError("normalize: coordinate " + y[i].str() + " exceeds 64 bits");
    out.coords[i] = static_cast<std::int64_t>(y[i]);
  }
  return out;
}

inline WpsPoint normalize(std::span<const std::int64_t> x, const WeightVector& a) {
  std::vector<Rational> r(x.begin(), x.end());
  return normalize(r, a);
}

// max_i |x_i|^{1/a_i}, for display and fitting only.
inline long double height(const WpsPoint& p) {
  long double h = 0;
  for (std::size_t i = 0; i < p.coords.size(); ++i) {
    long double v = std::fabs(static_cast<long double>(p.coords[i]));
    h = std::max(h, std::pow(v, 1.0L / p.weights[i]));
  }
  return h;
}

// Exact test of max_i |x_i|^{1/a_i} <= B. With B = u/v this is
// |x_i| * v^{a_i} <= u^{a_i} for each i, the a_i-th root of the
// L-th power comparison |x_i|^{L/a_i} v^L <= u^L.
inline bool height_leq(std::span<const std::int64_t> coords, const WeightVector& a, const Rational& bound) {
  detail::check_arity(coords.size(), a);
  if (bound <= 0) return false;
  const BigInt& u = numerator(bound);
  const BigInt& v = denominator(bound);
  for (std::size_t i = 0; i < coords.size(); ++i) {
    BigInt mag = abs(BigInt(coords[i]));
    if (mag * pow(v, a[i]) > pow(u, a[i])) return false;
  }
  return true;
}

inline bool height_leq(const WpsPoint& p, const Rational& bound) { return height_leq(p.coords, p.weights, bound); }

struct EnumOptions {
  unsigned workers = default_workers();
  double budget = 5e9;
};

// The coordinate box |x_i| <= floor(B^{a_i}), which is exactly the set of
// integer tuples of height at most B.
struct Box {
  std::vector<std::int64_t> bound;
  double volume = 0;  // prod (2 bound_i + 1)
};

inline Box box_for(const WeightVector& a, const Rational& height_bound) {
  if (height_bound <= 0) throw ValidationError("height bound must be positive");
  Box box;
  box.volume = 1;
  for (unsigned w : a.weights()) {
    BigInt x = floor_pow(height_bound, w);
    if (x > BigInt(std::numeric_limits<std::int64_t>::max() / 4))
      throw BudgetExceeded("box side exceeds 64-bit range", std::numeric_limits<double>::infinity());
    box.bound.push_back(static_cast<std::int64_t>(x));
    box.volume *= 2.0 * static_cast<double>(x) + 1.0;
  }
  return box;
}

inline void check_budget(const Box& box, double budget) {
  if (box.volume > budget) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "box volume %.6g exceeds budget %.6g", box.volume, budget);
    throw BudgetExceeded(buf, box.volume);
  }
}

enum class PointKind { Rational, Integral };

// Decides wgcd(x) = 1 (Rational) or gcd(x) = 1 (Integral) for integer
// tuples inside a fixed box; reuses a smallest-factor table when possible.
class PrimitivityTest {
 public:
  PrimitivityTest(const WeightVector& a, const Box& box, PointKind kind) : a_(a), kind_(kind) {
    std::int64_t m = 0;
    for (auto b : box.bound) m = std::max(m, b);
    if (kind == PointKind::Rational && m >= 2)
      spf_ = std::make_shared<SmallestFactorTable>(static_cast<std::uint32_t>(std::min<std::int64_t>(m, 1 << 22)));
  }

  bool operator()(const std::int64_t* x) const {
    std::uint64_t g = detail::content(x, a_.size());
    if (g == 0) return false;
    if (g == 1) return true;
    if (kind_ == PointKind::Integral) return false;
    bool primitive = true;
    auto check = [&](std::uint64_t p) {
      if (primitive && detail::weighted_divides(p, x, a_)) primitive = false;
    };
    if (spf_ && g <= spf_->limit()) {
      spf_->for_each_prime(static_cast<std::uint32_t>(g), check);
    } else {
      for (const auto& pe : factorize(g).factors) check(pe.prime);
    }
    return primitive;
  }

 private:
  WeightVector a_;
  PointKind kind_;
  std::shared_ptr<const SmallestFactorTable> spf_;
};

// Visits every sign-canonical, not-all-zero tuple of the box with x_0 in
// [lo, hi]. fn receives a pointer to n+1 coordinates, valid for the call.
template <class Fn>
void visit_box_tuples(const WeightVector& a, const Box& box, std::int64_t lo, std::int64_t hi, Fn&& fn) {
  const std::size_t n = a.size();
  std::vector<std::int64_t> x(n);
  for (std::int64_t x0 = lo; x0 <= hi; ++x0) {
    x[0] = x0;
    for (std::size_t i = 1; i < n; ++i) x[i] = -box.bound[i];
    for (;;) {
      if (detail::sign_canonical(x.data(), a) && !detail::all_zero({x.data(), n})) fn(x.data());
      std::size_t i = n - 1;
      while (i >= 1 && x[i] == box.bound[i]) {
        x[i] = -box.bound[i];
        --i;
      }
      if (i == 0) break;
      ++x[i];
    }
  }
}

// As visit_box_tuples, restricted to primitive tuples (one per point).
template <class Fn>
void visit_box(const WeightVector& a, const Box& box, const PrimitivityTest& primitive, std::int64_t lo,
               std::int64_t hi, Fn&& fn) {
  visit_box_tuples(a, box, lo, hi, [&](const std::int64_t* x) {
    if (primitive(x)) fn(x);
  });
}

// Range of x_0 to scan: sign canon forces x_0 >= 0 when a_0 is odd.
inline std::pair<std::int64_t, std::int64_t> outer_range(const WeightVector& a, const Box& box) {
  return {a[0] % 2 == 1 ? 0 : -box.bound[0], box.bound[0]};
}

namespace detail {

inline std::uint64_t count_kind(const WeightVector& a, const Rational& bound, PointKind kind, const EnumOptions& opt) {
  Box box = box_for(a, bound);
  check_budget(box, opt.budget);
  PrimitivityTest primitive(a, box, kind);
  auto [lo, hi] = outer_range(a, box);
  auto parts = map_chunks<std::uint64_t>(lo, hi, opt.workers, [&](std::int64_t l, std::int64_t h) {
    std::uint64_t c = 0;
    visit_box(a, box, primitive, l, h, [&](const std::int64_t*) { ++c; });
    return c;
  });
  return std::accumulate(parts.begin(), parts.end(), std::uint64_t{0});
}

inline std::vector<Coords> list_kind(const WeightVector& a, const Rational& bound, PointKind kind,
                                     const EnumOptions& opt) {
  Box box = box_for(a, bound);
  check_budget(box, opt.budget);
  PrimitivityTest primitive(a, box, kind);
  auto [lo, hi] = outer_range(a, box);
  auto parts = map_chunks<std::vector<Coords>>(lo, hi, opt.workers, [&](std::int64_t l, std::int64_t h) {
    std::vector<Coords> out;
    visit_box(a, box, primitive, l, h,
              [&](const std::int64_t* x) { out.emplace_back(x, x + a.size()); });
    return out;
  });
  std::vector<Coords> all;
  for (auto& p : parts) all.insert(all.end(), std::make_move_iterator(p.begin()), std::make_move_iterator(p.end()));
  std::sort(all.begin(), all.end());
  return all;
}

}  // namespace detail

// Streams every point of P(a)(Q) with height <= B once, in scan order.
template <class Fn>
void for_each_point(const WeightVector& a, const Rational& bound, Fn&& fn, double budget = 5e9) {
  Box box = box_for(a, bound);
  check_budget(box, budget);
  PrimitivityTest primitive(a, box, PointKind::Rational);
  auto [lo, hi] = outer_range(a, box);
  visit_box(a, box, primitive, lo, hi,
            [&](const std::int64_t* x) { fn(WpsPoint{a, Coords(x, x + a.size())}); });
}

// All points of height <= B, sorted lexicographically by coordinates.
inline std::vector<WpsPoint> enumerate_points(const WeightVector& a, const Rational& bound,
                                              const EnumOptions& opt = {}) {
  std::vector<WpsPoint> out;
  for (auto& c : detail::list_kind(a, bound, PointKind::Rational, opt)) out.push_back({a, std::move(c)});
  return out;
}

inline std::vector<IntegralPoint> enumerate_integral(const WeightVector& a, const Rational& bound,
                                                     const EnumOptions& opt = {}) {
  std::vector<IntegralPoint> out;
  for (auto& c : detail::list_kind(a, bound, PointKind::Integral, opt)) out.push_back({a, std::move(c)});
  return out;
}

inline std::uint64_t count(const WeightVector& a, const Rational& bound, const EnumOptions& opt = {}) {
  return detail::count_kind(a, bound, PointKind::Rational, opt);
}

inline std::uint64_t count_integral(const WeightVector& a, const Rational& bound, const EnumOptions& opt = {}) {
  return detail::count_kind(a, bound, PointKind::Integral, opt);
}

}  // namespace wpstack
