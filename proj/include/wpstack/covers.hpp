#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "wpstack/arith.hpp"
#include "wpstack/errors.hpp"
#include "wpstack/poly.hpp"
#include "wpstack/sieve.hpp"
#include "wpstack/wps.hpp"

namespace wpstack {

using i128 = __int128;

struct Monomial {
  std::int64_t coeff;
  std::vector<unsigned> exponents;
};

// sum coeff * prod x_i^{e_i}, every term of weighted degree sum e_i a_i = degree.
class WeightedForm {
 public:
  WeightedForm(WeightVector weights, unsigned degree, std::vector<Monomial> terms)
      : weights_(std::move(weights)), degree_(degree) {
    for (auto& t : terms) {
      if (t.exponents.size() != weights_.size())
        throw ValidationError("monomial has " + std::to_string(t.exponents.size()) + " exponents, expected " +
                              std::to_string(weights_.size()));
      unsigned d = 0;
      for (std::size_t i = 0; i < weights_.size(); ++i) d += t.exponents[i] * weights_[i];
      if (d != degree_)
        throw ValidationError("monomial of weighted degree " + std::to_string(d) + " in a form of degree " +
                              std::to_string(degree_));
      if (t.coeff != 0) terms_.push_back(std::move(t));
    }
  }

  const WeightVector& weights() const { return weights_; }
  unsigned degree() const { return degree_; }
  const std::vector<Monomial>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  BigInt evaluate(std::span<const std::int64_t> x) const {
    BigInt acc = 0;
    for (const auto& t : terms_) {
      BigInt m = t.coeff;
      for (std::size_t i = 0; i < x.size(); ++i)
        if (t.exponents[i]) m *= pow(BigInt(x[i]), t.exponents[i]);
      acc += m;
    }
    return acc;
  }

  // Caller guarantees the value and every partial product fit in 127 bits.
  i128 evaluate_i128(const std::int64_t* x) const {
    i128 acc = 0;
    for (const auto& t : terms_) {
      i128 m = t.coeff;
      for (std::size_t i = 0; i < weights_.size(); ++i)
        for (unsigned k = 0; k < t.exponents[i]; ++k) m *= x[i];
      acc += m;
    }
    return acc;
  }

  std::uint64_t evaluate_mod(const std::uint64_t* r, std::uint64_t p) const {
    std::uint64_t acc = 0;
    for (const auto& t : terms_) {
      std::int64_t c = t.coeff % static_cast<std::int64_t>(p);
      std::uint64_t m = static_cast<std::uint64_t>(c < 0 ? c + static_cast<std::int64_t>(p) : c);
      for (std::size_t i = 0; i < weights_.size(); ++i)
        for (unsigned k = 0; k < t.exponents[i]; ++k) m = detail::mulmod(m, r[i], p);
      acc = (acc + m) % p;
    }
    return acc;
  }

  // Upper bound on |F(x)| over the box |x_i| <= bound_i.
  long double magnitude_bound(const std::vector<std::int64_t>& bound) const {
    long double s = 0;
    for (const auto& t : terms_) {
      long double m = std::fabs(static_cast<long double>(t.coeff));
      for (std::size_t i = 0; i < bound.size(); ++i)
        m *= std::pow(static_cast<long double>(bound[i]), static_cast<long double>(t.exponents[i]));
      s += m;
    }
    return s;
  }

 private:
  WeightVector weights_;
  unsigned degree_;
  std::vector<Monomial> terms_;
};

// Root-cover t^d + c_{d-1}(x) t^{d-1} + ... + c_0(x) with c_j weighted
// homogeneous of degree (d - j) w, so t -> lambda^w t keeps the root
// condition invariant under the weighted action.
class Cover {
 public:
  Cover(WeightVector weights, unsigned aux_weight, std::vector<WeightedForm> coeffs, std::string name = "custom")
      : weights_(std::move(weights)), aux_weight_(aux_weight), coeffs_(std::move(coeffs)), name_(std::move(name)) {
    if (aux_weight_ == 0) throw ValidationError("auxiliary weight must be positive");
    if (coeffs_.empty()) throw ValidationError("cover needs degree >= 1 in t");
    const auto d = static_cast<unsigned>(coeffs_.size());
    for (unsigned j = 0; j < d; ++j) {
      if (!(coeffs_[j].weights() == weights_)) throw ValidationError("coefficient form over different weights");
      if (coeffs_[j].degree() != (d - j) * aux_weight_)
        throw ValidationError("coefficient c_" + std::to_string(j) + " has degree " +
                              std::to_string(coeffs_[j].degree()) + ", expected " +
                              std::to_string((d - j) * aux_weight_));
    }
  }

  const WeightVector& weights() const { return weights_; }
  unsigned aux_weight() const { return aux_weight_; }
  unsigned degree() const { return static_cast<unsigned>(coeffs_.size()); }
  const std::vector<WeightedForm>& coeffs() const { return coeffs_; }
  const std::string& name() const { return name_; }

  // Monic polynomial in t at the point x.
  IntPoly specialize(std::span<const std::int64_t> x) const {
    std::vector<BigInt> c;
    for (const auto& f : coeffs_) c.push_back(f.evaluate(x));
    c.emplace_back(1);
    return IntPoly(std::move(c));
  }

 private:
  WeightVector weights_;
  unsigned aux_weight_;
  std::vector<WeightedForm> coeffs_;
  std::string name_;
};

namespace detail {

// Fujiwara: every complex root of t^d + ... + c_0 has |t| <= 2 max_j |c_j|^{1/(d-j)}
// (with c_0 halved).
inline long double root_radius(const std::vector<long double>& mags) {
  const std::size_t d = mags.size();
  long double r = 0;
  for (std::size_t j = 0; j < d; ++j) {
    long double c = j == 0 ? mags[0] / 2 : mags[j];
    r = std::max(r, std::pow(c, 1.0L / static_cast<long double>(d - j)));
  }
  return 2 * r;
}

inline void check_cover_weights(const Cover& c, const WeightVector& a) {
  if (!(c.weights() == a)) throw ValidationError("cover weights differ from point weights");
}

}  // namespace detail

// Integer root test for a monic integer polynomial. Over Z every rational
// root of a monic polynomial is an integer dividing c_0.
inline bool has_integer_root(const IntPoly& f) {
  const int d = f.degree();
  if (d < 1 || f.lead() != 1) throw ValidationError("has_integer_root: polynomial must be monic of degree >= 1");
  if (d == 1) return true;
  if (f.coeffs[0] == 0) return true;
  if (d == 2) return is_perfect_square(f.coeffs[1] * f.coeffs[1] - 4 * f.coeffs[0]);
  std::vector<long double> mags;
  for (int j = 0; j < d; ++j) mags.push_back(static_cast<long double>(abs(f.coeffs[static_cast<std::size_t>(j)])));
  const long double radius = detail::root_radius(mags) + 1;
  std::vector<BigInt> divs{1};
  for (const auto& [p, e] : factorize_big(f.coeffs[0])) {
    const std::size_t base = divs.size();
    BigInt pk = 1;
    for (unsigned k = 1; k <= e; ++k) {
      pk *= p;
      for (std::size_t i = 0; i < base; ++i) divs.push_back(divs[i] * pk);
    }
  }
  for (const auto& dv : divs) {
    if (static_cast<long double>(dv) > radius) continue;
    if (f(dv) == 0 || f(-dv) == 0) return true;
  }
  return false;
}

inline bool typeI_member(const WeightedForm& form, const WpsPoint& p) {
  if (!(form.weights() == p.weights)) throw ValidationError("form weights differ from point weights");
  return form.evaluate(p.coords) == 0;
}

inline bool root_cover_member(const Cover& c, std::span<const std::int64_t> x) {
  return has_integer_root(c.specialize(x));
}

inline bool root_cover_member(const Cover& c, const WpsPoint& p) {
  detail::check_cover_weights(c, p.weights);
  return root_cover_member(c, std::span<const std::int64_t>(p.coords));
}

namespace detail {

// Calls fn(residue tuple, has_root) for every tuple of (Z/p)^{n+1}.
template <class Fn>
void scan_image_mod_p(const Cover& c, std::uint64_t p, double budget, Fn&& fn) {
  const std::size_t n = c.weights().size();
  const double work = std::pow(static_cast<double>(p), static_cast<double>(n + 1));
  if (work > budget) throw BudgetExceeded("mod-p image scan exceeds budget", work);
  const unsigned d = c.degree();
  std::vector<std::uint64_t> r(n, 0), coeffs(d + 1);
  coeffs[d] = 1;
  for (;;) {
    for (unsigned j = 0; j < d; ++j) coeffs[j] = c.coeffs()[j].evaluate_mod(r.data(), p);
    bool root = false;
    for (std::uint64_t t = 0; t < p && !root; ++t) {
      std::uint64_t acc = 0;
      for (unsigned j = d + 1; j-- > 0;) acc = (mulmod(acc, t, p) + coeffs[j]) % p;
      root = acc == 0;
    }
    fn(r, root);
    std::size_t i = 0;
    while (i < n && r[i] == p - 1) r[i++] = 0;
    if (i == n) break;
    ++r[i];
  }
}

}  // namespace detail

// Fast membership over a fixed box: 128-bit evaluation and a shared
// smallest-factor table for the constant term. Falls back to the exact
// multiprecision path when the box is too large for 128 bits.
class RootCoverTester {
 public:
  RootCoverTester(Cover cover, const std::vector<std::int64_t>& box_bound)
      : cover_(std::move(cover)) {
    const unsigned d = cover_.degree();
    long double worst = 0;
    for (const auto& f : cover_.coeffs()) worst = std::max(worst, f.magnitude_bound(box_bound));
    const long double c0_bound = cover_.coeffs()[0].magnitude_bound(box_bound);
    // |t|^d with |t| up to the root radius stays near worst^{d}; keep well clear of 2^127.
    fast_ = d <= 2 ? worst < 1e36L : std::pow(std::max(worst, 1.0L) * 4, static_cast<long double>(d)) < 1e36L;
    fast_ = fast_ && d <= kMaxDegree;
    // Every candidate root divides c_0, so when all of them are cheap to
    // evaluate the root-radius prune is skipped.
    skip_radius_ = std::pow(c0_bound + 1, static_cast<long double>(d)) * (worst + 1) * d < 1e36L;
    const auto c0_limit = static_cast<std::uint64_t>(std::min<long double>(c0_bound, 1 << 22));
    if (fast_ && d >= 3 && c0_limit >= 2) spf_ = std::make_shared<SmallestFactorTable>(static_cast<std::uint32_t>(c0_limit));
    // An integer root survives reduction mod every prime, so tuples with no
    // root modulo a small prime are rejected before factoring c_0.
    if (fast_ && d >= 3) {
      for (std::uint32_t p : {2, 3, 5, 7, 11, 13}) {
        if (std::pow(static_cast<double>(p), static_cast<double>(n_)) > 4096) break;
        ModFilter f{p, std::vector<std::uint8_t>(static_cast<std::size_t>(std::pow(p, n_) + 0.5))};
        detail::scan_image_mod_p(cover_, p, 1e7, [&](const Residue& r, bool root) {
          std::size_t idx = 0;
          for (std::size_t i = n_; i-- > 0;) idx = idx * p + r[i];
          f.has_root[idx] = root;
        });
        filters_.push_back(std::move(f));
        modulus_ *= p;
      }
      // residues[r * k + j] = r mod (j-th filter prime), for r < modulus_
      residues_.resize(modulus_ * filters_.size());
      for (std::uint32_t r = 0; r < modulus_; ++r)
        for (std::size_t j = 0; j < filters_.size(); ++j)
          residues_[r * filters_.size() + j] = static_cast<std::uint8_t>(r % filters_[j].prime);
    }
  }

  const Cover& cover() const { return cover_; }

  bool operator()(const std::int64_t* x) const {
    const std::size_t n = cover_.weights().size();
    if (!fast_) return root_cover_member(cover_, std::span<const std::int64_t>(x, n));
    if (!filters_.empty()) {
      const std::size_t k = filters_.size();
      const std::uint8_t* red[kMaxArity];
      if (n > kMaxArity) return root_cover_member(cover_, std::span<const std::int64_t>(x, n));
      const auto M = static_cast<std::int64_t>(modulus_);
      for (std::size_t i = 0; i < n; ++i) {
        std::int64_t r = x[i] % M;
        red[i] = &residues_[static_cast<std::size_t>(r < 0 ? r + M : r) * k];
      }
      for (std::size_t j = 0; j < k; ++j) {
        std::size_t idx = 0;
        for (std::size_t i = n; i-- > 0;) idx = idx * filters_[j].prime + red[i][j];
        if (!filters_[j].has_root[idx]) return false;
      }
    }
    const unsigned d = cover_.degree();
    i128 cs[kMaxDegree];
    for (unsigned j = 0; j < d; ++j) cs[j] = cover_.coeffs()[j].evaluate_i128(x);
    if (d == 1 || cs[0] == 0) return true;
    if (d == 2) {
      i128 disc = cs[1] * cs[1] - 4 * cs[0];
      if (disc < 0) return false;
      return is_square_i128(disc);
    }
    const i128 c0 = cs[0] < 0 ? -cs[0] : cs[0];
    if (!spf_ || c0 > static_cast<i128>(spf_->limit())) return root_cover_member(cover_, std::span<const std::int64_t>(x, n));

    long double radius = std::numeric_limits<long double>::infinity();
    if (!skip_radius_) {
      std::array<long double, kMaxDegree> mags;
      for (unsigned j = 0; j < d; ++j) mags[j] = std::fabs(static_cast<long double>(cs[j]));
      radius = detail::root_radius(std::vector<long double>(mags.begin(), mags.begin() + d)) + 1;
    }
    auto eval = [&](i128 t) {
      i128 acc = 1;
      for (unsigned j = d; j-- > 0;) acc = acc * t + cs[j];
      return acc;
    };
    // divisors of |c_0| from the table, on the stack
    std::uint32_t divs[4096];
    std::size_t count = 1;
    divs[0] = 1;
    auto m = static_cast<std::uint32_t>(c0);
    while (m > 1) {
      const std::uint32_t p = spf_->smallest(m);
      const std::size_t base = count;
      std::uint32_t pk = 1;
      while (m % p == 0) {
        m /= p;
        pk *= p;
        for (std::size_t i = 0; i < base; ++i) divs[count++] = divs[i] * pk;
      }
    }
    for (std::size_t i = 0; i < count; ++i) {
      if (static_cast<long double>(divs[i]) > radius) continue;
      const auto t = static_cast<i128>(divs[i]);
      if (eval(t) == 0 || eval(-t) == 0) return true;
    }
    return false;
  }

 private:
  static constexpr unsigned kMaxDegree = 32;

  static bool is_square_i128(i128 v) {
    auto r = static_cast<i128>(std::sqrt(static_cast<long double>(v)));
    while (r > 0 && r * r > v) --r;
    while ((r + 1) * (r + 1) <= v) ++r;
    return r * r == v;
  }

  static constexpr std::size_t kMaxArity = 16;

  struct ModFilter {
    std::uint32_t prime;
    std::vector<std::uint8_t> has_root;
  };

  Cover cover_;
  std::size_t n_ = cover_.weights().size();
  std::vector<ModFilter> filters_;
  std::uint32_t modulus_ = 1;
  std::vector<std::uint8_t> residues_;
  bool fast_ = false;
  bool skip_radius_ = false;
  std::shared_ptr<const SmallestFactorTable> spf_;
};


// Fraction of (Z/p)^{n+1} over which the specialized polynomial has a root mod p.
inline Rational image_density_mod_p(const Cover& c, std::uint64_t p, double budget = 5e9) {
  if (!is_prime(p)) throw ValidationError("image density needs a prime modulus");
  BigInt hits = 0, total = 0;
  detail::scan_image_mod_p(c, p, budget, [&](const Residue&, bool root) {
    ++total;
    if (root) ++hits;
  });
  return Rational(hits, total);
}

struct OmegaEntry {
  std::uint64_t prime;
  unsigned modulus_exponent = 1;
  std::vector<Residue> excluded;  // tuples outside the mod-p image
  Rational density;
};

// Omega_p = residues NOT in the mod-p image: sieving x mod p not in Omega_p
// keeps exactly the candidates for cover membership.
inline OmegaEntry omega_from_cover(const Cover& c, std::uint64_t p, double budget = 5e9) {
  if (!is_prime(p)) throw ValidationError("omega_from_cover needs a prime modulus");
  OmegaEntry out{p, 1, {}, 0};
  BigInt total = 0;
  detail::scan_image_mod_p(c, p, budget, [&](const Residue& r, bool root) {
    ++total;
    if (!root) out.excluded.push_back(r);
  });
  out.density = Rational(BigInt(out.excluded.size()), total);
  return out;
}

inline void add_to(ResidueSystem& rs, const OmegaEntry& e, std::size_t arity) {
  if (rs.modulus_exponent() != e.modulus_exponent) throw ValidationError("modulus exponent mismatch");
  if (e.excluded.empty()) {
    rs.add_density(e.prime, 0);
    return;
  }
  if (rs.arity() != 0 && rs.arity() != arity) throw ValidationError("residue arity mismatch");
  rs.add_explicit(e.prime, e.excluded);
}

// ---------------------------------------------------------------------------
// Named covers

namespace detail {

inline Monomial coord(std::size_t i, std::size_t n, std::int64_t coeff = 1, unsigned power = 1) {
  Monomial m{coeff, std::vector<unsigned>(n, 0)};
  m.exponents[i] = power;
  return m;
}

}  // namespace detail

inline WeightVector hyperelliptic_weights(unsigned genus) {
  if (genus == 0) throw ValidationError("genus must be >= 1");
  std::vector<unsigned> w;
  for (unsigned k = 2; k <= 2 * genus + 1; ++k) w.push_back(2 * k);
  return WeightVector(std::move(w));
}

// t^{2g+1} + a_4 t^{2g-1} + a_6 t^{2g-2} + ... + a_{4g+2}; weight of t is 2.
inline Cover two_torsion_cover(unsigned genus) {
  WeightVector a = hyperelliptic_weights(genus);
  const unsigned d = 2 * genus + 1;
  const std::size_t n = a.size();
  std::vector<WeightedForm> c;
  for (unsigned j = 0; j < d; ++j) {
    const unsigned deg = (d - j) * 2;
    std::vector<Monomial> terms;
    // a_{2(d-j)} sits at coordinate index d - j - 2 (no t^{2g} term)
    if (d - j >= 2) terms.push_back(detail::coord(d - j - 2, n));
    c.emplace_back(a, deg, std::move(terms));
  }
  return Cover(a, 2, std::move(c), "two-torsion-g" + std::to_string(genus));
}

// t^2 + 16(4A^3 + 27B^2): a root exists iff -16(4A^3+27B^2) is a square.
inline Cover disc_square_g1() {
  WeightVector a{4, 6};
  WeightedForm c1(a, 6, {});
  WeightedForm c0(a, 12, {detail::coord(0, 2, 64, 3), detail::coord(1, 2, 432, 2)});
  return Cover(a, 6, {c0, c1}, "disc-square-g1");
}

// t^2 - x_0 with a_0 = 2w.
inline Cover square_coord(const WeightVector& a = WeightVector{2}) {
  if (a[0] % 2 != 0) throw ValidationError("square-coord needs an even first weight");
  const unsigned w = a[0] / 2;
  WeightedForm c1(a, w, {});
  WeightedForm c0(a, 2 * w, {detail::coord(0, a.size(), -1)});
  return Cover(a, w, {c0, c1}, "square-coord");
}

inline std::optional<Cover> named_cover(const std::string& name, std::optional<WeightVector> weights = {}) {
  if (name == "two-torsion-g1") return two_torsion_cover(1);
  if (name == "two-torsion-g2") return two_torsion_cover(2);
  if (name == "disc-square-g1") return disc_square_g1();
  if (name == "square-coord") return weights ? square_coord(*weights) : square_coord();
  return std::nullopt;
}

// Text format:
//   weights 4,6
//   aux_weight 2
//   c2
//   c1 1:1,0
//   c0 1:0,1
// Each c_j line lists monomials coeff:e0,e1,...; missing lines are zero.
inline Cover parse_cover(std::istream& in, std::string name = "file") {
  std::optional<WeightVector> weights;
  std::optional<unsigned> aux;
  std::map<unsigned, std::vector<Monomial>> rows;
  std::string line;
  int lineno = 0;
  auto fail = [&](const std::string& why) {
    throw ValidationError("cover file line " + std::to_string(lineno) + ": " + why);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) continue;
    if (key == "weights") {
      std::string w;
      if (!(ls >> w)) fail("missing weights");
      weights = parse_weights(w);
    } else if (key == "aux_weight") {
      long v = 0;
      if (!(ls >> v) || v <= 0) fail("aux_weight must be a positive integer");
      aux = static_cast<unsigned>(v);
    } else if (key.size() >= 2 && key[0] == 'c' && key.find_first_not_of("0123456789", 1) == std::string::npos) {
      unsigned j = static_cast<unsigned>(std::stoul(key.substr(1)));
      auto& terms = rows[j];
      std::string mono;
      while (ls >> mono) {
        auto colon = mono.find(':');
        if (colon == std::string::npos) fail("monomial '" + mono + "' lacks ':'");
        Monomial m;
        try {
          m.coeff = std::stoll(mono.substr(0, colon));
        } catch (...) {
          fail("bad coefficient in '" + mono + "'");
        }
        std::stringstream es(mono.substr(colon + 1));
        std::string e;
        while (std::getline(es, e, ',')) {
          if (e.empty() || e.find_first_not_of("0123456789") != std::string::npos) fail("bad exponent in '" + mono + "'");
          m.exponents.push_back(static_cast<unsigned>(std::stoul(e)));
        }
        terms.push_back(std::move(m));
      }
    } else {
      fail("unknown key '" + key + "'");
    }
  }
  if (!weights) throw ValidationError("cover file: missing 'weights'");
  if (!aux) throw ValidationError("cover file: missing 'aux_weight'");
  if (rows.empty()) throw ValidationError("cover file: no coefficient lines");
  const unsigned d = rows.rbegin()->first + 1;
  std::vector<WeightedForm> coeffs;
  for (unsigned j = 0; j < d; ++j) {
    auto it = rows.find(j);
    coeffs.emplace_back(*weights, (d - j) * *aux, it == rows.end() ? std::vector<Monomial>{} : it->second);
  }
  return Cover(*weights, *aux, std::move(coeffs), std::move(name));
}

inline Cover load_cover(const std::string& name_or_path, std::optional<WeightVector> weights = {}) {
  if (auto c = named_cover(name_or_path, weights)) return *c;
  std::ifstream in(name_or_path);
  if (!in) throw ValidationError("unknown cover '" + name_or_path + "' (not a built-in name or readable file)");
  return parse_cover(in, name_or_path);
}

}  // namespace wpstack
