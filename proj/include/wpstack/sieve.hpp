#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "wpstack/arith.hpp"
#include "wpstack/errors.hpp"
#include "wpstack/parallel.hpp"
#include "wpstack/wps.hpp"

namespace wpstack {

using Residue = std::vector<std::uint64_t>;

// Excluded residue classes Omega_{p^m} at one prime. Membership is given by
// an explicit table over (Z/p^m)^{n+1}, by a predicate, or not at all
// (density-only entries feed G(Q) but cannot drive the survivor count).
struct ResidueEntry {
  std::uint64_t prime = 0;
  Rational density = 0;
  std::shared_ptr<const std::vector<bool>> table;  // mixed-radix index, base p^m
  std::function<bool(const std::uint64_t*)> predicate;

  bool has_membership() const { return table != nullptr || static_cast<bool>(predicate); }
};

class ResidueSystem {
 public:
  explicit ResidueSystem(unsigned modulus_exponent = 1, std::size_t arity = 0)
      : m_(modulus_exponent), arity_(arity) {
    if (m_ == 0) throw ValidationError("modulus exponent must be >= 1");
  }

  unsigned modulus_exponent() const { return m_; }
  // n+1, or 0 while only density entries are present.
  std::size_t arity() const { return arity_; }
  const std::map<std::uint64_t, ResidueEntry>& entries() const { return entries_; }

  std::uint64_t modulus(std::uint64_t p) const {
    std::uint64_t q = 1;
    for (unsigned i = 0; i < m_; ++i) q *= p;
    return q;
  }

  Rational density(std::uint64_t p) const {
    auto it = entries_.find(p);
    return it == entries_.end() ? Rational(0) : it->second.density;
  }

  void add_density(std::uint64_t p, const Rational& nu) {
    check_prime(p);
    if (nu < 0 || nu > 1) throw ValidationError("density at " + std::to_string(p) + " outside [0,1]");
    ResidueEntry e;
    e.prime = p;
    e.density = nu;
    entries_[p] = std::move(e);
  }

  void add_explicit(std::uint64_t p, const std::vector<Residue>& tuples) {
    check_prime(p);
    const std::uint64_t q = modulus(p);
    std::size_t arity = tuples.empty() ? arity_ : tuples.front().size();
    if (arity == 0) throw ValidationError("explicit residue set needs a known arity");
    set_arity(arity);
    const double cells = std::pow(static_cast<double>(q), static_cast<double>(arity));
    if (cells > 1e8) throw BudgetExceeded("residue table too large", cells);
    auto table = std::make_shared<std::vector<bool>>(static_cast<std::size_t>(cells), false);
    std::size_t distinct = 0;
    for (const auto& r : tuples) {
      if (r.size() != arity) throw ValidationError("residue tuple arity mismatch");
      std::size_t idx = 0;
      for (std::size_t i = arity; i-- > 0;) {
        if (r[i] >= q) throw ValidationError("residue coordinate out of range [0, p^m)");
        idx = idx * q + r[i];
      }
      if (!(*table)[idx]) {
        (*table)[idx] = true;
        ++distinct;
      }
    }
    ResidueEntry e;
    e.prime = p;
    e.density = Rational(BigInt(distinct), pow(BigInt(q), static_cast<unsigned>(arity)));
    e.table = std::move(table);
    entries_[p] = std::move(e);
  }

  // Density is computed by exhausting (Z/p^m)^{arity}.
  void add_predicate(std::uint64_t p, std::size_t arity, std::function<bool(const std::uint64_t*)> pred) {
    check_prime(p);
    set_arity(arity);
    const std::uint64_t q = modulus(p);
    Residue r(arity, 0);
    BigInt hits = 0, total = 0;
    for (;;) {
      if (pred(r.data())) ++hits;
      ++total;
      std::size_t i = 0;
      while (i < arity && r[i] == q - 1) r[i++] = 0;
      if (i == arity) break;
      ++r[i];
    }
    ResidueEntry e;
    e.prime = p;
    e.density = Rational(hits, total);
    e.predicate = std::move(pred);
    entries_[p] = std::move(e);
  }

  // True iff x mod p^m lies in Omega_{p^m}. Requires membership data.
  bool excludes(const ResidueEntry& e, const std::int64_t* x) const {
    const auto q = static_cast<std::int64_t>(modulus(e.prime));
    if (e.table) {
      std::size_t idx = 0;
      for (std::size_t i = arity_; i-- > 0;) {
        std::int64_t r = x[i] % q;
        if (r < 0) r += q;
        idx = idx * static_cast<std::size_t>(q) + static_cast<std::size_t>(r);
      }
      return (*e.table)[idx];
    }
    std::uint64_t buf[16];
    std::vector<std::uint64_t> heap;
    std::uint64_t* r = buf;
    if (arity_ > 16) {
      heap.resize(arity_);
      r = heap.data();
    }
    for (std::size_t i = 0; i < arity_; ++i) {
      std::int64_t v = x[i] % q;
      r[i] = static_cast<std::uint64_t>(v < 0 ? v + q : v);
    }
    return e.predicate(r);
  }

 private:
  static void check_prime(std::uint64_t p) {
    if (!is_prime(p)) throw ValidationError("residue entry at non-prime " + std::to_string(p));
  }
  void set_arity(std::size_t a) {
    if (arity_ != 0 && arity_ != a) throw ValidationError("residue tuples of inconsistent arity");
    arity_ = a;
  }

  unsigned m_;
  std::size_t arity_;
  std::map<std::uint64_t, ResidueEntry> entries_;
};

struct SieveParams {
  Rational height_bound;  // B
  std::uint64_t q_max;    // Q
  WeightVector weights;
};

// Sum over squarefree q <= Q of prod_{p | q} nu_p / (1 - nu_p), exactly.
inline Rational compute_G(std::uint64_t q_max, const ResidueSystem& rs) {
  if (q_max == 0) throw ValidationError("Q must be >= 1");
  std::vector<std::uint64_t> primes;
  std::vector<Rational> weight;
  for (const auto& [p, e] : rs.entries()) {
    if (p > q_max || e.density == 0) continue;
    if (e.density >= 1) throw ValidationError("density 1 at prime " + std::to_string(p) + ": nothing survives");
    primes.push_back(p);
    weight.push_back(e.density / (1 - e.density));
  }
  // Depth-first over products of distinct primes; primes are ascending so a
  // branch stops at the first factor that overshoots Q.
  Rational total = 0;
  std::function<void(std::size_t, std::uint64_t, const Rational&)> walk = [&](std::size_t start, std::uint64_t q,
                                                                               const Rational& term) {
    total += term;
    for (std::size_t j = start; j < primes.size(); ++j) {
      if (primes[j] > q_max / q) break;
      walk(j + 1, q * primes[j], term * weight[j]);
    }
  };
  walk(0, 1, Rational(1));
  return total;
}

// prod_i (B^{a_i} + Q^{2m}) / G(Q) with the implicit constant set to 1.
// A shape for comparison, not a certified bound.
inline long double sieve_upper_bound(const SieveParams& params, const ResidueSystem& rs) {
  Rational g = compute_G(params.q_max, rs);
  if (g <= 0) throw InvariantViolation("G(Q) must be positive");
  Rational prod = 1;
  BigInt q2m = pow(BigInt(params.q_max), 2 * rs.modulus_exponent());
  for (unsigned a : params.weights.weights()) prod *= pow(params.height_bound, a) + Rational(q2m);
  return static_cast<long double>(prod / g);
}

namespace detail {

inline std::vector<const ResidueEntry*> active_entries(const SieveParams& params, const ResidueSystem& rs) {
  std::vector<const ResidueEntry*> active;
  for (const auto& [p, e] : rs.entries()) {
    if (p > params.q_max || e.density == 0) continue;
    if (!e.has_membership())
      throw ValidationError("prime " + std::to_string(p) + " has a density but no residue set to sieve with");
    if (rs.arity() != params.weights.size())
      throw ValidationError("residue arity does not match the weight vector");
    active.push_back(&e);
  }
  return active;
}

}  // namespace detail

// Tuples in the box |x_i| <= B^{a_i}, not all zero, sign-canonical, whose
// reduction mod p^m avoids Omega_{p^m} for every prime p <= Q.
inline std::uint64_t survivors(const SieveParams& params, const ResidueSystem& rs, const EnumOptions& opt = {}) {
  const WeightVector& a = params.weights;
  Box box = box_for(a, params.height_bound);
  check_budget(box, opt.budget);
  auto active = detail::active_entries(params, rs);
  auto [lo, hi] = outer_range(a, box);
  auto parts = map_chunks<std::uint64_t>(lo, hi, opt.workers, [&](std::int64_t l, std::int64_t h) {
    std::uint64_t c = 0;
    visit_box_tuples(a, box, l, h, [&](const std::int64_t* x) {
      for (const ResidueEntry* e : active)
        if (rs.excludes(*e, x)) return;
      ++c;
    });
    return c;
  });
  return std::accumulate(parts.begin(), parts.end(), std::uint64_t{0});
}

struct LargeSieveCheck {
  std::uint64_t lhs = 0;  // survivors
  long double rhs = 0;    // prod_i (N_i^{1/2} + Q^m)^2 / G(Q)
  bool holds = false;
};

// The constant-free large-sieve inequality over Q, with N_i = 2 floor(B^{a_i}) + 1.
inline LargeSieveCheck testable_ls_inequality(const SieveParams& params, const ResidueSystem& rs,
                                              const EnumOptions& opt = {}) {
  LargeSieveCheck out;
  out.lhs = survivors(params, rs, opt);
  Box box = box_for(params.weights, params.height_bound);
  long double qm = std::pow(static_cast<long double>(params.q_max), static_cast<long double>(rs.modulus_exponent()));
  long double prod = 1;
  for (auto b : box.bound) {
    long double side = std::sqrt(2.0L * static_cast<long double>(b) + 1.0L) + qm;
    prod *= side * side;
  }
  out.rhs = prod / static_cast<long double>(compute_G(params.q_max, rs));
  out.holds = static_cast<long double>(out.lhs) <= out.rhs;
  return out;
}

// Line format, '#' starts a comment:
//   p m density_num density_den
//   p m explicit r0,r1,...        (one residue tuple per row)
inline ResidueSystem parse_residue_system(std::istream& in) {
  std::map<std::uint64_t, Rational> densities;
  std::map<std::uint64_t, std::vector<Residue>> explicit_rows;
  std::optional<unsigned> m;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    std::istringstream ls(line);
    std::string p_s, m_s, third;
    if (!(ls >> p_s)) continue;
    auto fail = [&](const std::string& why) {
      throw ValidationError("residue file line " + std::to_string(lineno) + ": " + why);
    };
    if (!(ls >> m_s >> third)) fail("expected 'p m ...'");
    std::uint64_t p, mm;
    try {
      p = std::stoull(p_s);
      mm = std::stoull(m_s);
    } catch (...) {
      fail("malformed prime or exponent");
    }
    if (m && *m != mm) fail("mixed modulus exponents");
    m = static_cast<unsigned>(mm);
    if (third == "explicit") {
      std::string tuple;
      if (!(ls >> tuple)) fail("missing residue tuple");
      Residue r;
      std::stringstream ts(tuple);
      std::string tok;
      while (std::getline(ts, tok, ',')) {
        if (tok.empty() || tok.find_first_not_of("0123456789") != std::string::npos) fail("malformed residue");
        r.push_back(std::stoull(tok));
      }
      if (densities.count(p)) fail("prime given both as density and explicit");
      explicit_rows[p].push_back(std::move(r));
    } else {
      std::string den;
      if (!(ls >> den)) fail("missing density denominator");
      if (explicit_rows.count(p)) fail("prime given both as density and explicit");
      densities[p] = parse_rational(third + "/" + den);
    }
  }
  ResidueSystem rs(m.value_or(1));
  for (const auto& [p, rows] : explicit_rows) rs.add_explicit(p, rows);
  for (const auto& [p, nu] : densities) rs.add_density(p, nu);
  return rs;
}

inline ResidueSystem load_residue_system(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open residue file '" + path + "'");
  return parse_residue_system(in);
}

}  // namespace wpstack
