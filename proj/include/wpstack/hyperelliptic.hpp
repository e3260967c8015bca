#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "wpstack/arith.hpp"
#include "wpstack/covers.hpp"
#include "wpstack/parallel.hpp"
#include "wpstack/poly.hpp"
#include "wpstack/wps.hpp"

namespace wpstack {

// y^2 = f(t) = t^{2g+1} + a_4 t^{2g-1} + a_6 t^{2g-2} + ... + a_{4g+2}
struct HyperellipticPoint {
  unsigned genus = 1;
  WpsPoint point;

  IntPoly f() const {
    const unsigned d = 2 * genus + 1;
    std::vector<BigInt> c(d + 1, 0);
    c[d] = 1;
    // coordinate i has weight 2(i+2) and multiplies t^{d-(i+2)}
    for (std::size_t i = 0; i < point.coords.size(); ++i) c[d - (i + 2)] = point.coords[i];
    return IntPoly(std::move(c));
  }
};

inline HyperellipticPoint curve_from_point(const WpsPoint& p, unsigned genus) {
  if (!(p.weights == hyperelliptic_weights(genus)))
    throw ValidationError("point weights " + p.weights.to_string() + " are not " +
                          hyperelliptic_weights(genus).to_string());
  return {genus, p};
}

inline bool is_smooth(const HyperellipticPoint& h) { return discriminant(h.f()) != 0; }

inline bool has_rational_two_torsion(const HyperellipticPoint& h) {
  return root_cover_member(two_torsion_cover(h.genus), h.point);
}

// ---------------------------------------------------------------------------
// Census

struct CensusRow {
  Rational B;
  std::uint64_t total = 0;
  std::uint64_t thin = 0;
  std::string thin_label;
};

struct CensusTable {
  unsigned genus = 1;
  std::string thin_label = "none";
  bool smooth_only = false;
  double wall_seconds = 0;
  std::vector<CensusRow> rows;

  void write_csv(std::ostream& out) const {
    out << "B,total,thin,thin_label\n";
    for (const auto& r : rows) out << to_string(r.B) << ',' << r.total << ',' << r.thin << ',' << r.thin_label << '\n';
  }
};

namespace detail {

// Nonzero discriminant test over a box. For g = 1 the closed form
// 4A^3 + 27B^2 is exact in 128 bits; otherwise the resultant is first
// reduced modulo a large prime and only the rare zero is confirmed exactly.
class SmoothnessTester {
 public:
  explicit SmoothnessTester(unsigned genus) : genus_(genus) {}

  bool operator()(const std::int64_t* x) const {
    if (genus_ == 1) {
      const i128 A = x[0], B = x[1];
      return 4 * A * A * A + 27 * B * B != 0;
    }
    constexpr std::uint64_t p = (std::uint64_t{1} << 61) - 1;
    const unsigned d = 2 * genus_ + 1;
    std::vector<std::uint64_t> f(d + 1, 0), df(d, 0);
    f[d] = 1;
    for (unsigned i = 0; i + 2 <= d; ++i) {
      const std::int64_t v = x[i] % static_cast<std::int64_t>(p);
      f[d - (i + 2)] = static_cast<std::uint64_t>(v < 0 ? v + static_cast<std::int64_t>(p) : v);
    }
    for (unsigned k = 1; k <= d; ++k) df[k - 1] = mulmod(f[k], k, p);
    if (resultant_mod(f, df, p) != 0) return true;
    HyperellipticPoint h{genus_, {hyperelliptic_weights(genus_), Coords(x, x + d - 1)}};
    return is_smooth(h);
  }

 private:
  unsigned genus_;
};

inline std::function<bool(const std::int64_t*)> thin_tester(const std::string& name, unsigned genus,
                                                             const Box& box) {
  if (name == "none") return nullptr;
  if (name == "two-torsion") {
    auto t = std::make_shared<RootCoverTester>(two_torsion_cover(genus), box.bound);
    return [t](const std::int64_t* x) { return (*t)(x); };
  }
  if (name == "disc-square") {
    if (genus != 1) throw ValidationError("disc-square tester is only defined for genus 1");
    auto t = std::make_shared<RootCoverTester>(disc_square_g1(), box.bound);
    return [t](const std::int64_t* x) { return (*t)(x); };
  }
  throw ValidationError("unknown thin tester '" + name + "'");
}

}  // namespace detail

// One pass over the box of the largest B; each point is charged to the first
// grid value whose box contains it, then the buckets are accumulated.
inline CensusTable census(unsigned genus, const std::vector<Rational>& grid, const std::string& thin,
                          bool smooth_only, const EnumOptions& opt = {}) {
  const auto start = std::chrono::steady_clock::now();
  if (grid.empty()) throw ValidationError("census grid is empty");
  for (std::size_t j = 0; j < grid.size(); ++j) {
    if (grid[j] <= 0) throw ValidationError("census heights must be positive");
    if (j && grid[j] <= grid[j - 1]) throw ValidationError("census heights must be strictly increasing");
  }
  const WeightVector a = hyperelliptic_weights(genus);
  const std::size_t n = a.size();
  Box box = box_for(a, grid.back());
  check_budget(box, opt.budget);

  std::vector<std::vector<std::int64_t>> thresholds;
  for (const auto& B : grid) thresholds.push_back(box_for(a, B).bound);

  auto thin_fn = detail::thin_tester(thin, genus, box);
  detail::SmoothnessTester smooth(genus);
  PrimitivityTest primitive(a, box, PointKind::Rational);
  auto [lo, hi] = outer_range(a, box);

  using Buckets = std::vector<std::pair<std::uint64_t, std::uint64_t>>;
  auto parts = map_chunks<Buckets>(lo, hi, opt.workers, [&](std::int64_t l, std::int64_t h) {
    Buckets b(grid.size(), {0, 0});
    visit_box(a, box, primitive, l, h, [&](const std::int64_t* x) {
      if (smooth_only && !smooth(x)) return;
      std::size_t j = 0;
      for (; j + 1 < grid.size(); ++j) {
        bool inside = true;
        for (std::size_t i = 0; i < n && inside; ++i) inside = std::llabs(x[i]) <= thresholds[j][i];
        if (inside) break;
      }
      ++b[j].first;
      if (thin_fn && thin_fn(x)) ++b[j].second;
    });
    return b;
  });

  CensusTable table;
  table.genus = genus;
  table.thin_label = thin;
  table.smooth_only = smooth_only;
  std::uint64_t total = 0, thin_count = 0;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    for (const auto& part : parts) {
      total += part[j].first;
      thin_count += part[j].second;
    }
    table.rows.push_back({grid[j], total, thin_count, thin});
  }
  table.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return table;
}

struct ExponentFit {
  double slope = 0;
  double std_error = 0;
  std::size_t rows_used = 0;
};

// Least-squares slope of log(count) against log(B), over rows with count > 0.
inline ExponentFit fit_exponent(const std::vector<std::pair<double, double>>& b_count) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& [b, c] : b_count)
    if (c > 0 && b > 0) pts.emplace_back(std::log(b), std::log(c));
  if (pts.size() < 3) throw ValidationError("exponent fit needs at least 3 rows with nonzero counts");
  const double m = static_cast<double>(pts.size());
  double mx = 0, my = 0;
  for (const auto& [x, y] : pts) {
    mx += x;
    my += y;
  }
  mx /= m;
  my /= m;
  double sxx = 0, sxy = 0;
  for (const auto& [x, y] : pts) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
  }
  if (sxx == 0) throw ValidationError("exponent fit needs at least two distinct heights");
  ExponentFit fit;
  fit.slope = sxy / sxx;
  double ssr = 0;
  for (const auto& [x, y] : pts) {
    const double r = y - my - fit.slope * (x - mx);
    ssr += r * r;
  }
  fit.std_error = std::sqrt(ssr / (m - 2) / sxx);
  fit.rows_used = pts.size();
  return fit;
}

inline ExponentFit fit_exponent(const CensusTable& table, const std::string& column) {
  if (column != "total" && column != "thin") throw ValidationError("unknown census column '" + column + "'");
  std::vector<std::pair<double, double>> pts;
  for (const auto& r : table.rows)
    pts.emplace_back(static_cast<double>(r.B), static_cast<double>(column == "total" ? r.total : r.thin));
  return fit_exponent(pts);
}

// floor(B^{min a / 2}), at least 1.
inline std::uint64_t recommended_Q(const Rational& B, const WeightVector& a) {
  if (B <= 0) throw ValidationError("height bound must be positive");
  const unsigned m = a.min_weight();
  BigInt q = m % 2 == 0 ? floor_pow(B, m / 2) : isqrt(floor_pow(B, m));
  if (q < 1) q = 1;
  if (q > std::numeric_limits<std::uint64_t>::max()) throw ValidationError("recommended Q exceeds 64 bits");
  return static_cast<std::uint64_t>(q);
}

}  // namespace wpstack
