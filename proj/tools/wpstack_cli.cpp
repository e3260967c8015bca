#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "wpstack/covers.hpp"
#include "wpstack/hyperelliptic.hpp"
#include "wpstack/qf.hpp"
#include "wpstack/sieve.hpp"
#include "wpstack/wps.hpp"

using namespace wpstack;
using json = nlohmann::ordered_json;

namespace {

enum Exit { kOk = 0, kValidation = 2, kBudget = 3, kInvariant = 4 };

const std::vector<std::string> kCommands{"count",         "count-integral", "enumerate", "sieve-bound",
                                         "survivors",     "ls-check",       "image-density", "census",
                                         "fit",           "qf-reduce",      "qf-G"};

// Every option is kept as text so config-file values and flags go through
// the same parsing.
const std::vector<std::string> kValueKeys{"weights", "height-max", "heights", "Q",     "m",      "residues",
                                          "cover",   "primes",     "prime-max", "genus", "thin", "input",
                                          "column",  "D",          "x",       "density", "workers", "output",
                                          "budget"};
const std::vector<std::string> kFlagKeys{"integral", "smooth-only", "force"};

struct Settings {
  std::string command;
  std::map<std::string, std::string> values;
  std::map<std::string, bool> flags;

  bool has(const std::string& k) const { return values.count(k) > 0; }
  const std::string& get(const std::string& k) const {
    auto it = values.find(k);
    if (it == values.end()) throw ValidationError("missing required option --" + k);
    return it->second;
  }
  std::string get_or(const std::string& k, const std::string& fallback) const {
    return has(k) ? values.at(k) : fallback;
  }
  bool flag(const std::string& k) const {
    auto it = flags.find(k);
    return it != flags.end() && it->second;
  }
};

std::string trim(std::string s) {
  s.erase(0, s.find_first_not_of(" \t\r"));
  s.erase(s.find_last_not_of(" \t\r") + 1);
  return s;
}

std::string canonical_key(std::string k) {
  for (auto& c : k)
    if (c == '_') c = '-';
  return k;
}

std::map<std::string, std::string> read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file '" + path + "'");
  std::map<std::string, std::string> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ValidationError("config line " + std::to_string(lineno) + ": expected key=value");
    std::string key = canonical_key(trim(line.substr(0, eq)));
    std::string value = trim(line.substr(eq + 1));
    bool known = key == "command" || std::find(kValueKeys.begin(), kValueKeys.end(), key) != kValueKeys.end() ||
                 std::find(kFlagKeys.begin(), kFlagKeys.end(), key) != kFlagKeys.end();
    if (!known) throw ValidationError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    out[key] = value;
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ValidationError("option " + key + " expects true or false, got '" + v + "'");
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, sep)) out.push_back(trim(tok));
  return out;
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos)
    throw ValidationError("option --" + key + " expects a non-negative integer, got '" + v + "'");
  try {
    return std::stoull(v);
  } catch (...) {
    throw ValidationError("option --" + key + " is out of range");
  }
}

std::int64_t parse_i64(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  std::int64_t out = 0;
  try {
    out = std::stoll(v, &pos);
  } catch (...) {
    pos = 0;
  }
  if (pos != v.size() || v.empty()) throw ValidationError("option --" + key + " expects an integer, got '" + v + "'");
  return out;
}

std::string fmt_real(long double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12Lg", v);
  return buf;
}

std::vector<Rational> height_grid(const Settings& s) {
  std::vector<Rational> grid;
  if (s.has("heights")) {
    for (const auto& t : split(s.get("heights"), ',')) grid.push_back(parse_rational(t));
  } else {
    grid.push_back(parse_rational(s.get("height-max")));
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] <= 0) throw ValidationError("heights must be positive");
    if (i && grid[i] <= grid[i - 1]) throw ValidationError("heights must be strictly increasing");
  }
  return grid;
}

EnumOptions enum_options(const Settings& s) {
  EnumOptions opt;
  if (s.has("workers")) {
    auto w = parse_u64("workers", s.get("workers"));
    if (w < 1) throw ValidationError("--workers must be >= 1");
    opt.workers = static_cast<unsigned>(w);
  }
  if (s.has("budget")) {
    try {
      opt.budget = std::stod(s.get("budget"));
    } catch (...) {
      throw ValidationError("--budget expects a number");
    }
    if (!(opt.budget > 0)) throw ValidationError("--budget must be positive");
  }
  if (s.flag("force")) opt.budget = std::numeric_limits<double>::infinity();
  return opt;
}

// Omega from a residue file, or from a cover at every prime <= Q.
ResidueSystem residue_system(const Settings& s, const WeightVector& a, std::uint64_t Q) {
  if (s.has("residues") == s.has("cover")) throw ValidationError("give exactly one of --residues or --cover");
  ResidueSystem rs;
  if (s.has("residues")) {
    rs = load_residue_system(s.get("residues"));
  } else {
    Cover c = load_cover(s.get("cover"), a);
    if (!(c.weights() == a)) throw ValidationError("cover weights do not match --weights");
    rs = ResidueSystem(1, a.size());
    if (Q >= 2)
      for (auto p : primes_up_to(Q)) add_to(rs, omega_from_cover(c, p), a.size());
  }
  if (s.has("m") && parse_u64("m", s.get("m")) != rs.modulus_exponent())
    throw ValidationError("--m does not match the modulus exponent of the residue system");
  return rs;
}

struct Output {
  std::string csv;
  json extra = json::object();
  int exit_code = kOk;
};

Output run_count(const Settings& s, bool integral) {
  WeightVector a = parse_weights(s.get("weights"));
  EnumOptions opt = enum_options(s);
  std::ostringstream out;
  out << "B," << (integral ? "count_integral" : "count") << "\n";
  for (const auto& B : height_grid(s))
    out << to_string(B) << ',' << (integral ? count_integral(a, B, opt) : count(a, B, opt)) << "\n";
  return {out.str()};
}

Output run_enumerate(const Settings& s) {
  WeightVector a = parse_weights(s.get("weights"));
  Rational B = parse_rational(s.get("height-max"));
  EnumOptions opt = enum_options(s);
  std::ostringstream out;
  for (std::size_t i = 0; i < a.size(); ++i) out << (i ? "," : "") << 'x' << i;
  out << "\n";
  auto emit = [&](const Coords& c) {
    for (std::size_t i = 0; i < c.size(); ++i) out << (i ? "," : "") << c[i];
    out << "\n";
  };
  if (s.flag("integral")) {
    for (const auto& p : enumerate_integral(a, B, opt)) emit(p.coords);
  } else {
    for (const auto& p : enumerate_points(a, B, opt)) emit(p.coords);
  }
  return {out.str()};
}

Output run_sieve(const Settings& s, const std::string& which) {
  WeightVector a = parse_weights(s.get("weights"));
  const std::uint64_t Q = parse_u64("Q", s.get("Q"));
  if (Q == 0) throw ValidationError("--Q must be >= 1");
  ResidueSystem rs = residue_system(s, a, Q);
  EnumOptions opt = enum_options(s);
  std::ostringstream out;
  Output result;
  if (which == "sieve-bound") out << "B,Q,G,bound\n";
  if (which == "survivors") out << "B,Q,survivors\n";
  if (which == "ls-check") out << "B,Q,lhs,rhs,holds\n";
  for (const auto& B : height_grid(s)) {
    SieveParams params{B, Q, a};
    out << to_string(B) << ',' << Q << ',';
    if (which == "sieve-bound") {
      out << to_string(compute_G(Q, rs)) << ',' << fmt_real(sieve_upper_bound(params, rs)) << "\n";
    } else if (which == "survivors") {
      out << survivors(params, rs, opt) << "\n";
    } else {
      auto check = testable_ls_inequality(params, rs, opt);
      out << check.lhs << ',' << fmt_real(check.rhs) << ',' << (check.holds ? "true" : "false") << "\n";
      // the inequality is a theorem; a failure means a bug
      if (!check.holds) result.exit_code = kInvariant;
    }
  }
  result.csv = out.str();
  return result;
}

Output run_image_density(const Settings& s) {
  std::optional<WeightVector> a;
  if (s.has("weights")) a = parse_weights(s.get("weights"));
  Cover c = load_cover(s.get("cover"), a);
  std::vector<std::uint64_t> primes;
  if (s.has("primes")) {
    for (const auto& t : split(s.get("primes"), ',')) primes.push_back(parse_u64("primes", t));
  } else {
    auto pmax = parse_u64("prime-max", s.get("prime-max"));
    if (pmax >= 2) primes = primes_up_to(pmax);
  }
  EnumOptions opt = enum_options(s);
  std::ostringstream out;
  out << "p,density,density_real\n";
  for (auto p : primes) {
    Rational d = image_density_mod_p(c, p, opt.budget);
    out << p << ',' << to_string(d) << ',' << fmt_real(static_cast<long double>(d)) << "\n";
  }
  return {out.str()};
}

Output run_census(const Settings& s) {
  auto genus = parse_u64("genus", s.get_or("genus", "1"));
  if (genus < 1 || genus > 8) throw ValidationError("--genus must be between 1 and 8");
  CensusTable t = census(static_cast<unsigned>(genus), height_grid(s), s.get_or("thin", "two-torsion"),
                         s.flag("smooth-only"), enum_options(s));
  std::ostringstream out;
  t.write_csv(out);
  Output o{out.str()};
  o.extra["genus"] = genus;
  o.extra["census_seconds"] = t.wall_seconds;
  return o;
}

Output run_fit(const Settings& s) {
  const std::string path = s.get("input");
  const std::string column = s.get_or("column", "total");
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open input '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("input '" + path + "' is empty");
  auto header = split(line, ',');
  auto col = std::find(header.begin(), header.end(), column);
  auto bcol = std::find(header.begin(), header.end(), "B");
  if (col == header.end()) throw ValidationError("input has no column '" + column + "'");
  if (bcol == header.end()) throw ValidationError("input has no column 'B'");
  std::vector<std::pair<double, double>> pts;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto cells = split(line, ',');
    if (cells.size() != header.size()) throw ValidationError("ragged row in '" + path + "'");
    double b = static_cast<double>(parse_rational(cells[static_cast<std::size_t>(bcol - header.begin())]));
    const std::string& v = cells[static_cast<std::size_t>(col - header.begin())];
    double c = 0;
    try {
      c = std::stod(v);
    } catch (...) {
      throw ValidationError("non-numeric value '" + v + "' in column " + column);
    }
    pts.emplace_back(b, c);
  }
  ExponentFit fit = fit_exponent(pts);
  json j;
  j["column"] = column;
  j["slope"] = fit.slope;
  j["stderr"] = fit.std_error;
  j["rows"] = fit.rows_used;
  return {j.dump() + "\n"};
}

QuadTuple parse_quad_tuple(const QuadField& k, const std::string& text) {
  QuadTuple x;
  for (const auto& item : split(text, ',')) {
    auto colon = item.find(':');
    if (colon == std::string::npos) throw ValidationError("--x entries must look like a:b, got '" + item + "'");
    x.push_back(k.element(BigInt(parse_i64("x", trim(item.substr(0, colon)))),
                          BigInt(parse_i64("x", trim(item.substr(colon + 1))))));
  }
  return x;
}

Output run_qf_reduce(const Settings& s) {
  QuadField k(parse_i64("D", s.get("D")));
  WeightVector a = parse_weights(s.get("weights"));
  QuadTuple x = parse_quad_tuple(k, s.get("x"));
  detail::check_arity(x.size(), a);
  Reduction r = reduce_to_domain(x, DomainSpec(k, a));
  std::ostringstream out;
  out << "k,coord,a,b\n";
  for (std::size_t i = 0; i < r.reduced.size(); ++i)
    out << r.k << ',' << i << ',' << r.reduced[i].a << ',' << r.reduced[i].b << "\n";
  return {out.str()};
}

Output run_qf_G(const Settings& s) {
  QuadField k(parse_i64("D", s.get("D")));
  auto Q = parse_u64("Q", s.get("Q"));
  Rational nu = parse_rational(s.get_or("density", "1/2"));
  std::ostringstream out;
  out << "D,Q,G\n" << k.D() << ',' << Q << ',' << to_string(compute_G_k(k, Q, nu)) << "\n";
  return {out.str()};
}

Output dispatch(const Settings& s) {
  const std::string& c = s.command;
  if (c == "count") return run_count(s, false);
  if (c == "count-integral") return run_count(s, true);
  if (c == "enumerate") return run_enumerate(s);
  if (c == "sieve-bound" || c == "survivors" || c == "ls-check") return run_sieve(s, c);
  if (c == "image-density") return run_image_density(s);
  if (c == "census") return run_census(s);
  if (c == "fit") return run_fit(s);
  if (c == "qf-reduce") return run_qf_reduce(s);
  if (c == "qf-G") return run_qf_G(s);
  throw ValidationError("unknown command '" + c + "'");
}

int fail(int code, const std::string& kind, const std::string& message, const json& extra = json::object()) {
  json j;
  j["error"] = kind;
  j["message"] = message;
  for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();
  std::cerr << j.dump() << std::endl;
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weighted projective stack point counts, sieves and thin-set experiments"};
  app.set_version_flag("--version", std::string(WPSTACK_VERSION));
  std::string command, config_path;
  std::map<std::string, std::string> flag_values;
  std::map<std::string, bool> flag_switches;
  app.add_option("command", command, "One of: count, count-integral, enumerate, sieve-bound, survivors, ls-check, "
                                     "image-density, census, fit, qf-reduce, qf-G");
  app.add_option("--config", config_path, "key=value file; flags on the command line take precedence");
  for (const auto& k : kValueKeys) app.add_option("--" + k, flag_values[k]);
  for (const auto& k : kFlagKeys) app.add_flag("--" + k, flag_switches[k]);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(kValidation, "validation", e.what());
  }

  Settings s;
  try {
    std::map<std::string, std::string> cfg;
    if (!config_path.empty()) cfg = read_config(config_path);
    s.command = !command.empty() ? command : (cfg.count("command") ? cfg["command"] : "");
    if (s.command.empty()) throw ValidationError("no command given");
    if (std::find(kCommands.begin(), kCommands.end(), s.command) == kCommands.end())
      throw ValidationError("unknown command '" + s.command + "'");
    for (const auto& k : kValueKeys) {
      if (app.get_option("--" + k)->count() > 0)
        s.values[k] = flag_values[k];
      else if (cfg.count(k))
        s.values[k] = cfg[k];
    }
    for (const auto& k : kFlagKeys) {
      bool v = app.get_option("--" + k)->count() > 0 ? flag_switches[k] : false;
      if (!v && cfg.count(k)) v = parse_bool(k, cfg[k]);
      s.flags[k] = v;
    }
  } catch (const std::exception& e) {
    return fail(kValidation, "validation", e.what());
  }

  const auto start = std::chrono::steady_clock::now();
  Output out;
  try {
    out = dispatch(s);
  } catch (const BudgetExceeded& e) {
    json extra;
    extra["volume"] = e.volume();
    extra["hint"] = "raise --budget or pass --force";
    return fail(kBudget, "budget", e.what(), extra);
  } catch (const ValidationError& e) {
    return fail(kValidation, "validation", e.what());
  } catch (const BoundaryAmbiguity& e) {
    return fail(kValidation, "boundary-ambiguity", e.what());
  } catch (const InvariantViolation& e) {
    return fail(kInvariant, "invariant", e.what());
  } catch (const std::exception& e) {
    return fail(kInvariant, "internal", e.what());
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  if (!s.has("output")) {
    std::cout << out.csv << std::flush;
  } else {
    const std::string path = s.get("output");
    std::ofstream f(path, std::ios::binary);
    if (!f) return fail(kValidation, "validation", "cannot write output '" + path + "'");
    f << out.csv;
    json meta;
    meta["command"] = s.command;
    json config = json::object();
    for (const auto& [k, v] : s.values) config[k] = v;
    for (const auto& [k, v] : s.flags) config[k] = v;
    meta["config"] = config;
    meta["wall_seconds"] = seconds;
    meta["version"] = WPSTACK_VERSION;
    for (auto it = out.extra.begin(); it != out.extra.end(); ++it) meta[it.key()] = it.value();
    std::ofstream side(path + ".json", std::ios::binary);
    side << meta.dump(2) << "\n";
  }
  if (out.exit_code == kInvariant) return fail(kInvariant, "invariant", "large-sieve inequality violated");
  return out.exit_code;
}
