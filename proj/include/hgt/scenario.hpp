#pragma once

// Scenario: full parameterisation of a run, plus the key = value text format
// used by scenario files and the shipped presets.
//
// Format: one `key = value` per line, `#` starts a comment. Keys:
//   name                     free text
//   trait_min, trait_max     trait interval (required)
//   b, d                     rate expressions in x (required)
//   C                        competition kernel in (x focal, y competitor) (required)
//   tau                      transfer kernel in (x donor, y recipient) (default 0)
//   beta, mu                 transfer denominator beta + mu * mass (default 0, 1)
//   p, sigma                 mutation probability per birth and step s.d. (default 0, 0.1)
//   boundary                 resample | clamp (default resample)
//   K                        system size, integer >= 1 (required)
//   initial                  comma separated trait:count pairs (required)
//   t_max, cadence           run horizon and sampling interval (default 100, 1)
//   seed                     64-bit seed (default 1)
//   event_limit              hard cap on events per run (default 1e9)
//   viability                strict | lenient (default strict)

#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hgt/expr.hpp"
#include "hgt/model.hpp"

namespace hgt {

struct RunControls {
  double t_max = 100.0;
  double cadence = 1.0;
  std::uint64_t seed = 1;
  long long event_limit = 1'000'000'000LL;
};

struct Scenario {
  std::string name;
  RateSet rates;
  MutationKernel mutation;
  TransferModel transfer;
  ScalingK K{1000};
  Viability viability = Viability::strict;
  std::vector<Species> initial;
  RunControls run;

  const TraitSpace& space() const noexcept { return rates.space; }

  std::vector<double> initial_traits() const {
    std::vector<double> t;
    for (const auto& s : initial) t.push_back(s.trait);
    return t;
  }

  /// Full model validation; throws ValidationError.
  void validate() const {
    mutation.check();
    for (const auto& s : initial) {
      if (!rates.space.contains(s.trait)) throw ValidationError("initial trait outside trait space");
      if (s.count < 0) throw ValidationError("negative initial count");
    }
    auto traits = initial_traits();
    hgt::validate(rates, viability, traits);
    if (!(run.t_max > 0.0)) throw ValidationError("t_max must be positive");
    if (!(run.cadence > 0.0)) throw ValidationError("cadence must be positive");
    if (run.event_limit < 1) throw ValidationError("event_limit must be positive");
  }
};

class ScenarioError : public std::runtime_error {
 public:
  ScenarioError(int line, const std::string& message)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message : message), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

namespace detail {

inline std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline double parse_real(const std::string& v, int line, const std::string& key) {
  double out = 0.0;
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size())
    throw ScenarioError(line, "'" + key + "' expects a number, got '" + v + "'");
  return out;
}

template <class Int>
Int parse_integer(const std::string& v, int line, const std::string& key) {
  Int out = 0;
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec == std::errc() && res.ptr == v.data() + v.size()) return out;
  // accept integral values in scientific notation such as 1e9
  double d = parse_real(v, line, key);
  if (d != static_cast<double>(static_cast<Int>(d)))
    throw ScenarioError(line, "'" + key + "' expects an integer, got '" + v + "'");
  return static_cast<Int>(d);
}

}  // namespace detail

/// Parse scenario text. Expressions go through the rate language.
inline Scenario parse_scenario(std::string_view text) {
  std::map<std::string, std::pair<std::string, int>> kv;
  int line_no = 0;
  std::istringstream in{std::string(text)};
  for (std::string raw; std::getline(in, raw);) {
    ++line_no;
    auto hash = raw.find('#');
    std::string line = detail::trim(std::string_view(raw).substr(0, hash));
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw ScenarioError(line_no, "expected 'key = value'");
    std::string key = detail::trim(std::string_view(line).substr(0, eq));
    std::string value = detail::trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) throw ScenarioError(line_no, "empty key");
    if (kv.count(key)) throw ScenarioError(line_no, "duplicate key '" + key + "'");
    kv[key] = {value, line_no};
  }

  static const std::set<std::string> known = {"name", "trait_min", "trait_max", "b",        "d",       "C",
                                              "tau",  "beta",      "mu",        "p",        "sigma",   "boundary",
                                              "K",    "initial",   "t_max",     "cadence",  "seed",    "event_limit",
                                              "viability"};
  for (const auto& [k, v] : kv)
    if (!known.count(k)) throw ScenarioError(v.second, "unknown key '" + k + "'");

  auto need = [&](const std::string& key) -> const std::pair<std::string, int>& {
    auto it = kv.find(key);
    if (it == kv.end()) throw ScenarioError(0, "missing required key '" + key + "'");
    return it->second;
  };
  auto real = [&](const std::string& key, std::optional<double> def) {
    auto it = kv.find(key);
    if (it == kv.end()) {
      if (!def) throw ScenarioError(0, "missing required key '" + key + "'");
      return *def;
    }
    return detail::parse_real(it->second.first, it->second.second, key);
  };
  auto expr = [&](const std::string& key, const std::set<std::string>& vars, std::optional<std::string> def) {
    auto it = kv.find(key);
    if (it == kv.end() && !def) throw ScenarioError(0, "missing required key '" + key + "'");
    std::string src = it == kv.end() ? *def : it->second.first;
    int line = it == kv.end() ? 0 : it->second.second;
    try {
      return parse(src, vars);
    } catch (const ParseError& e) {
      throw ScenarioError(line, "in '" + key + "': " + e.what());
    }
  };

  Scenario s;
  if (auto it = kv.find("name"); it != kv.end()) s.name = it->second.first;
  double lo = real("trait_min", std::nullopt), hi = real("trait_max", std::nullopt);
  try {
    s.rates.space = TraitSpace(lo, hi);
  } catch (const ValidationError& e) {
    throw ScenarioError(kv["trait_min"].second, e.what());
  }
  s.rates.birth = expr("b", {"x"}, std::nullopt);
  s.rates.death = expr("d", {"x"}, std::nullopt);
  s.rates.competition = expr("C", {"x", "y"}, std::nullopt);
  s.rates.transfer = expr("tau", {"x", "y"}, std::string("0"));
  s.rates.beta = real("beta", 0.0);
  s.rates.mu = real("mu", 1.0);
  s.mutation.p = real("p", 0.0);
  s.mutation.sigma = real("sigma", 0.1);
  if (auto it = kv.find("boundary"); it != kv.end()) {
    if (it->second.first == "resample") s.mutation.boundary = BoundaryPolicy::resample;
    else if (it->second.first == "clamp") s.mutation.boundary = BoundaryPolicy::clamp;
    else throw ScenarioError(it->second.second, "boundary must be 'resample' or 'clamp'");
  }
  {
    const auto& [v, line] = need("K");
    try {
      s.K = ScalingK(detail::parse_integer<long long>(v, line, "K"));
    } catch (const ValidationError& e) {
      throw ScenarioError(line, e.what());
    }
  }
  {
    const auto& [v, line] = need("initial");
    std::stringstream ss(v);
    for (std::string item; std::getline(ss, item, ',');) {
      item = detail::trim(item);
      auto colon = item.find(':');
      if (colon == std::string::npos) throw ScenarioError(line, "initial entries must be trait:count");
      double trait = detail::parse_real(detail::trim(item.substr(0, colon)), line, "initial");
      auto count = detail::parse_integer<long long>(detail::trim(item.substr(colon + 1)), line, "initial");
      bool merged = false;
      for (auto& sp : s.initial)
        if (sp.trait == trait) sp.count += count, merged = true;
      if (!merged) s.initial.push_back({trait, count});
    }
    if (s.initial.empty()) throw ScenarioError(line, "initial population is empty");
  }
  s.run.t_max = real("t_max", 100.0);
  s.run.cadence = real("cadence", 1.0);
  if (auto it = kv.find("seed"); it != kv.end())
    s.run.seed = detail::parse_integer<std::uint64_t>(it->second.first, it->second.second, "seed");
  if (auto it = kv.find("event_limit"); it != kv.end())
    s.run.event_limit = detail::parse_integer<long long>(it->second.first, it->second.second, "event_limit");
  if (auto it = kv.find("viability"); it != kv.end()) {
    if (it->second.first == "strict") s.viability = Viability::strict;
    else if (it->second.first == "lenient") s.viability = Viability::lenient;
    else throw ScenarioError(it->second.second, "viability must be 'strict' or 'lenient'");
  }

  try {
    s.validate();
  } catch (const ValidationError& e) {
    throw ScenarioError(0, std::string("invalid scenario: ") + e.what());
  } catch (const EvalError& e) {
    throw ScenarioError(0, std::string("invalid scenario: ") + e.what());
  }
  return s;
}

inline Scenario load_scenario_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ScenarioError(0, "cannot open scenario file '" + path + "'");
  std::stringstream buf;
  buf << f.rdbuf();
  return parse_scenario(buf.str());
}

// Presets ---------------------------------------------------------------------
//
// Unilateral frequency-dependent campaign on [0, 4]: b = 4 - x, d = 1, C = 0.5,
// p = 0.03, sigma = 0.1, K = 1000, started from 1000 individuals at trait 1.
// Two-trait presets place the resident at 0.25 and the mutant at 0.75 on
// [0, 1], so that both sit at the centres of a 2-cell grid.

namespace detail {

inline std::string campaign_preset(const std::string& name, const std::string& tau) {
  return "name = " + name +
         "\n"
         "trait_min = 0\ntrait_max = 4\n"
         "b = 4 - x\nd = 1\nC = 0.5\n"
         "tau = " +
         tau +
         " * (x > y)\n"
         "beta = 0\nmu = 1\n"
         "p = 0.03\nsigma = 0.1\nboundary = resample\n"
         "K = 1000\ninitial = 1:1000\n"
         "t_max = 2000\ncadence = 1\nseed = 1\n"
         "viability = lenient\n";
}

inline const std::map<std::string, std::string>& preset_table() {
  static const std::map<std::string, std::string> table = [] {
    std::map<std::string, std::string> t;
    t["tau0"] = campaign_preset("tau0", "0");
    t["tau02"] = campaign_preset("tau02", "0.2");
    t["tau06"] = campaign_preset("tau06", "0.6");
    t["tau07"] = campaign_preset("tau07", "0.7");
    t["tau10"] = campaign_preset("tau10", "1.0");
    const std::string two_trait_ab =
        "trait_min = 0\ntrait_max = 1\n"
        "b = 1.25 - x\nd = 0\nC = 1\n"
        "tau = 0.7 * (x > y)\n"
        "p = 0\nK = 1000\n";
    t["fig2a"] = "name = fig2a\n" + two_trait_ab + "beta = 1\nmu = 0\ninitial = 0.25:1000, 0.75:50\nt_max = 500\n";
    t["fig2b"] = "name = fig2b\n" + two_trait_ab + "beta = 0\nmu = 1\ninitial = 0.25:1000, 0.75:1\nt_max = 200\n";
    const std::string two_trait_cd =
        "trait_min = 0\ntrait_max = 1\n"
        "b = 1.1 - 0.4 * x\nd = 0\n"
        "C = (x < 0.5) * ((y < 0.5) * 2 + (y >= 0.5) * 1) + (x >= 0.5) * ((y < 0.5) * 2 + (y >= 0.5) * 4)\n"
        "p = 0\nK = 10000\ninitial = 0.25:5000, 0.75:1\nt_max = 500\n";
    t["fig2c"] = "name = fig2c\n" + two_trait_cd + "tau = 5 * (x > y)\nbeta = 1\nmu = 0\n";
    t["fig2d"] = "name = fig2d\n" + two_trait_cd + "tau = 0.5 * (x > y)\nbeta = 0\nmu = 1\n";
    const std::string directed =
        "trait_min = 0\ntrait_max = 4\n"
        "b = 4 - x\nd = 0\nC = 0.5\n"
        "beta = 0\nmu = 1\n"
        "p = 0.001\nsigma = 0.1\n"
        "K = 1000\ninitial = 1:6000\nt_max = 1000\n"
        "viability = lenient\n";
    t["directed"] = "name = directed\n" + directed + "tau = exp(x - y)\n";
    t["directed_notransfer"] = "name = directed_notransfer\n" + directed + "tau = 0\n";
    return t;
  }();
  return table;
}

}  // namespace detail

inline std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& [k, v] : detail::preset_table()) names.push_back(k);
  return names;
}

inline const std::string& preset_text(const std::string& name) {
  auto it = detail::preset_table().find(name);
  if (it == detail::preset_table().end()) throw ScenarioError(0, "unknown preset '" + name + "'");
  return it->second;
}

inline Scenario preset(const std::string& name) { return parse_scenario(preset_text(name)); }

}  // namespace hgt
