#pragma once

// JSON reports (requires nlohmann/json).

#include <cmath>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hgt/gillespie.hpp"
#include "hgt/invasion.hpp"
#include "hgt/phase.hpp"
#include "hgt/sweep.hpp"

namespace hgt {

using nlohmann::json;

namespace detail {
// NaN and infinities become null
inline json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }
}  // namespace detail

inline json to_json(const TwoTraitParams& p) {
  return {{"r_x", p.r_x},   {"r_y", p.r_y},         {"C_xx", p.c_xx}, {"C_xy", p.c_xy},
          {"C_yx", p.c_yx}, {"C_yy", p.c_yy},       {"alpha_xy", p.alpha}, {"beta", p.beta},
          {"mu", p.mu},     {"nbar_x", p.nbar_x()}, {"nbar_y", p.nbar_y()}};
}

inline json to_json(const FixedPoint& fp) {
  json eig = json::array();
  for (const auto& e : fp.eigenvalues) eig.push_back({{"re", e.real()}, {"im", e.imag()}});
  return {{"kind", to_string(fp.kind)},
          {"n_x", fp.location.n_x},
          {"n_y", fp.location.n_y},
          {"p_y", fp.p_y},
          {"eigenvalues", eig},
          {"stability", to_string(fp.stability)},
          {"index", fp.index},
          {"residual", fp.residual}};
}

inline json to_json(const PhaseReport& rep) {
  json boundary = json::array(), interior = json::array();
  for (const auto& fp : rep.boundary) boundary.push_back(to_json(fp));
  for (const auto& fp : rep.interior.points) interior.push_back(to_json(fp));
  return {{"params", to_json(rep.params)},
          {"S_y_on_x", rep.S_yx},
          {"S_x_on_y", rep.S_xy},
          {"boundary", boundary},
          {"interior", interior},
          {"line_of_fixed_points", rep.interior.line_of_fixed_points},
          {"ceiling", interior_ceiling(rep.params)},
          {"ceiling_exceeded", rep.interior.ceiling_exceeded},
          {"poincare",
           {{"checked", rep.poincare.checked},
            {"pass", rep.poincare.pass},
            {"expected", rep.poincare.expected},
            {"index_sum", rep.poincare.index_sum},
            {"notice", rep.poincare.notice}}},
          {"diagram", rep.diagram.label()}};
}

inline json to_json(const ConstantCReport& c) {
  return {{"frequency_dependent", c.frequency_dependent},
          {"phat_y", detail::number(c.phat)},
          {"exists", c.exists},
          {"stable", c.stable},
          {"invader_fixes", c.invader_fixes}};
}

inline json to_json(const InvasionReport& r) {
  return {{"S", r.S},
          {"P", r.P},
          {"T_fix", detail::number(r.T_fix)},
          {"branching_b", detail::number(r.branching_b)},
          {"branching_d", detail::number(r.branching_d)}};
}

inline json to_json(const McEstimate& m) {
  return {{"estimate", m.estimate},
          {"stderr", m.std_error},
          {"successes", m.successes},
          {"replicates", m.replicates},
          {"failed", m.failed}};
}

struct RunSummary {
  std::string status;
  double wall_seconds = 0.0;
  long long events = 0;
  double final_time = 0.0;
  long long N = 0;
  double mean_trait = 0.0;
  double trait_variance = 0.0;
  std::vector<std::string> artifacts;
};

inline json to_json(const RunSummary& s) {
  return {{"status", s.status},
          {"wall_seconds", s.wall_seconds},
          {"events", s.events},
          {"final_time", s.final_time},
          {"N", s.N},
          {"mean_trait", s.mean_trait},
          {"trait_variance", s.trait_variance},
          {"artifacts", s.artifacts}};
}

/// Deterministic part of a sweep (no timings), identical for any thread count.
inline json sweep_summary_json(const SweepResult& r) {
  json failed = json::array();
  for (std::size_t i = 0; i < r.failed.size(); ++i) failed.push_back({{"replicate", r.failed[i]}, {"error", r.errors[i]}});
  long long extinct = 0;
  for (const auto& rep : r.replicates) extinct += rep.status == RunStatus::extinction;
  return {{"replicates", r.replicates.size() + r.failed.size()},
          {"completed", r.replicates.size()},
          {"extinct", extinct},
          {"extinction_fraction", r.extinction_fraction()},
          {"failed", failed}};
}

}  // namespace hgt
