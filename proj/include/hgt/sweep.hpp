#pragma once

// Replicate sweeps of the stochastic engine with merged per-time statistics.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "hgt/ensemble.hpp"
#include "hgt/gillespie.hpp"
#include "hgt/scenario.hpp"

namespace hgt {

struct ReplicateSummary {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  RunStatus status = RunStatus::time_limit;
  double final_time = 0.0;
  long long events = 0;
  long long N = 0;
  double mean_trait = 0.0;
  double trait_variance = 0.0;
  std::vector<long long> N_series;  // at the sweep's sample times
  std::vector<double> mean_series;  // NaN once extinct
};

struct SweepResult {
  std::vector<double> times;
  std::vector<ReplicateSummary> replicates;  // successful ones, by index
  std::vector<std::size_t> failed;
  std::vector<std::string> errors;

  double extinction_fraction() const {
    if (replicates.empty()) return 0.0;
    long long n = 0;
    for (const auto& r : replicates) n += r.status == RunStatus::extinction;
    return static_cast<double>(n) / static_cast<double>(replicates.size());
  }
};

/// Runs one replicate and records N and mean trait at every multiple of
/// cadence up to t_max.
inline ReplicateSummary run_replicate(const std::shared_ptr<const PreparedModel>& model, std::size_t index,
                                      std::uint64_t seed, double t_max, double cadence) {
  const auto& sc = model->scenario;
  Simulator sim(model, Population(sc.initial), seed);
  ReplicateSummary r;
  r.index = index;
  r.seed = seed;
  const auto samples = static_cast<std::size_t>(std::floor(t_max / cadence + 1e-9)) + 1;
  r.N_series.assign(samples, 0);
  r.mean_series.assign(samples, std::numeric_limits<double>::quiet_NaN());
  r.status = sim.run(t_max, cadence, [&](double t, const Simulator& s) {
    auto k = static_cast<std::size_t>(std::llround(t / cadence));
    if (k < samples && std::abs(t - static_cast<double>(k) * cadence) < 1e-9 * std::max(1.0, t)) {
      r.N_series[k] = s.total();
      if (s.total() > 0) r.mean_series[k] = s.mean_trait();
    }
  });
  r.final_time = sim.time();
  r.events = sim.events();
  auto pop = sim.population();
  r.N = pop.total();
  r.mean_trait = pop.mean_trait();
  r.trait_variance = pop.trait_variance();
  return r;
}

inline SweepResult sweep(const Scenario& sc, std::size_t replicates, std::uint64_t base_seed, unsigned threads,
                         double t_max, double cadence) {
  if (replicates < 1) throw std::invalid_argument("replicates must be at least 1");
  if (!(t_max > 0.0 && cadence > 0.0)) throw std::invalid_argument("t_max and cadence must be positive");
  auto model = prepare(sc);
  auto res = run_replicates<ReplicateSummary>(replicates, base_seed, threads, [&](std::size_t k, std::uint64_t seed) {
    return run_replicate(model, k, seed, t_max, cadence);
  });
  SweepResult out;
  const auto samples = static_cast<std::size_t>(std::floor(t_max / cadence + 1e-9)) + 1;
  for (std::size_t k = 0; k < samples; ++k) out.times.push_back(static_cast<double>(k) * cadence);
  for (auto& v : res.values)
    if (v) out.replicates.push_back(std::move(*v));
  out.failed = res.failed;
  out.errors = res.errors;
  return out;
}

/// Linear-interpolation quantile of sorted data (NaN when empty).
inline double quantile_sorted(const std::vector<double>& v, double q) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  double pos = q * static_cast<double>(v.size() - 1);
  auto lo = static_cast<std::size_t>(std::floor(pos));
  auto hi = std::min(lo + 1, v.size() - 1);
  double w = pos - static_cast<double>(lo);
  return v[lo] + w * (v[hi] - v[lo]);
}

inline constexpr double sweep_quantiles[] = {0.05, 0.25, 0.5, 0.75, 0.95};

inline std::string sweep_stats_header() {
  std::string h = "time";
  for (const char* what : {"N", "mean_trait"})
    for (double q : sweep_quantiles) h += std::string(",") + what + "_q" + std::to_string(std::lround(q * 100));
  return h + ",extinct_fraction";
}

/// Per-time quantiles of N and of the mean trait (over surviving replicates),
/// and the fraction of replicates extinct at that time.
inline void write_sweep_stats_csv(std::ostream& os, const SweepResult& r) {
  os << sweep_stats_header() << '\n';
  for (std::size_t k = 0; k < r.times.size(); ++k) {
    std::vector<double> n, m;
    long long extinct = 0;
    for (const auto& rep : r.replicates) {
      n.push_back(static_cast<double>(rep.N_series[k]));
      if (rep.N_series[k] == 0)
        ++extinct;
      else
        m.push_back(rep.mean_series[k]);
    }
    std::sort(n.begin(), n.end());
    std::sort(m.begin(), m.end());
    os << detail::format_double(r.times[k]);
    for (double q : sweep_quantiles) os << ',' << detail::format_double(quantile_sorted(n, q));
    for (double q : sweep_quantiles) os << ',' << detail::format_double(quantile_sorted(m, q));
    double frac = r.replicates.empty() ? 0.0 : static_cast<double>(extinct) / static_cast<double>(r.replicates.size());
    os << ',' << detail::format_double(frac) << '\n';
  }
}

inline constexpr const char* replicate_csv_header = "replicate,seed,status,final_time,events,N,mean_trait,trait_variance";

inline void write_replicates_csv(std::ostream& os, const SweepResult& r) {
  os << replicate_csv_header << '\n';
  for (const auto& rep : r.replicates)
    os << rep.index << ',' << rep.seed << ',' << to_string(rep.status) << ',' << detail::format_double(rep.final_time)
       << ',' << rep.events << ',' << rep.N << ',' << detail::format_double(rep.mean_trait) << ','
       << detail::format_double(rep.trait_variance) << '\n';
}

}  // namespace hgt
