#pragma once

// Invasion and fixation of a rare trait: closed forms and Monte Carlo
// validators that run the full stochastic engine.

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include <boost/math/special_functions/digamma.hpp>

#include "hgt/ensemble.hpp"
#include "hgt/gillespie.hpp"
#include "hgt/phase.hpp"
#include "hgt/scenario.hpp"

namespace hgt {

/// P(y; x) = [S(y; x)]+ / (b(y) + tau(y, x) nbar_x / (beta + mu nbar_x)),
/// always evaluated at the resident equilibrium nbar_x.
inline double invasion_probability(double y, double x, const RateSet& rates) {
  double nbar = logistic_equilibrium(x, rates);
  if (!(nbar > 0.0)) throw std::domain_error("resident equilibrium must be positive");
  double S = fitness_S(y, x, rates);
  if (!(S > 0.0)) return 0.0;
  double denom = rates.b(y) + transfer_kernel_h(y, x, nbar, rates) * nbar;
  if (!(denom > 0.0)) throw std::domain_error("degenerate invasion probability denominator");
  return S / denom;
}

/// Birth and death rates of the trait x being lost from a resident y at
/// equilibrium (last phase of a substitution):
///   b = b(x) + tau(x, y) r(y) / (beta C(y, y) + mu r(y))
///   d = d(x) + C(x, y) r(y) / C(y, y) + tau(y, x) r(y) / (beta C(y, y) + mu r(y))
/// so that b - d = S(x; y).
struct BranchingParams {
  double b = 0.0;
  double d = 0.0;
  bool subcritical() const noexcept { return d > b; }
};

inline BranchingParams branching_params(double x, double y, const RateSet& rates) {
  double ry = growth_rate(y, rates);
  double cyy = rates.C(y, y);
  double denom = rates.beta * cyy + rates.mu * ry;
  if (!(denom > 0.0)) throw std::domain_error("degenerate branching denominator");
  BranchingParams bp;
  bp.b = rates.b(x) + rates.tau(x, y) * ry / denom;
  bp.d = rates.d(x) + rates.C(x, y) * ry / cyy + rates.tau(y, x) * ry / denom;
  return bp;
}

/// Expected extinction time of a subcritical linear birth-death process
/// started from m = floor(eta K) individuals:
///   E = (1/b) sum_{j>=1} (b/d)^j sum_{k=1}^{m-1} 1/(k+j).
/// The j-sum stops once (b/d)^j log(m+j) < 1e-12 times the accumulated sum.
inline double extinction_time_series(double eta, long long K, double b, double d) {
  if (!(b >= 0.0 && d > 0.0 && std::isfinite(b) && std::isfinite(d)))
    throw std::invalid_argument("branching rates must be finite with d > 0");
  if (!(b < d)) throw std::invalid_argument("extinction time series needs a subcritical process (b < d)");
  double mr = std::floor(eta * static_cast<double>(K) + 1e-9);
  if (!(mr >= 2.0)) throw std::invalid_argument("eta * K must be at least 2");
  const double m = mr;
  auto inner = [&](double j) {
    // sum_{k=1}^{m-1} 1/(k+j) = psi(m+j) - psi(1+j)
    if (m <= 64.0) {
      double s = 0.0;
      for (double k = m - 1.0; k >= 1.0; k -= 1.0) s += 1.0 / (k + j);
      return s;
    }
    return boost::math::digamma(m + j) - boost::math::digamma(1.0 + j);
  };
  const double q = b / d;
  double sum = 0.0;
  double weight = 1.0 / d;  // (1/b)(b/d)^j at j = 1, written to stay finite at b = 0
  for (long long j = 1;; ++j) {
    double jd = static_cast<double>(j);
    sum += weight * inner(jd);
    double qj = std::pow(q, jd);
    if (qj * std::log(m + jd) < 1e-12 * sum || weight == 0.0) break;
    weight *= q;
    if (j > 100'000'000) throw std::runtime_error("extinction time series did not converge");
  }
  return sum;
}

/// T_fix = log K (1/S(y; x) + 1/|S(x; y)|); the O(1) part is not included.
inline double fixation_time(double y, double x, const RateSet& rates, double K) {
  double s_in = fitness_S(y, x, rates);
  double s_out = fitness_S(x, y, rates);
  if (!(s_in > 0.0)) throw std::domain_error("fixation time needs S(y;x) > 0");
  if (!(s_out < 0.0)) throw std::domain_error("S(y;x) and S(x;y) are both positive: coexistence, no fixation");
  return std::log(K) * (1.0 / s_in + 1.0 / std::abs(s_out));
}

struct InvasionReport {
  double S = 0.0;
  double P = 0.0;
  double T_fix = std::numeric_limits<double>::quiet_NaN();
  double branching_b = std::numeric_limits<double>::quiet_NaN();
  double branching_d = std::numeric_limits<double>::quiet_NaN();
};

inline InvasionReport invasion_report(double y, double x, const RateSet& rates, double K) {
  InvasionReport r;
  r.S = fitness_S(y, x, rates);
  r.P = invasion_probability(y, x, rates);
  double s_out = fitness_S(x, y, rates);
  if (r.S > 0.0 && s_out < 0.0) r.T_fix = fixation_time(y, x, rates, K);
  if (growth_rate(y, rates) > 0.0) {
    auto bp = branching_params(x, y, rates);
    r.branching_b = bp.b, r.branching_d = bp.d;
  }
  return r;
}

// Monte Carlo ---------------------------------------------------------------

/// Resident x at its equilibrium size plus one y individual, without mutation.
inline Scenario invasion_scenario(const Scenario& base, double y, double x, long long K) {
  Scenario sc = base;
  sc.K = ScalingK(K);
  sc.mutation.p = 0.0;
  double nbar = logistic_equilibrium(x, sc.rates);
  auto resident = std::llround(nbar * static_cast<double>(K));
  if (resident < 1) throw std::domain_error("resident equilibrium rounds to zero individuals");
  sc.initial = {{x, resident}, {y, 1}};
  if (x > y) std::swap(sc.initial[0], sc.initial[1]);
  return sc;
}

struct McEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  long long successes = 0;
  long long replicates = 0;
  std::vector<std::size_t> failed;
};

/// Fraction of runs in which the y count reaches ceil(eta K) before 0.
inline McEstimate mc_invasion(const Scenario& base, double y, double x, long long K, long long replicates, double eta,
                              std::uint64_t seed, unsigned threads = 1) {
  if (replicates < 1) throw std::invalid_argument("replicates must be at least 1");
  if (!(eta > 0.0 && eta < logistic_equilibrium(y, base.rates)))
    throw std::invalid_argument("eta must lie in (0, nbar_y)");
  auto sc = invasion_scenario(base, y, x, K);
  auto model = prepare(sc);
  Population start(sc.initial);
  const auto threshold = static_cast<long long>(std::ceil(eta * static_cast<double>(K) - 1e-9));
  auto res = run_replicates<char>(static_cast<std::size_t>(replicates), seed, threads, [&](std::size_t, std::uint64_t s) {
    Simulator sim(model, start, s);
    sim.run_until(
        [&](const Simulator& st) {
          auto c = st.count_of(y);
          return c == 0 || c >= threshold;
        },
        std::numeric_limits<double>::infinity());
    return static_cast<char>(sim.count_of(y) >= threshold);
  });
  McEstimate out;
  out.failed = res.failed;
  for (const auto& v : res.values)
    if (v) ++out.replicates, out.successes += *v;
  if (out.replicates == 0) throw SimulationError("all invasion replicates failed");
  double n = static_cast<double>(out.replicates);
  out.estimate = static_cast<double>(out.successes) / n;
  out.std_error = std::sqrt(out.estimate * (1.0 - out.estimate) / n);
  return out;
}

struct FixationEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  long long fixations = 0;
  long long replicates = 0;
  std::vector<double> times;
  std::vector<std::size_t> failed;
};

/// Mean time until x is lost, over the runs in which y fixes.
inline FixationEstimate mc_fixation_time(const Scenario& base, double y, double x, long long K, long long replicates,
                                         std::uint64_t seed, unsigned threads = 1) {
  if (replicates < 1) throw std::invalid_argument("replicates must be at least 1");
  auto sc = invasion_scenario(base, y, x, K);
  auto model = prepare(sc);
  Population start(sc.initial);
  auto res =
      run_replicates<double>(static_cast<std::size_t>(replicates), seed, threads, [&](std::size_t, std::uint64_t s) {
        Simulator sim(model, start, s);
        sim.run_until([&](const Simulator& st) { return st.count_of(y) == 0 || st.count_of(x) == 0; },
                      std::numeric_limits<double>::infinity());
        return sim.count_of(x) == 0 && sim.count_of(y) > 0 ? sim.time() : -1.0;
      });
  FixationEstimate out;
  out.failed = res.failed;
  for (const auto& v : res.values) {
    if (!v) continue;
    ++out.replicates;
    if (*v >= 0.0) out.times.push_back(*v);
  }
  out.fixations = static_cast<long long>(out.times.size());
  if (out.fixations > 0) {
    double s = 0.0, s2 = 0.0;
    for (double t : out.times) s += t;
    out.mean = s / static_cast<double>(out.fixations);
    for (double t : out.times) s2 += (t - out.mean) * (t - out.mean);
    if (out.fixations > 1)
      out.std_error = std::sqrt(s2 / static_cast<double>(out.fixations - 1) / static_cast<double>(out.fixations));
  } else {
    out.mean = std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

}  // namespace hgt
