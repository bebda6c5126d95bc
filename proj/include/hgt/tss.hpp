#pragma once

// Evolutionary layer: the trait substitution sequence (rare mutations,
// invasion implies fixation) and the canonical equation of adaptive dynamics.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "hgt/invasion.hpp"
#include "hgt/model.hpp"
#include "hgt/ode.hpp"
#include "hgt/phase.hpp"
#include "hgt/rng.hpp"

namespace hgt {

class TssError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TssCandidate {
  double time = 0.0;
  double resident = 0.0;
  double candidate = 0.0;
  double probability = 0.0;
  bool accepted = false;
};

/// Piecewise-constant trait path. times[0] = 0 holds the initial trait; times
/// are on the mutation time scale t / (K p).
struct TssPath {
  std::vector<double> times;
  std::vector<double> traits;
  std::vector<TssCandidate> log;  // filled when requested
  long long candidates = 0;
  double t_end = 0.0;

  double trait_at(double t) const {
    if (times.empty()) throw std::logic_error("empty trait path");
    auto it = std::upper_bound(times.begin(), times.end(), t);
    if (it == times.begin()) return traits.front();
    return traits[static_cast<std::size_t>(it - times.begin()) - 1];
  }
};

struct TssOptions {
  bool keep_log = false;
  long long max_candidates = 1'000'000'000LL;
};

/// Thinning: candidate epochs at rate b(x) nbar_x, candidate y from the
/// mutation kernel, accepted with probability [P(y; x)]+. An accepted jump
/// with S(y; x) > 0 and S(x; y) > 0 (coexistence) aborts the run.
inline TssPath tss_simulate(double x0, const RateSet& rates, const MutationKernel& kernel, double t_max,
                            std::uint64_t seed, const TssOptions& opt = {}) {
  kernel.check();
  rates.space.require(x0);
  if (!(growth_rate(x0, rates) > 0.0)) throw ValidationError("initial trait must have positive growth rate");
  Rng rng(seed);
  TssPath path;
  path.times.push_back(0.0);
  path.traits.push_back(x0);
  double t = 0.0, x = x0;
  while (path.candidates < opt.max_candidates) {
    double nbar = logistic_equilibrium(x, rates);
    double rate = rates.b(x) * nbar;
    if (!(rate > 0.0)) break;  // resident cannot produce mutants any more
    t += rng.exponential(rate);
    if (t > t_max) break;
    ++path.candidates;
    double y = kernel.sample(x, rates.space, rng);
    double P = invasion_probability(y, x, rates);
    bool accepted = P > 0.0 && rng.uniform() < P;
    if (opt.keep_log) path.log.push_back({t, x, y, P, accepted});
    if (!accepted) continue;
    if (growth_rate(y, rates) > 0.0 && fitness_S(x, y, rates) > 0.0)
      throw TssError("invasion does not imply fixation: S(y;x) and S(x;y) both positive at x=" +
                     detail::format_double(x) + ", y=" + detail::format_double(y));
    x = y;
    path.times.push_back(t);
    path.traits.push_back(x);
  }
  path.t_end = std::min(t, t_max);
  return path;
}

/// d/dy S(y; x) at y = x by central differences with step 1e-5 * width,
/// one-sided within one step of the boundary.
inline double selection_gradient(double x, const RateSet& rates) {
  const auto& sp = rates.space;
  double h = 1e-5 * sp.width();
  auto S = [&](double y) { return fitness_S(y, x, rates); };
  if (x + h > sp.x_max()) return (S(x) - S(x - h)) / h;
  if (x - h < sp.x_min()) return (S(x + h) - S(x)) / h;
  return (S(x + h) - S(x - h)) / (2.0 * h);
}

/// x' = 1/2 nbar_x dS/dy(x; x) sigma^2, set to 0 when pushing out of the
/// trait space or where the resident is not viable.
inline double canonical_rhs(double x, const RateSet& rates, double sigma) {
  x = rates.space.clamp(x);
  double nbar = logistic_equilibrium(x, rates);
  if (!(nbar > 0.0)) return 0.0;
  double v = 0.5 * nbar * selection_gradient(x, rates) * sigma * sigma;
  if ((x <= rates.space.x_min() && v < 0.0) || (x >= rates.space.x_max() && v > 0.0)) return 0.0;
  return v;
}

struct CanonicalPath {
  std::vector<double> times;
  std::vector<double> traits;
};

inline CanonicalPath canonical_integrate(double x0, const RateSet& rates, double sigma, double t_max,
                                         double cadence = 1.0) {
  rates.space.require(x0);
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
  OdeOptions opt;
  opt.clip = -1.0;
  opt.lower = rates.space.x_min();
  opt.upper = rates.space.x_max();
  CanonicalPath path;
  std::vector<double> state{x0};
  integrate_adaptive([&](const std::vector<double>& s, std::vector<double>& ds, double) { ds[0] = canonical_rhs(s[0], rates, sigma); },
                     state, 0.0, t_max, cadence,
                     [&](double t, const std::vector<double>& s) {
                       path.times.push_back(t);
                       path.traits.push_back(s[0]);
                     },
                     opt);
  return path;
}

}  // namespace hgt
