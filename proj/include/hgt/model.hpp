#pragma once

// Domain types of the trait-structured birth/death/competition/transfer model
// and the scalar quantities derived from its rate functions.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hgt/expr.hpp"
#include "hgt/rng.hpp"

namespace hgt {

class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Compact one-dimensional trait interval.
class TraitSpace {
 public:
  TraitSpace(double x_min, double x_max) : x_min_(x_min), x_max_(x_max) {
    if (!(std::isfinite(x_min) && std::isfinite(x_max) && x_min < x_max))
      throw ValidationError("trait space needs finite bounds with x_min < x_max");
  }

  double x_min() const noexcept { return x_min_; }
  double x_max() const noexcept { return x_max_; }
  double width() const noexcept { return x_max_ - x_min_; }
  bool contains(double x) const noexcept { return x >= x_min_ && x <= x_max_; }
  double clamp(double x) const noexcept { return std::clamp(x, x_min_, x_max_); }

  void require(double x) const {
    if (!contains(x))
      throw std::domain_error("trait " + detail::format_double(x) + " outside [" + detail::format_double(x_min_) +
                              ", " + detail::format_double(x_max_) + "]");
  }

  /// 1024 cell midpoints plus both endpoints, used to certify rate conditions.
  std::vector<double> validation_grid() const {
    constexpr int cells = 1024;
    std::vector<double> g;
    g.reserve(cells + 2);
    g.push_back(x_min_);
    for (int i = 0; i < cells; ++i) g.push_back(x_min_ + (i + 0.5) * width() / cells);
    g.push_back(x_max_);
    return g;
  }

 private:
  double x_min_;
  double x_max_;
};

/// How strictly the positivity of b - d is enforced.
///  strict:  b(x) - d(x) > 0 on the whole trait space.
///  lenient: only at the traits a run starts from. Scenarios that evolve
///           into non-viable regions (evolutionary suicide) need this.
enum class Viability { strict, lenient };

/// Rate functions of the model. b, d take the trait; C and tau take
/// (focal, other) and (donor, recipient) respectively.
struct RateSet {
  TraitSpace space{0.0, 1.0};
  Expr birth;
  Expr death;
  Expr competition;
  Expr transfer;
  double beta = 0.0;
  double mu = 1.0;

  double b(double x) const { return birth(x); }
  double d(double x) const { return death(x); }
  double C(double x, double y) const { return competition(x, y); }
  double tau(double donor, double recipient) const { return transfer(donor, recipient); }

  bool frequency_dependent() const noexcept { return beta == 0.0; }
  bool density_dependent() const noexcept { return mu == 0.0; }
  /// True when tau vanishes identically on the trait space (by interval bound).
  bool transfer_free() const {
    if (transfer.is_constant()) return transfer(0.0, 0.0) == 0.0;
    Interval s{space.x_min(), space.x_max()};
    auto b = transfer.bound(s, s);
    return b.lo == 0.0 && b.hi == 0.0;
  }
};

/// Certify the rate conditions on the validation grid. Throws ValidationError.
inline void validate(const RateSet& rates, Viability viability, std::span<const double> start_traits = {}) {
  if (!(rates.beta >= 0.0 && rates.mu >= 0.0 && std::isfinite(rates.beta) && std::isfinite(rates.mu)))
    throw ValidationError("beta and mu must be finite and nonnegative");
  if (rates.beta == 0.0 && rates.mu == 0.0) throw ValidationError("beta and mu cannot both be zero");
  const auto grid = rates.space.validation_grid();
  auto fmt = detail::format_double;
  for (double x : grid) {
    double b = rates.b(x), d = rates.d(x);
    if (!(std::isfinite(b) && std::isfinite(d))) throw ValidationError("b or d not finite at x=" + fmt(x));
    if (b < 0.0 || d < 0.0) throw ValidationError("negative birth or death rate at x=" + fmt(x));
    if (viability == Viability::strict && !(b - d > 0.0))
      throw ValidationError("growth rate b(x)-d(x) must be positive; fails at x=" + fmt(x));
  }
  for (double x : start_traits) {
    rates.space.require(x);
    if (!(rates.b(x) - rates.d(x) > 0.0))
      throw ValidationError("growth rate must be positive at initial trait x=" + fmt(x));
  }
  // The pairwise kernels are checked on a coarser product grid (every 8th point).
  for (std::size_t i = 0; i < grid.size(); i += (i + 8 < grid.size() ? 8 : 1)) {
    for (std::size_t j = 0; j < grid.size(); j += (j + 8 < grid.size() ? 8 : 1)) {
      double c = rates.C(grid[i], grid[j]);
      double t = rates.tau(grid[i], grid[j]);
      if (!(std::isfinite(c) && c > 0.0))
        throw ValidationError("competition kernel must be positive; fails at (" + fmt(grid[i]) + ", " + fmt(grid[j]) + ")");
      if (!(std::isfinite(t) && t >= 0.0))
        throw ValidationError("transfer kernel must be nonnegative; fails at (" + fmt(grid[i]) + ", " + fmt(grid[j]) + ")");
    }
  }
}

enum class BoundaryPolicy { resample, clamp };

/// Gaussian mutation steps; p is the probability that a birth is mutant.
struct MutationKernel {
  double p = 0.0;
  double sigma = 0.1;
  BoundaryPolicy boundary = BoundaryPolicy::resample;

  static constexpr int max_resample_attempts = 100;

  void check() const {
    if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("mutation probability must lie in [0, 1]");
    if (!(sigma > 0.0 && std::isfinite(sigma))) throw ValidationError("mutation sigma must be positive");
  }

  double sample(double parent, const TraitSpace& space, Rng& rng) const {
    if (boundary == BoundaryPolicy::resample) {
      for (int i = 0; i < max_resample_attempts; ++i) {
        double z = parent + sigma * rng.normal();
        if (space.contains(z)) return z;
      }
    }
    return space.clamp(parent + sigma * rng.normal());
  }
};

/// System size K (carrying-capacity scale).
class ScalingK {
 public:
  explicit ScalingK(long long k) : k_(k) {
    if (k < 1) throw ValidationError("K must be at least 1");
  }
  long long value() const noexcept { return k_; }
  double as_double() const noexcept { return static_cast<double>(k_); }

 private:
  long long k_;
};

enum class TransferMap { replacement };

/// Post-transfer traits of a (donor, recipient) pair.
struct TransferModel {
  TransferMap kind = TransferMap::replacement;

  std::pair<double, double> apply(double donor, double /*recipient*/) const { return {donor, donor}; }
};

struct Species {
  double trait = 0.0;
  long long count = 0;

  friend bool operator==(const Species&, const Species&) = default;
};

/// Point measure (1/K) sum of Dirac masses, stored as distinct traits with
/// counts, sorted by trait.
class Population {
 public:
  Population() = default;
  explicit Population(std::vector<Species> species) {
    for (const auto& s : species) add(s.trait, s.count);
  }

  const std::vector<Species>& species() const noexcept { return species_; }
  std::size_t size() const noexcept { return species_.size(); }
  bool empty() const noexcept { return total_ == 0; }
  long long total() const noexcept { return total_; }
  double mass(const ScalingK& k) const noexcept { return static_cast<double>(total_) / k.as_double(); }

  long long count(double trait) const {
    auto it = lower(trait);
    return (it != species_.end() && it->trait == trait) ? it->count : 0;
  }

  void add(double trait, long long n = 1) {
    if (n < 0) throw std::invalid_argument("negative count");
    if (n == 0) return;
    auto it = lower(trait);
    if (it != species_.end() && it->trait == trait)
      it->count += n;
    else
      species_.insert(it, Species{trait, n});
    total_ += n;
  }

  void remove(double trait, long long n = 1) {
    auto it = lower(trait);
    if (it == species_.end() || it->trait != trait || it->count < n)
      throw std::invalid_argument("cannot remove " + std::to_string(n) + " individuals of trait " +
                                  detail::format_double(trait));
    it->count -= n;
    total_ -= n;
    if (it->count == 0) species_.erase(it);
  }

  double mean_trait() const noexcept {
    if (total_ == 0) return 0.0;
    double s = 0.0;
    for (const auto& sp : species_) s += sp.trait * static_cast<double>(sp.count);
    return s / static_cast<double>(total_);
  }

  double trait_variance() const noexcept {
    if (total_ == 0) return 0.0;
    double m = mean_trait(), s = 0.0;
    for (const auto& sp : species_) s += (sp.trait - m) * (sp.trait - m) * static_cast<double>(sp.count);
    return s / static_cast<double>(total_);
  }

  friend bool operator==(const Population&, const Population&) = default;

 private:
  std::vector<Species>::iterator lower(double trait) {
    return std::lower_bound(species_.begin(), species_.end(), trait,
                            [](const Species& s, double t) { return s.trait < t; });
  }
  std::vector<Species>::const_iterator lower(double trait) const {
    return std::lower_bound(species_.begin(), species_.end(), trait,
                            [](const Species& s, double t) { return s.trait < t; });
  }

  std::vector<Species> species_;
  long long total_ = 0;
};

// Derived scalar quantities ---------------------------------------------------

/// r(x) = b(x) - d(x).
inline double growth_rate(double x, const RateSet& rates) {
  rates.space.require(x);
  return rates.b(x) - rates.d(x);
}

/// Monomorphic resident density r(x) / C(x, x). Counts are K times this.
inline double logistic_equilibrium(double x, const RateSet& rates) {
  return growth_rate(x, rates) / rates.C(x, x);
}

/// Limit transfer kernel h = tau(x, y) / (beta + mu * mass).
inline double transfer_kernel_h(double x, double y, double total_mass, const RateSet& rates) {
  if (total_mass < 0.0) throw std::invalid_argument("negative total mass");
  double denom = rates.beta + rates.mu * total_mass;
  if (!(denom > 0.0)) throw std::domain_error("degenerate transfer denominator (beta = 0 and empty population)");
  return rates.tau(x, y) / denom;
}

/// Horizontal flux alpha(x, y) = tau(x, y) - tau(y, x).
inline double flux_rate(double x, double y, const RateSet& rates) {
  return rates.tau(x, y) - rates.tau(y, x);
}

}  // namespace hgt
