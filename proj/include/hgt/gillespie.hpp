#pragma once

// Exact stochastic simulation of the individual-based jump process.
//
// Species are aggregated by trait. Event selection uses thinning against
// certified rate bounds: a candidate is drawn from the bounding process
// (individual uniformly, partner uniformly for pairwise events) and accepted
// with probability true rate / bound. Accepted events have exactly the law of
// the direct method; a step costs O(1) instead of O(S).

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "hgt/model.hpp"
#include "hgt/rng.hpp"
#include "hgt/scenario.hpp"

namespace hgt {

class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class EventKind { clonal_birth, mutant_birth, natural_death, competition_death, transfer };

inline const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::clonal_birth: return "clonal_birth";
    case EventKind::mutant_birth: return "mutant_birth";
    case EventKind::natural_death: return "natural_death";
    case EventKind::competition_death: return "competition_death";
    case EventKind::transfer: return "transfer";
  }
  return "?";
}

/// One event channel. For transfer, source is the donor species and target the
/// recipient; for competition death, source dies and target is the competitor
/// species. Indices refer to Population::species().
struct EventChannel {
  EventKind kind;
  std::size_t source = 0;
  std::size_t target = 0;
  double rate = 0.0;
};

struct RateTable {
  std::vector<EventChannel> channels;
  double total = 0.0;

  double sum(EventKind k) const {
    double s = 0.0;
    for (const auto& c : channels)
      if (c.kind == k) s += c.rate;
    return s;
  }
};

/// Exact per-channel rates of a population (O(S^2); for analysis and tests).
inline RateTable channel_rates(const Population& pop, const Scenario& sc) {
  RateTable t;
  const auto& sp = pop.species();
  const double K = sc.K.as_double();
  const double N = static_cast<double>(pop.total());
  const double p = sc.mutation.p;
  const double denom = K * sc.rates.beta + sc.rates.mu * N;
  for (std::size_t i = 0; i < sp.size(); ++i) {
    double ni = static_cast<double>(sp[i].count);
    double b = sc.rates.b(sp[i].trait);
    t.channels.push_back({EventKind::clonal_birth, i, i, ni * b * (1.0 - p)});
    t.channels.push_back({EventKind::mutant_birth, i, i, ni * b * p});
    t.channels.push_back({EventKind::natural_death, i, i, ni * sc.rates.d(sp[i].trait)});
    for (std::size_t j = 0; j < sp.size(); ++j) {
      double nj = static_cast<double>(sp[j].count);
      t.channels.push_back({EventKind::competition_death, i, j, ni * sc.rates.C(sp[i].trait, sp[j].trait) * nj / K});
    }
  }
  if (denom > 0.0) {
    for (std::size_t i = 0; i < sp.size(); ++i)
      for (std::size_t j = 0; j < sp.size(); ++j) {
        if (i == j) continue;
        double rate = static_cast<double>(sp[i].count) * static_cast<double>(sp[j].count) *
                      sc.rates.tau(sp[i].trait, sp[j].trait) / denom;
        t.channels.push_back({EventKind::transfer, i, j, rate});
      }
  }
  for (const auto& c : t.channels) t.total += c.rate;
  if (!std::isfinite(t.total)) throw SimulationError("total event rate is not finite");
  return t;
}

/// Expectation of f(z) for z drawn from the mutation kernel at parent x,
/// including the boundary policy (Simpson quadrature on +-10 sigma).
inline double mutation_expectation(const std::function<double(double)>& f, double x, const MutationKernel& m,
                                   const TraitSpace& space) {
  const double s = m.sigma;
  auto phi = [&](double z) { return std::exp(-0.5 * (z - x) * (z - x) / (s * s)) / (s * std::sqrt(2.0 * std::numbers::pi)); };
  auto cdf = [&](double z) { return 0.5 * std::erfc(-(z - x) / (s * std::sqrt(2.0))); };
  double lo = std::max(space.x_min(), x - 10.0 * s);
  double hi = std::min(space.x_max(), x + 10.0 * s);
  double inside = 0.0;
  if (hi > lo) {
    const int n = 4000;
    double h = (hi - lo) / n;
    for (int k = 0; k <= n; ++k) {
      double z = lo + k * h;
      double w = (k == 0 || k == n) ? 1.0 : (k % 2 ? 4.0 : 2.0);
      inside += w * f(z) * phi(z);
    }
    inside *= h / 3.0;
  }
  double below = cdf(space.x_min());
  double above = 1.0 - cdf(space.x_max());
  double clamped = below * f(space.x_min()) + above * f(space.x_max());
  if (m.boundary == BoundaryPolicy::clamp) return inside + clamped;
  double z_in = 1.0 - below - above;
  double fail = std::pow(1.0 - z_in, MutationKernel::max_resample_attempts);
  return (1.0 - fail) * inside / z_in + fail * clamped;
}

/// Generator drift of <nu, f> at population pop (measure weights 1/K).
inline double drift_check(const Population& pop, const Scenario& sc, const std::function<double(double)>& f) {
  const auto& sp = pop.species();
  if (sp.empty()) return 0.0;
  const double K = sc.K.as_double();
  const double N = static_cast<double>(pop.total());
  const double p = sc.mutation.p;
  const double denom = K * sc.rates.beta + sc.rates.mu * N;
  double drift = 0.0;
  for (std::size_t i = 0; i < sp.size(); ++i) {
    double xi = sp[i].trait, ni = static_cast<double>(sp[i].count);
    double fi = f(xi);
    double comp = 0.0;
    for (const auto& o : sp) comp += sc.rates.C(xi, o.trait) * static_cast<double>(o.count) / K;
    double mutant = p > 0.0 ? mutation_expectation(f, xi, sc.mutation, sc.space()) : 0.0;
    double local = sc.rates.b(xi) * ((1.0 - p) * fi + p * mutant) - (sc.rates.d(xi) + comp) * fi;
    double transfer = 0.0;
    for (const auto& o : sp) {
      if (o.trait == xi) continue;
      transfer += static_cast<double>(o.count) * sc.rates.tau(xi, o.trait) * (fi - f(o.trait)) / denom;
    }
    drift += ni * (local + transfer) / K;
  }
  return drift;
}

/// Rate of the quadratic variation of the martingale part of <nu, f>.
inline double quadratic_variation_rate(const Population& pop, const Scenario& sc,
                                       const std::function<double(double)>& f) {
  const auto& sp = pop.species();
  if (sp.empty()) return 0.0;
  const double K = sc.K.as_double();
  const double N = static_cast<double>(pop.total());
  const double p = sc.mutation.p;
  const double denom = K * sc.rates.beta + sc.rates.mu * N;
  double qv = 0.0;
  auto f2 = [&](double z) { return f(z) * f(z); };
  for (std::size_t i = 0; i < sp.size(); ++i) {
    double xi = sp[i].trait, ni = static_cast<double>(sp[i].count);
    double fi = f(xi);
    double comp = 0.0;
    for (const auto& o : sp) comp += sc.rates.C(xi, o.trait) * static_cast<double>(o.count) / K;
    double mutant = p > 0.0 ? mutation_expectation(f2, xi, sc.mutation, sc.space()) : 0.0;
    double local = ((1.0 - p) * sc.rates.b(xi) + sc.rates.d(xi) + comp) * fi * fi + p * sc.rates.b(xi) * mutant;
    double transfer = 0.0;
    for (const auto& o : sp) {
      if (o.trait == xi) continue;
      double df = fi - f(o.trait);
      transfer += static_cast<double>(o.count) * sc.rates.tau(xi, o.trait) * df * df / denom;
    }
    qv += ni * (local + transfer) / (K * K);
  }
  return qv;
}

enum class RunStatus { time_limit, extinction, event_limit, stopped };

inline const char* to_string(RunStatus s) {
  switch (s) {
    case RunStatus::time_limit: return "time_limit";
    case RunStatus::extinction: return "extinction";
    case RunStatus::event_limit: return "event_limit";
    case RunStatus::stopped: return "stopped";
  }
  return "?";
}

struct Snapshot {
  double time = 0.0;
  std::vector<Species> species;

  long long total() const {
    long long n = 0;
    for (const auto& s : species) n += s.count;
    return n;
  }
  double mean_trait() const {
    long long n = total();
    if (n == 0) return 0.0;
    double m = 0.0;
    for (const auto& s : species) m += s.trait * static_cast<double>(s.count);
    return m / static_cast<double>(n);
  }
};

struct Trajectory {
  std::vector<Snapshot> snapshots;
  RunStatus status = RunStatus::time_limit;
  long long events = 0;
  double final_time = 0.0;
};

namespace detail {

/// Upper bound of a one-variable rate over the trait space by subdivided
/// interval evaluation. Returns infinity when no bound can be certified.
inline double bound_1d(const Expr& e, const TraitSpace& s, int pieces = 256) {
  double top = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < pieces; ++i) {
    double a = s.x_min() + s.width() * i / pieces;
    double b = i + 1 == pieces ? s.x_max() : s.x_min() + s.width() * (i + 1) / pieces;
    top = std::max(top, e.bound({a, b}, {0.0, 0.0}).hi);
  }
  return top;
}

inline double bound_2d(const Expr& e, const TraitSpace& s, int pieces = 64) {
  double top = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < pieces; ++i) {
    Interval bx{s.x_min() + s.width() * i / pieces, i + 1 == pieces ? s.x_max() : s.x_min() + s.width() * (i + 1) / pieces};
    for (int j = 0; j < pieces; ++j) {
      Interval by{s.x_min() + s.width() * j / pieces,
                  j + 1 == pieces ? s.x_max() : s.x_min() + s.width() * (j + 1) / pieces};
      top = std::max(top, e.bound(bx, by).hi);
    }
  }
  return top;
}

struct RateBound {
  double value = 0.0;
  bool certified = true;
};

inline RateBound make_bound(double interval_bound, double grid_max) {
  if (std::isfinite(interval_bound)) return {std::max(0.0, interval_bound), true};
  return {std::max(0.0, grid_max) * 1.25, false};
}

}  // namespace detail

struct RateBounds {
  double birth = 0.0, death = 0.0, competition = 0.0, transfer = 0.0;
  bool birth_certified = true, death_certified = true, competition_certified = true, transfer_certified = true;
  bool competition_constant = false;
};

/// Validated scenario together with the thinning bounds of its rates.
/// Build once and share between replicates.
struct PreparedModel {
  Scenario scenario;
  RateBounds bounds;
};

inline std::shared_ptr<const PreparedModel> prepare(const Scenario& sc) {
  sc.validate();
  const auto& s = sc.space();
  const auto grid = s.validation_grid();
  double gb = 0.0, gd = 0.0, gc = 0.0, gt = 0.0;
  for (double x : grid) {
    gb = std::max(gb, sc.rates.b(x));
    gd = std::max(gd, sc.rates.d(x));
  }
  for (std::size_t i = 0; i < grid.size(); i += 8)
    for (std::size_t j = 0; j < grid.size(); j += 8) {
      gc = std::max(gc, sc.rates.C(grid[i], grid[j]));
      gt = std::max(gt, sc.rates.tau(grid[i], grid[j]));
    }
  auto b = detail::make_bound(detail::bound_1d(sc.rates.birth, s), gb);
  auto d = detail::make_bound(detail::bound_1d(sc.rates.death, s), gd);
  auto c = detail::make_bound(detail::bound_2d(sc.rates.competition, s), gc);
  auto t = detail::make_bound(detail::bound_2d(sc.rates.transfer, s), gt);
  RateBounds rb{b.value, d.value, c.value, t.value, b.certified, d.certified, c.certified, t.certified, false};
  rb.competition_constant = sc.rates.competition.is_constant();
  if (rb.competition_constant) rb.competition = sc.rates.C(0.0, 0.0);
  return std::make_shared<const PreparedModel>(PreparedModel{sc, rb});
}

/// Simulation state: time, population, RNG stream and event counter.
class Simulator {
 public:
  Simulator(const Scenario& sc, std::uint64_t seed) : Simulator(prepare(sc), Population(sc.initial), seed) {}

  Simulator(std::shared_ptr<const PreparedModel> model, const Population& initial, std::uint64_t seed)
      : model_(std::move(model)), sc_(model_->scenario), rng_(seed), k_(sc_.K.as_double()) {
    const auto& rb = model_->bounds;
    b_max_ = rb.birth, d_max_ = rb.death, c_max_ = rb.competition, tau_max_ = rb.transfer;
    b_bound_certified_ = rb.birth_certified, d_bound_certified_ = rb.death_certified;
    c_bound_certified_ = rb.competition_certified, tau_bound_certified_ = rb.transfer_certified;
    c_constant_ = rb.competition_constant;
    for (const auto& s : initial.species()) add_individuals(s.trait, s.count);
  }

  double time() const noexcept { return time_; }
  long long events() const noexcept { return events_; }
  long long total() const noexcept { return total_; }
  const Scenario& scenario() const noexcept { return sc_; }
  Rng& rng() noexcept { return rng_; }

  long long count_of(double trait) const {
    auto it = index_.find(key(trait));
    return it == index_.end() ? 0 : count_[static_cast<std::size_t>(it->second)];
  }

  std::size_t species_count() const noexcept { return index_.size(); }

  Population population() const {
    std::vector<Species> out;
    out.reserve(index_.size());
    for (std::size_t i = 0; i < count_.size(); ++i)
      if (count_[i] > 0) out.push_back({trait_[i], count_[i]});
    return Population(std::move(out));
  }

  std::vector<Species> species() const {
    std::vector<Species> out;
    out.reserve(index_.size());
    for (std::size_t i = 0; i < count_.size(); ++i)
      if (count_[i] > 0) out.push_back({trait_[i], count_[i]});
    std::sort(out.begin(), out.end(), [](const Species& a, const Species& b) { return a.trait < b.trait; });
    return out;
  }

  double mean_trait() const {
    if (total_ == 0) return 0.0;
    double s = 0.0;
    for (std::size_t i = 0; i < count_.size(); ++i) s += trait_[i] * static_cast<double>(count_[i]);
    return s / static_cast<double>(total_);
  }

  /// Performs one event, or stops at `horizon` if the next event would come
  /// later (time is then set to horizon). Returns the kind of the event, or
  /// nothing when the horizon was reached.
  std::optional<EventKind> step(double horizon = std::numeric_limits<double>::infinity()) {
    if (total_ == 0) throw SimulationError("step on an extinct population");
    for (;;) {
      const double n = static_cast<double>(total_);
      const double r_birth = n * b_max_;
      const double r_death = n * d_max_;
      const double r_comp = n * n * c_max_ / k_;
      const double tr_denom = k_ * sc_.rates.beta + sc_.rates.mu * n;
      const double r_transfer = (tau_max_ > 0.0 && total_ > 1) ? n * n * tau_max_ / tr_denom : 0.0;
      const double r_total = r_birth + r_death + r_comp + r_transfer;
      if (!(std::isfinite(r_total) && r_total > 0.0)) throw SimulationError("total event rate is not finite");
      const double t_next = time_ + rng_.exponential(r_total);
      if (t_next > horizon) {
        time_ = horizon;
        return std::nullopt;
      }
      time_ = t_next;
      // One uniform selects the channel, the individual and the acceptance
      // test: after each selection the leftover fraction is again uniform.
      double u = rng_.uniform() * r_total;
      EventKind kind;
      double v;
      if (u < r_birth) {
        kind = EventKind::clonal_birth, v = u / r_birth;
      } else if ((u -= r_birth) < r_death) {
        kind = EventKind::natural_death, v = u / r_death;
      } else if ((u -= r_death) < r_comp) {
        kind = EventKind::competition_death, v = u / r_comp;
      } else {
        kind = EventKind::transfer, v = std::min(1.0, (u - r_comp) / r_transfer);
      }
      std::size_t i = split(v);
      switch (kind) {
        case EventKind::clonal_birth: {
          double a = birth_[i] / b_max_;
          if (!accept(birth_[i], b_max_, b_bound_certified_) || v >= a) continue;
          if (sc_.mutation.p > 0.0 && v < a * sc_.mutation.p) {
            add_individuals(sc_.mutation.sample(trait_[i], sc_.space(), rng_), 1);
            return finish(EventKind::mutant_birth);
          }
          add_to_slot(i, 1);
          return finish(EventKind::clonal_birth);
        }
        case EventKind::natural_death:
          if (!accept(death_[i], d_max_, d_bound_certified_) || v >= death_[i] / d_max_) continue;
          add_to_slot(i, -1);
          return finish(kind);
        case EventKind::competition_death:
          if (!c_constant_) {
            std::size_t j = split(v);
            double c = sc_.rates.C(trait_[i], trait_[j]);
            if (!accept(c, c_max_, c_bound_certified_) || v >= c / c_max_) continue;
          }
          add_to_slot(i, -1);
          return finish(kind);
        default: {
          // i donor, j recipient
          std::size_t j = split(v);
          if (i == j) continue;
          double t = sc_.rates.tau(trait_[i], trait_[j]);
          if (!accept(t, tau_max_, tau_bound_certified_) || v >= t / tau_max_) continue;
          add_to_slot(j, -1);
          add_to_slot(i, 1);
          return finish(kind);
        }
      }
    }
  }

  /// Runs to t_max, calling observer(time, *this) at every multiple of
  /// cadence from the current time, and once more at the terminal time if that
  /// is not a sample point.
  template <class Observer>
  RunStatus run(double t_max, double cadence, Observer&& observer, long long event_limit = -1) {
    if (event_limit < 0) event_limit = sc_.run.event_limit;
    const double start = time_;
    long long k = 0;
    double last_emitted = -std::numeric_limits<double>::infinity();
    auto sample_time = [&] { return start + static_cast<double>(k) * cadence; };
    auto emit_due = [&] {
      while (sample_time() <= time_ && sample_time() <= t_max) {
        last_emitted = sample_time();
        observer(last_emitted, *this);
        ++k;
      }
    };
    auto terminal = [&] {
      if (last_emitted != time_) observer(time_, *this);
    };
    for (;;) {
      emit_due();
      if (total_ == 0) {
        terminal();
        return RunStatus::extinction;
      }
      if (events_ >= event_limit) {
        terminal();
        return RunStatus::event_limit;
      }
      if (!step(std::min(t_max, sample_time())) && time_ >= t_max) {
        emit_due();
        terminal();
        return RunStatus::time_limit;
      }
    }
  }

  /// Steps until stop(*this) is true, extinction, or t_max.
  template <class Stop>
  RunStatus run_until(Stop&& stop, double t_max, long long event_limit = -1) {
    if (event_limit < 0) event_limit = sc_.run.event_limit;
    while (!stop(*this)) {
      if (total_ == 0) return RunStatus::extinction;
      if (events_ >= event_limit) return RunStatus::event_limit;
      if (!step(t_max)) return RunStatus::time_limit;
    }
    return RunStatus::stopped;
  }

  const RateBounds& bounds() const noexcept { return model_->bounds; }

 private:
  static std::uint64_t key(double trait) noexcept { return std::bit_cast<std::uint64_t>(trait == 0.0 ? 0.0 : trait); }

  /// False for a zero rate; throws when the rate breaks its bound.
  static bool accept(double rate, double bound, bool certified) {
    if (rate <= 0.0) return false;
    if (rate > bound) {
      if (certified) throw SimulationError("rate exceeds its certified bound (bound evaluation error)");
      throw SimulationError("rate " + detail::format_double(rate) + " exceeds heuristic bound " +
                            detail::format_double(bound) + "; rewrite the expression so it can be bounded");
    }
    return true;
  }

  /// Species slot of the individual at fraction v of the population; v is
  /// replaced by the leftover fraction.
  std::size_t split(double& v) {
    double scaled = v * static_cast<double>(total_);
    auto k = std::min(static_cast<long long>(scaled), total_ - 1);
    v = scaled - static_cast<double>(k);
    return ind_slot_[static_cast<std::size_t>(k)];
  }

  EventKind finish(EventKind k) {
    ++events_;
    return k;
  }

  void add_to_slot(std::size_t i, long long delta) {
    auto& members = members_[i];
    for (; delta > 0; --delta) {
      ind_rank_.push_back(static_cast<std::uint32_t>(members.size()));
      members.push_back(static_cast<std::uint32_t>(ind_slot_.size()));
      ind_slot_.push_back(static_cast<std::uint32_t>(i));
      ++count_[i], ++total_;
    }
    for (; delta < 0; ++delta) {
      std::uint32_t pos = members.back();
      members.pop_back();
      std::size_t last = ind_slot_.size() - 1;
      if (pos != last) {
        std::uint32_t moved_slot = ind_slot_[last], moved_rank = ind_rank_[last];
        ind_slot_[pos] = moved_slot;
        ind_rank_[pos] = moved_rank;
        members_[moved_slot][moved_rank] = pos;
      }
      ind_slot_.pop_back();
      ind_rank_.pop_back();
      --count_[i], --total_;
    }
    if (count_[i] == 0) {
      index_.erase(key(trait_[i]));
      free_.push_back(i);
    }
  }

  void add_individuals(double trait, long long n) {
    if (n <= 0) return;
    if (!sc_.space().contains(trait)) throw SimulationError("trait left the trait space");
    if (auto it = index_.find(key(trait)); it != index_.end()) {
      add_to_slot(static_cast<std::size_t>(it->second), n);
      return;
    }
    double b = sc_.rates.b(trait), d = sc_.rates.d(trait);
    if (!(b >= 0.0 && d >= 0.0 && std::isfinite(b) && std::isfinite(d)))
      throw SimulationError("invalid birth/death rate at trait " + detail::format_double(trait));
    if (b > b_max_ || d > d_max_) {
      if (b_bound_certified_ && d_bound_certified_) throw SimulationError("rate exceeds its certified bound");
      b_max_ = std::max(b_max_, b);
      d_max_ = std::max(d_max_, d);
    }
    std::size_t slot;
    if (!free_.empty()) {
      slot = free_.back();
      free_.pop_back();
      trait_[slot] = trait, birth_[slot] = b, death_[slot] = d;
    } else {
      slot = trait_.size();
      trait_.push_back(trait), birth_.push_back(b), death_.push_back(d), count_.push_back(0);
      members_.emplace_back();
    }
    index_[key(trait)] = static_cast<long long>(slot);
    add_to_slot(slot, n);
  }

  std::shared_ptr<const PreparedModel> model_;
  const Scenario& sc_;
  Rng rng_;
  double k_;
  double time_ = 0.0;
  long long events_ = 0;
  long long total_ = 0;

  std::vector<double> trait_, birth_, death_;
  std::vector<long long> count_;
  std::vector<std::size_t> free_;
  std::unordered_map<std::uint64_t, long long> index_;
  // individual -> species slot, individual -> rank in its slot's member list
  std::vector<std::uint32_t> ind_slot_, ind_rank_;
  std::vector<std::vector<std::uint32_t>> members_;

  double b_max_ = 0.0, d_max_ = 0.0, c_max_ = 0.0, tau_max_ = 0.0;
  bool b_bound_certified_ = true, d_bound_certified_ = true, c_bound_certified_ = true, tau_bound_certified_ = true;
  bool c_constant_ = false;
};

/// Runs a scenario and records snapshots at the given cadence.
inline Trajectory simulate(const Scenario& sc, std::uint64_t seed, double t_max, double cadence,
                           long long event_limit = -1) {
  if (!(t_max > 0.0)) throw std::invalid_argument("t_max must be positive");
  Simulator sim(sc, seed);
  Trajectory traj;
  traj.status = sim.run(
      t_max, cadence, [&](double t, const Simulator& s) { traj.snapshots.push_back({t, s.species()}); }, event_limit);
  traj.events = sim.events();
  traj.final_time = sim.time();
  return traj;
}

}  // namespace hgt
