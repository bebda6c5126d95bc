// Acceptance suite: one PASS/FAIL line per criterion, exit status = number of
// failures. Criterion names on the command line restrict the run.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hgt/gillespie.hpp"
#include "hgt/invasion.hpp"
#include "hgt/ode.hpp"
#include "hgt/phase.hpp"
#include "hgt/scenario.hpp"
#include "hgt/sweep.hpp"
#include "hgt/tss.hpp"

using namespace hgt;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    detail << (ok ? "" : "[x] ") << what << "; ";
  }
};

std::string fmt(double v, int digits = 6) {
  std::ostringstream os;
  os.precision(digits);
  os << v;
  return os.str();
}

TwoTraitParams preset_params(const std::string& name) {
  auto sc = preset(name);
  return two_trait_params(sc.rates, sc.initial.at(0).trait, sc.initial.at(1).trait);
}

const unsigned threads = default_threads();

// ---------------------------------------------------------------------------

void invasion_probability_mc(Outcome& o) {
  auto sc = preset("fig2b");
  const double x = 0.25, y = 0.75;
  double P = invasion_probability(y, x, sc.rates);
  o.require(std::abs(P - 1.0 / 6.0) < 1e-12, "formula P = " + fmt(P, 12));
  auto mc = mc_invasion(sc, y, x, 1000, 10000, 0.1, 2024, threads);
  double z = (mc.estimate - 1.0 / 6.0) / mc.std_error;
  o.require(mc.failed.empty(), "replicates failed: " + std::to_string(mc.failed.size()));
  o.require(std::abs(z) < 3.0, "MC " + fmt(mc.estimate) + " +- " + fmt(mc.std_error) + " (z = " + fmt(z, 3) + ")");
}

void constant_C_coexistence(Outcome& o) {
  auto sc = preset("fig2a");
  auto p = preset_params("fig2a");
  auto rep = analyze_phase(p);
  int sinks = 0;
  const FixedPoint* fp = nullptr;
  for (const auto& q : rep.interior.points)
    if (q.stability == Stability::stable_node_or_focus) ++sinks, fp = &q;
  o.require(rep.interior.points.size() == 1 && sinks == 1,
            "interior points " + std::to_string(rep.interior.points.size()) + ", sinks " + std::to_string(sinks));
  if (!fp) return;
  o.require(std::abs(fp->p_y - 4.0 / 7.0) < 1e-8, "p_y = " + fmt(fp->p_y, 15));

  TwoTraitState s0{sc.initial[0].count / sc.K.as_double(), sc.initial[1].count / sc.K.as_double()};
  auto traj = integrate_two_trait(s0, p, 2000.0, 2000.0);
  const auto& e = traj.back();
  double dev = std::max(std::abs(e.n_x - fp->location.n_x), std::abs(e.n_y - fp->location.n_y));
  double py = e.n_y / (e.n_x + e.n_y);
  o.require(dev < 1e-6 && std::abs(py - fp->p_y) < 1e-6, "ODE at t=2000 off by " + fmt(dev, 3) + " (p_y " + fmt(py, 10) + ")");

  auto model = prepare(sc);
  Population start(sc.initial);
  int coexist = 0;
  const int runs = 50;
  for (int k = 0; k < runs; ++k) {
    Simulator sim(model, start, derive_seed(500, static_cast<std::uint64_t>(k)));
    auto st = sim.run_until([&](const Simulator& s) { return s.count_of(0.25) == 0 || s.count_of(0.75) == 0; }, 500.0);
    coexist += st == RunStatus::time_limit && sim.count_of(0.25) > 0 && sim.count_of(0.75) > 0;
  }
  o.require(coexist >= 45, "coexisting on [100, 500] in " + std::to_string(coexist) + "/" + std::to_string(runs) + " runs");
}

void fixation_scaling(Outcome& o) {
  auto sc = preset("fig2b");
  const double x = 0.25, y = 0.75;
  double target = 1.0 / fitness_S(y, x, sc.rates) + 1.0 / std::abs(fitness_S(x, y, sc.rates));
  o.require(std::abs(target - 10.0) < 1e-9, "1/S + 1/|S'| = " + fmt(target, 10));
  std::vector<double> lk, mean;
  std::string line;
  for (long long K : {500LL, 2000LL, 8000LL}) {
    auto est = mc_fixation_time(sc, y, x, K, 900, 77 + static_cast<std::uint64_t>(K), threads);
    lk.push_back(std::log(static_cast<double>(K)));
    mean.push_back(est.mean);
    line += "K=" + std::to_string(K) + ": " + fmt(est.mean, 4) + " +- " + fmt(est.std_error, 2) + " (" +
            std::to_string(est.fixations) + " fixations), ";
  }
  double lbar = std::accumulate(lk.begin(), lk.end(), 0.0) / 3.0, mbar = std::accumulate(mean.begin(), mean.end(), 0.0) / 3.0;
  double sxy = 0.0, sxx = 0.0;
  for (int i = 0; i < 3; ++i) sxy += (lk[i] - lbar) * (mean[i] - mbar), sxx += (lk[i] - lbar) * (lk[i] - lbar);
  double slope = sxy / sxx;
  o.require(std::abs(slope - target) <= 0.25 * target, line + "slope " + fmt(slope, 4));

  auto br = branching_params(x, y, sc.rates);  // x invading y: subcritical
  double lo = extinction_time_series(0.1, 1000, br.b, br.d), hi = extinction_time_series(0.1, 1000000, br.b, br.d);
  double secant = (hi - lo) / std::log(1000.0), expect = 1.0 / (br.d - br.b);
  o.require(std::abs(secant - expect) <= 0.05 * expect,
            "series secant over K=1e3..1e6 " + fmt(secant, 5) + " vs 1/(d-b) = " + fmt(expect, 5));
}

void campaigns(Outcome& o) {
  {
    auto sc = preset("tau0");
    auto res = sweep(sc, 20, 700, threads, 2000.0, 10.0);
    int good = 0;
    for (const auto& r : res.replicates)
      good += r.status == RunStatus::time_limit && std::abs(r.mean_trait) <= 0.3 &&
              std::abs(static_cast<double>(r.N) - 6000.0) <= 600.0;
    o.require(res.failed.empty() && good >= 18, "tau=0: " + std::to_string(good) + "/20 near trait 0 with N ~ 6000");
  }
  {
    auto sc = preset("tau10");
    auto res = sweep(sc, 20, 710, threads, 2000.0, 10.0);
    int extinct = 0;
    for (const auto& r : res.replicates) extinct += r.status == RunStatus::extinction;
    o.require(res.failed.empty() && extinct >= 19, "tau=1: " + std::to_string(extinct) + "/20 extinct");
  }
  {
    auto sc = preset("tau06");
    auto res = sweep(sc, 20, 760, threads, 2000.0, 1.0);
    int resurgent = 0;
    for (const auto& r : res.replicates) {
      const auto& m = r.mean_series;
      bool found = false;
      for (std::size_t i = 0; i < m.size() && !found; ++i)
        for (std::size_t j = i + 1; j < m.size() && j <= i + 10 && !found; ++j)
          found = !std::isnan(m[i]) && !std::isnan(m[j]) && m[i] - m[j] > 0.5;
      resurgent += found;
    }
    o.require(res.failed.empty() && resurgent >= 10, "tau=0.6: resurgence in " + std::to_string(resurgent) + "/20");
  }
}

void deterministic_limit(Outcome& o) {
  auto sc = preset("fig2a");
  auto p = preset_params("fig2a");
  TwoTraitState s0{sc.initial[0].count / sc.K.as_double(), sc.initial[1].count / sc.K.as_double()};
  GridDensity u(sc.space(), 2);
  u.u = {s0.n_x / u.dx(), s0.n_y / u.dx()};
  auto ode = integrate_two_trait(s0, p, 50.0, 0.25);
  auto pde = integrate_grid(u, sc.rates, 50.0, 0.25);
  double sup = 0.0;
  for (std::size_t i = 0; i < std::min(ode.size(), pde.size()); ++i) {
    sup = std::max(sup, std::abs(pde[i].density.u[0] * u.dx() - ode[i].n_x));
    sup = std::max(sup, std::abs(pde[i].density.u[1] * u.dx() - ode[i].n_y));
  }
  o.require(ode.size() == pde.size() && sup < 1e-4, "ODE vs 2-cell grid sup " + fmt(sup, 3));

  auto at20 = integrate_two_trait(s0, p, 20.0, 20.0).back();
  const int reps = 40;
  std::vector<double> err;
  for (long long K : {500LL, 2000LL, 8000LL}) {
    auto s = sc;
    s.K = ScalingK(K);
    s.initial = {{0.25, std::llround(s0.n_x * K)}, {0.75, std::llround(s0.n_y * K)}};
    auto model = prepare(s);
    Population start(s.initial);
    double sum = 0.0;
    for (int r = 0; r < reps; ++r) {
      Simulator sim(model, start, derive_seed(900 + static_cast<std::uint64_t>(K), static_cast<std::uint64_t>(r)));
      sim.run_until([](const Simulator&) { return false; }, 20.0);
      sum += std::abs(sim.count_of(0.25) / static_cast<double>(K) - at20.n_x) +
             std::abs(sim.count_of(0.75) / static_cast<double>(K) - at20.n_y);
    }
    err.push_back(sum / reps);
  }
  o.require(err[0] > err[1] && err[1] > err[2],
            "mean |N/K - n| at t=20 over " + std::to_string(reps) + " runs: " + fmt(err[0], 3) + ", " + fmt(err[1], 3) + ", " +
                fmt(err[2], 3));
}

TwoTraitParams random_params(std::mt19937_64& g, int regime) {
  std::uniform_real_distribution<double> r(0.2, 2.0), c(0.1, 4.0), a(-6.0, 6.0), bm(0.1, 2.0);
  TwoTraitParams p;
  p.r_x = r(g), p.r_y = r(g);
  p.c_xx = c(g), p.c_xy = c(g), p.c_yx = c(g), p.c_yy = c(g);
  p.alpha = a(g);
  if (regime == 0) p.beta = 0.0, p.mu = 1.0;
  else if (regime == 1) p.beta = 1.0, p.mu = 0.0;
  else p.beta = bm(g), p.mu = bm(g);
  return p;
}

Scenario with_initial(Scenario sc, std::vector<Species> init, long long K) {
  sc.initial = std::move(init);
  sc.K = ScalingK(K);
  return sc;
}

void property_suites(Outcome& o) {
  // drift of <nu, f> against the generator, by short-time Monte Carlo
  {
    const std::vector<std::function<double(double)>> fs = {[](double) { return 1.0; }, [](double x) { return x; },
                                                           [](double x) { return x * x; }};
    auto c = with_initial(preset("directed"), {{1.0, 30}, {1.2, 20}}, 50);
    c.mutation.p = 0.2, c.mutation.sigma = 0.3;
    std::vector<Scenario> cases = {with_initial(preset("fig2b"), {{0.25, 30}, {0.75, 20}}, 50),
                                   with_initial(preset("tau06"), {{0.5, 20}, {1.0, 15}, {1.7, 10}}, 50), c};
    const double dt = 0.002;
    const int reps = 40000;
    int bad = 0;
    double worst = 0.0;
    for (std::size_t ci = 0; ci < cases.size(); ++ci) {
      const auto& sc = cases[ci];
      auto model = prepare(sc);
      Population start(sc.initial);
      const double K = sc.K.as_double();
      std::vector<double> sum(3), sum2(3), f0(3);
      for (int k = 0; k < 3; ++k)
        for (const auto& s : start.species()) f0[k] += fs[k](s.trait) * s.count / K;
      for (int r = 0; r < reps; ++r) {
        Simulator sim(model, start, derive_seed(1000 + ci, static_cast<std::uint64_t>(r)));
        while (sim.total() > 0 && sim.step(dt)) {
        }
        auto pop = sim.species();
        for (int k = 0; k < 3; ++k) {
          double f1 = 0.0;
          for (const auto& s : pop) f1 += fs[k](s.trait) * s.count / K;
          double inc = (f1 - f0[k]) / dt;
          sum[k] += inc, sum2[k] += inc * inc;
        }
      }
      for (int k = 0; k < 3; ++k) {
        double mean = sum[k] / reps, se = std::sqrt((sum2[k] / reps - mean * mean) / reps);
        double z = std::abs(mean - drift_check(start, sc, fs[k])) / se;
        worst = std::max(worst, z);
        bad += z >= 3.0;
      }
    }
    o.require(bad == 0, "drift for f in {1, x, x^2} on 3 populations, worst |z| " + fmt(worst, 3));
  }
  // Poincare index and interior ceilings
  {
    int checked = 0, failed = 0, over = 0, draws = 0;
    for (int regime = 0; regime < 3; ++regime) {
      std::mt19937_64 g(200 + regime);
      for (int k = 0; k < 1000; ++k, ++draws) {
        auto rep = analyze_phase(random_params(g, regime));
        if (!rep.interior.line_of_fixed_points &&
            (rep.interior.ceiling_exceeded || static_cast<int>(rep.interior.points.size()) > interior_ceiling(rep.params)))
          ++over;
        if (!rep.poincare.checked) continue;
        ++checked;
        failed += !rep.poincare.pass;
      }
    }
    o.require(failed == 0 && checked >= 1000,
              "Poincare consistency " + std::to_string(checked - failed) + "/" + std::to_string(checked) + " hyperbolic draws");
    o.require(over == 0, "interior counts within ceilings on " + std::to_string(draws) + " draws");
  }
  // no cycles
  {
    std::mt19937_64 g(21);
    std::uniform_real_distribution<double> u(0.01, 3.0);
    int bad = 0;
    for (int k = 0; k < 100; ++k) {
      auto p = random_params(g, k % 3);
      TwoTraitState s0{u(g), u(g)};
      auto traj = integrate_two_trait(s0, p, 1e4, 1e4);
      auto d = two_trait_rhs({traj.back().n_x, traj.back().n_y}, p);
      bad += !(std::hypot(d.n_x, d.n_y) < 1e-6);
    }
    o.require(bad == 0, "no cycles: " + std::to_string(100 - bad) + "/100 starts settle");
  }
  // frequency-dependent antisymmetry
  {
    std::mt19937_64 g(1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k) {
      RateSet r;
      r.space = TraitSpace(0, 1);
      r.birth = parse(detail::format_double(1.5 + u(g)) + " - " + detail::format_double(u(g)) + " * x", {"x"});
      r.death = parse("0.2", {"x"});
      r.competition = parse(detail::format_double(0.1 + 3 * u(g)), {"x", "y"});
      r.transfer = parse(detail::format_double(2 * u(g)) + " * (x > y) + " + detail::format_double(2 * u(g)) +
                             " * exp(y - x)",
                         {"x", "y"});
      r.beta = 0.0, r.mu = 1.0;
      double x = u(g), y = u(g);
      worst = std::max(worst, std::abs(fitness_S(y, x, r) + fitness_S(x, y, r)));
    }
    o.require(worst <= 1e-12, "FD antisymmetry, worst " + fmt(worst, 3));
  }
}

void evolutionary_layer(Outcome& o) {
  auto directed = preset("directed");
  auto plain = preset("directed_notransfer");
  int monotone = 0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    auto path = tss_simulate(1.0, directed.rates, directed.mutation, 500.0, derive_seed(31, s));
    monotone += std::is_sorted(path.traits.begin(), path.traits.end());
  }
  o.require(monotone == 100, "TSS nondecreasing in " + std::to_string(monotone) + "/100 seeds");

  double up = canonical_integrate(1.0, directed.rates, directed.mutation.sigma, 1000.0, 1000.0).traits.back();
  double down = canonical_integrate(1.0, plain.rates, plain.mutation.sigma, 1000.0, 1000.0).traits.back();
  o.require(std::abs(up - 4.0) < 1e-3 && std::abs(down) < 1e-3,
            "canonical at t=1000: " + fmt(up, 8) + " (transfer), " + fmt(down, 8) + " (none)");

  // mean TSS path with step sigma, run to T / sigma^2, against the canonical
  // path with unit step
  const double T = 2.0;
  const int seeds = 200, grid = 40;
  auto canon = canonical_integrate(1.0, directed.rates, 1.0, T, T / grid);
  // the TSS drift carries the factor b / (b + tau(x, x) nbar / (beta + mu nbar))
  std::vector<double> weighted;
  {
    const auto& r = directed.rates;
    OdeOptions opt;
    opt.clip = -1.0;
    std::vector<double> st{1.0};
    integrate_adaptive(
        [&](const std::vector<double>& s, std::vector<double>& ds, double) {
          double nb = logistic_equilibrium(s[0], r), b = r.b(s[0]);
          ds[0] = canonical_rhs(s[0], r, 1.0) * b / (b + r.tau(s[0], s[0]) * nb / (r.beta + r.mu * nb));
        },
        st, 0.0, T, T / grid, [&](double, const std::vector<double>& s) { weighted.push_back(s[0]); }, opt);
  }
  std::vector<double> err;
  std::string line, aside;
  for (double sigma : {0.1, 0.05, 0.025}) {
    MutationKernel kernel = directed.mutation;
    kernel.sigma = sigma;
    std::vector<double> mean(grid + 1, 0.0);
    for (int s = 0; s < seeds; ++s) {
      auto path = tss_simulate(1.0, directed.rates, kernel, T / (sigma * sigma), derive_seed(4000, static_cast<std::uint64_t>(s)));
      for (int i = 0; i <= grid; ++i) mean[i] += path.trait_at(canon.times[i] / (sigma * sigma)) / seeds;
    }
    double e = 0.0, w = 0.0;
    for (int i = 0; i <= grid; ++i) {
      e = std::max(e, std::abs(mean[i] - canon.traits[i]));
      w = std::max(w, std::abs(mean[i] - weighted[i]));
    }
    err.push_back(e);
    line += " sigma " + fmt(sigma, 3) + ": " + fmt(e, 4);
    aside += " " + fmt(w, 4);
  }
  o.require(err[0] > err[1] && err[1] > err[2], "sup |mean TSS - canonical| on [0, " + fmt(T) + "]:" + line);
  o.detail << "(against the transfer-weighted drift:" << aside << "); ";
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> only(argv + 1, argv + argc);
  const std::vector<std::pair<const char*, std::function<void(Outcome&)>>> criteria = {
      {"invasion-probability", invasion_probability_mc},
      {"constant-C-coexistence", constant_C_coexistence},
      {"fixation-time-scaling", fixation_scaling},
      {"transfer-campaigns", campaigns},
      {"deterministic-limit", deterministic_limit},
      {"property-suites", property_suites},
      {"evolutionary-layer", evolutionary_layer},
  };
  int failures = 0;
  for (const auto& [name, fn] : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), name) == only.end()) continue;
    Outcome o;
    auto t0 = std::chrono::steady_clock::now();
    try {
      fn(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failures += !o.pass;
    std::printf("%s %s: %s(%.1f s)\n", o.pass ? "PASS" : "FAIL", name, o.detail.str().c_str(), secs);
    std::fflush(stdout);
  }
  return failures;
}
