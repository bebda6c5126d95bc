// hgtevo: command line front end.
//
//   hgtevo <subcommand> (--preset NAME | --scenario FILE) [options]
//
// Subcommands: simulate, ode, pde, phase, invade, tss, canonical, sweep,
// presets. Artifacts are written to --out-dir with file names prefixed by
// --prefix (default: scenario name); a JSON summary is also printed to stdout.

#include <chrono>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "hgt/gillespie.hpp"
#include "hgt/invasion.hpp"
#include "hgt/io.hpp"
#include "hgt/ode.hpp"
#include "hgt/phase.hpp"
#include "hgt/report.hpp"
#include "hgt/scenario.hpp"
#include "hgt/sweep.hpp"
#include "hgt/tss.hpp"

namespace fs = std::filesystem;
using hgt::json;

namespace {

struct Common {
  std::string preset;
  std::string scenario_file;
  std::string out_dir = ".";
  std::string prefix;
  std::optional<std::uint64_t> seed;
  std::optional<double> t_max;
  std::optional<double> cadence;
};

void add_common(CLI::App* cmd, Common& c, bool run_controls = true) {
  auto* g = cmd->add_option_group("scenario");
  g->add_option("--preset", c.preset, "named preset (see 'hgtevo presets')");
  g->add_option("--scenario", c.scenario_file, "scenario file");
  g->require_option(1);
  cmd->add_option("--out-dir", c.out_dir, "directory for artifacts")->capture_default_str();
  cmd->add_option("--prefix", c.prefix, "artifact file name prefix (default: scenario name)");
  if (run_controls) {
    cmd->add_option("--seed", c.seed, "64-bit seed");
    cmd->add_option("--t-max", c.t_max, "time horizon");
    cmd->add_option("--cadence", c.cadence, "sampling interval");
  }
}

hgt::Scenario load(const Common& c) {
  hgt::Scenario sc = c.preset.empty() ? hgt::load_scenario_file(c.scenario_file) : hgt::preset(c.preset);
  if (c.seed) sc.run.seed = *c.seed;
  if (c.t_max) sc.run.t_max = *c.t_max;
  if (c.cadence) sc.run.cadence = *c.cadence;
  sc.validate();
  return sc;
}

std::string artifact(const Common& c, const hgt::Scenario& sc, const std::string& suffix) {
  fs::create_directories(c.out_dir);
  std::string prefix = c.prefix.empty() ? (sc.name.empty() ? std::string("run") : sc.name) : c.prefix;
  return (fs::path(c.out_dir) / (prefix + "_" + suffix)).string();
}

void write_json(const std::string& path, const json& j) {
  auto f = hgt::open_output(path);
  f << j.dump(2) << '\n';
}

/// Trait pair for two-trait commands: explicit, or the first two initial species.
std::pair<double, double> trait_pair(const hgt::Scenario& sc, std::optional<double> x, std::optional<double> y) {
  if (x && y) return {*x, *y};
  if (sc.initial.size() < 2) throw std::invalid_argument("give --x and --y, or a scenario with two initial species");
  return {x.value_or(sc.initial[0].trait), y.value_or(sc.initial[1].trait)};
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic and deterministic eco-evolutionary dynamics with horizontal transfer"};
  app.require_subcommand(1);

  Common c_sim, c_ode, c_pde, c_phase, c_inv, c_tss, c_can, c_sweep;
  std::optional<double> ode_x, ode_y, phase_x, phase_y, inv_x, inv_y, pde_x, pde_y;
  std::optional<double> ode_nx, ode_ny, tss_x0, can_x0;
  std::size_t cells = 256;
  long long inv_replicates = 0;
  double inv_eta = 0.1;
  std::optional<long long> inv_K;
  std::size_t sweep_replicates = 10;
  unsigned threads = hgt::default_threads();
  std::optional<double> can_sigma;

  auto* sim = app.add_subcommand("simulate", "stochastic individual-based run");
  add_common(sim, c_sim);

  auto* ode = app.add_subcommand("ode", "two-trait deterministic system");
  add_common(ode, c_ode);
  ode->add_option("--x", ode_x, "trait x");
  ode->add_option("--y", ode_y, "trait y");
  ode->add_option("--nx0", ode_nx, "initial density of x (default: initial count / K)");
  ode->add_option("--ny0", ode_ny, "initial density of y");

  auto* pde = app.add_subcommand("pde", "trait-grid integro-differential equation");
  add_common(pde, c_pde);
  pde->add_option("--cells", cells, "number of grid cells")->capture_default_str();

  auto* phase = app.add_subcommand("phase", "fixed points and phase diagram of the two-trait system");
  add_common(phase, c_phase, false);
  phase->add_option("--x", phase_x, "trait x (resident)");
  phase->add_option("--y", phase_y, "trait y (invader)");

  auto* inv = app.add_subcommand("invade", "invasion probability and fixation time of y in x");
  add_common(inv, c_inv);
  inv->add_option("--x", inv_x, "resident trait");
  inv->add_option("--y", inv_y, "invading trait");
  inv->add_option("--replicates", inv_replicates, "Monte Carlo replicates (0: formulas only)")->capture_default_str();
  inv->add_option("--eta", inv_eta, "success threshold as a density")->capture_default_str();
  inv->add_option("--K", inv_K, "system size for the Monte Carlo runs (default: scenario K)");
  inv->add_option("--threads", threads, "worker threads")->capture_default_str();

  auto* tss = app.add_subcommand("tss", "trait substitution sequence");
  add_common(tss, c_tss);
  tss->add_option("--x0", tss_x0, "initial trait (default: first initial species)");

  auto* can = app.add_subcommand("canonical", "canonical equation of adaptive dynamics");
  add_common(can, c_can);
  can->add_option("--x0", can_x0, "initial trait (default: first initial species)");
  can->add_option("--sigma", can_sigma, "mutation step s.d. (default: scenario sigma)");

  auto* sw = app.add_subcommand("sweep", "replicate runs with merged statistics");
  add_common(sw, c_sweep);
  sw->add_option("--replicates", sweep_replicates, "number of replicates")->capture_default_str();
  sw->add_option("--threads", threads, "worker threads")->capture_default_str();

  auto* presets = app.add_subcommand("presets", "list shipped presets, or print one");
  std::string show;
  presets->add_option("name", show, "preset to print");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*presets) {
      if (show.empty())
        for (const auto& n : hgt::preset_names()) std::cout << n << '\n';
      else
        std::cout << hgt::preset_text(show);
      return 0;
    }

    if (*sim) {
      auto sc = load(c_sim);
      auto t0 = std::chrono::steady_clock::now();
      auto traj = hgt::simulate(sc, sc.run.seed, sc.run.t_max, sc.run.cadence);
      hgt::RunSummary s;
      s.status = hgt::to_string(traj.status);
      s.wall_seconds = seconds_since(t0);
      s.events = traj.events;
      s.final_time = traj.final_time;
      hgt::Population last(traj.snapshots.back().species);
      s.N = last.total(), s.mean_trait = last.mean_trait(), s.trait_variance = last.trait_variance();
      auto csv = artifact(c_sim, sc, "trajectory.csv");
      {
        auto f = hgt::open_output(csv);
        hgt::write_population_csv(f, traj.snapshots);
      }
      s.artifacts.push_back(csv);
      auto js = artifact(c_sim, sc, "summary.json");
      s.artifacts.push_back(js);
      write_json(js, hgt::to_json(s));
      std::cout << hgt::to_json(s).dump(2) << '\n';
      return 0;
    }

    if (*ode) {
      auto sc = load(c_ode);
      auto [x, y] = trait_pair(sc, ode_x, ode_y);
      auto p = hgt::two_trait_params(sc.rates, x, y);
      double K = sc.K.as_double();
      auto initial_density = [&](double trait) {
        for (const auto& s : sc.initial)
          if (s.trait == trait) return static_cast<double>(s.count) / K;
        return 0.0;
      };
      hgt::TwoTraitState s0{ode_nx.value_or(initial_density(x)), ode_ny.value_or(initial_density(y))};
      auto traj = hgt::integrate_two_trait(s0, p, sc.run.t_max, sc.run.cadence);
      auto csv = artifact(c_ode, sc, "ode.csv");
      {
        auto f = hgt::open_output(csv);
        hgt::write_two_trait_csv(f, traj);
      }
      const auto& e = traj.back();
      json out = {{"x", x}, {"y", y}, {"params", hgt::to_json(p)}, {"final", {{"time", e.time}, {"n_x", e.n_x}, {"n_y", e.n_y}}}};
      if (e.n_x + e.n_y > 0.0) out["final"]["p_y"] = e.n_y / (e.n_x + e.n_y);
      out["artifacts"] = {csv};
      write_json(artifact(c_ode, sc, "ode.json"), out);
      std::cout << out.dump(2) << '\n';
      return 0;
    }

    if (*pde) {
      auto sc = load(c_pde);
      hgt::GridDensity u0(sc.space(), cells);
      for (const auto& s : sc.initial) u0.u[u0.cell_of(s.trait)] += static_cast<double>(s.count) / sc.K.as_double() / u0.dx();
      auto traj = hgt::integrate_grid(u0, sc.rates, sc.run.t_max, sc.run.cadence);
      auto csv = artifact(c_pde, sc, "pde.csv");
      {
        auto f = hgt::open_output(csv);
        hgt::write_density_csv(f, traj);
      }
      json out = {{"cells", cells}, {"final_time", traj.back().time}, {"final_mass", traj.back().density.mass()}, {"artifacts", {csv}}};
      write_json(artifact(c_pde, sc, "pde.json"), out);
      std::cout << out.dump(2) << '\n';
      return 0;
    }

    if (*phase) {
      auto sc = load(c_phase);
      auto [x, y] = trait_pair(sc, phase_x, phase_y);
      auto p = hgt::two_trait_params(sc.rates, x, y);
      auto rep = hgt::analyze_phase(p);
      json out = hgt::to_json(rep);
      out["x"] = x, out["y"] = y;
      if (sc.rates.competition.is_constant()) out["constant_C"] = hgt::to_json(hgt::constant_C_report(p));
      auto csv = artifact(c_phase, sc, "fixed_points.csv");
      {
        auto f = hgt::open_output(csv);
        hgt::write_fixed_points_csv(f, rep);
      }
      out["artifacts"] = {csv};
      write_json(artifact(c_phase, sc, "phase.json"), out);
      std::cout << out.dump(2) << '\n';
      return 0;
    }

    if (*inv) {
      auto sc = load(c_inv);
      auto [x, y] = trait_pair(sc, inv_x, inv_y);
      long long K = inv_K.value_or(sc.K.value());
      json out = hgt::to_json(hgt::invasion_report(y, x, sc.rates, static_cast<double>(K)));
      out["x"] = x, out["y"] = y, out["K"] = K;
      if (inv_replicates > 0) {
        auto t0 = std::chrono::steady_clock::now();
        auto mc = hgt::mc_invasion(sc, y, x, K, inv_replicates, inv_eta, sc.run.seed, threads);
        out["monte_carlo"] = hgt::to_json(mc);
        out["monte_carlo"]["eta"] = inv_eta;
        out["monte_carlo"]["z_score"] = mc.std_error > 0.0 ? (mc.estimate - out["P"].get<double>()) / mc.std_error : 0.0;
        out["monte_carlo"]["wall_seconds"] = seconds_since(t0);
      }
      write_json(artifact(c_inv, sc, "invasion.json"), out);
      std::cout << out.dump(2) << '\n';
      return 0;
    }

    if (*tss) {
      auto sc = load(c_tss);
      double x0 = tss_x0.value_or(sc.initial.front().trait);
      auto path = hgt::tss_simulate(x0, sc.rates, sc.mutation, sc.run.t_max, sc.run.seed);
      auto csv = artifact(c_tss, sc, "tss.csv");
      {
        auto f = hgt::open_output(csv);
        hgt::write_tss_csv(f, path);
      }
      json out = {{"x0", x0}, {"jumps", path.times.size() - 1}, {"candidates", path.candidates},
                  {"final_trait", path.traits.back()}, {"t_end", path.t_end}, {"artifacts", {csv}}};
      write_json(artifact(c_tss, sc, "tss.json"), out);
      std::cout << out.dump(2) << '\n';
      return 0;
    }

    if (*can) {
      auto sc = load(c_can);
      double x0 = can_x0.value_or(sc.initial.front().trait);
      double sigma = can_sigma.value_or(sc.mutation.sigma);
      auto path = hgt::canonical_integrate(x0, sc.rates, sigma, sc.run.t_max, sc.run.cadence);
      auto csv = artifact(c_can, sc, "canonical.csv");
      {
        auto f = hgt::open_output(csv);
        hgt::write_path_csv(f, path.times, path.traits);
      }
      json out = {{"x0", x0}, {"sigma", sigma}, {"final_trait", path.traits.back()}, {"artifacts", {csv}}};
      write_json(artifact(c_can, sc, "canonical.json"), out);
      std::cout << out.dump(2) << '\n';
      return 0;
    }

    if (*sw) {
      auto sc = load(c_sweep);
      auto res = hgt::sweep(sc, sweep_replicates, sc.run.seed, threads, sc.run.t_max, sc.run.cadence);
      auto stats = artifact(c_sweep, sc, "sweep_stats.csv");
      auto reps = artifact(c_sweep, sc, "sweep_replicates.csv");
      auto js = artifact(c_sweep, sc, "sweep.json");
      {
        auto f = hgt::open_output(stats);
        hgt::write_sweep_stats_csv(f, res);
      }
      {
        auto f = hgt::open_output(reps);
        hgt::write_replicates_csv(f, res);
      }
      json out = hgt::sweep_summary_json(res);
      out["base_seed"] = sc.run.seed;
      out["artifacts"] = {stats, reps, js};
      write_json(js, out);
      std::cout << out.dump(2) << '\n';
      if (!res.failed.empty()) {
        std::cerr << "hgtevo: " << res.failed.size() << " replicate(s) failed\n";
        return 3;
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "hgtevo: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
