// Unilateral transfer campaign: one run per transfer rate, printing the
// population size and mean trait every 100 time units.
//
//   transfer_campaign [t_max] [seed]

#include <cstdio>
#include <cstdlib>

#include "hgt/gillespie.hpp"

int main(int argc, char** argv) {
  double t_max = argc > 1 ? std::atof(argv[1]) : 1000.0;
  std::uint64_t seed = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 7;
  for (const char* name : {"tau0", "tau02", "tau06", "tau07", "tau10"}) {
    auto sc = hgt::preset(name);
    hgt::Simulator sim(sc, seed);
    std::printf("== %s\n", name);
    auto status = sim.run(t_max, 100.0, [](double t, const hgt::Simulator& s) {
      std::printf("  t=%7.1f  N=%6lld  species=%4zu  mean trait=%.3f\n", t, s.total(), s.species_count(), s.mean_trait());
    });
    std::printf("  -> %s after %lld events\n", hgt::to_string(status), sim.events());
  }
}
