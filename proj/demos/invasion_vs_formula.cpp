// Monte Carlo invasion probability of a rare deleterious trait that spreads
// by transfer, against the branching-process formula.
//
//   invasion_vs_formula [replicates] [K] [seed]

#include <cstdint>
#include <cstdio>
#include <cstdlib>

#include "hgt/invasion.hpp"

int main(int argc, char** argv) {
  long long reps = argc > 1 ? std::atoll(argv[1]) : 2000;
  long long K = argc > 2 ? std::atoll(argv[2]) : 1000;
  std::uint64_t seed = argc > 3 ? std::strtoull(argv[3], nullptr, 10) : 1;
  auto sc = hgt::preset("fig2b");
  double P = hgt::invasion_probability(0.75, 0.25, sc.rates);
  auto mc = hgt::mc_invasion(sc, 0.75, 0.25, K, reps, 0.1, seed, hgt::default_threads());
  std::printf("formula P = %.5f\nMonte Carlo = %.5f +- %.5f (%lld/%lld)\n", P, mc.estimate, mc.std_error,
              mc.successes, mc.replicates);
  std::printf("fixation time estimate (K=%lld): %.2f\n", K,
              hgt::fixation_time(0.75, 0.25, sc.rates, static_cast<double>(K)));
}
