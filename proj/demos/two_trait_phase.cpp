// Fixed points and phase diagram of the two-trait presets, plus the long-run
// state of the deterministic system started near the resident equilibrium.

#include <cstdio>

#include "hgt/phase.hpp"
#include "hgt/scenario.hpp"

int main() {
  for (const char* name : {"fig2a", "fig2b", "fig2c", "fig2d"}) {
    auto sc = hgt::preset(name);
    auto p = hgt::two_trait_params(sc.rates, 0.25, 0.75);
    auto rep = hgt::analyze_phase(p);
    std::printf("%s: S(y;x)=%.4f S(x;y)=%.4f diagram %s\n", name, rep.S_yx, rep.S_xy, rep.diagram.label().c_str());
    for (const auto& fp : rep.boundary)
      std::printf("  %-10s (%.4f, %.4f) %s\n", hgt::to_string(fp.kind), fp.location.n_x, fp.location.n_y,
                  hgt::to_string(fp.stability));
    for (const auto& fp : rep.interior.points)
      std::printf("  interior   (%.4f, %.4f) p_y=%.6f %s\n", fp.location.n_x, fp.location.n_y, fp.p_y,
                  hgt::to_string(fp.stability));
    auto traj = hgt::integrate_two_trait({p.nbar_x(), 0.01}, p, 1000.0, 1000.0);
    std::printf("  ODE from (nbar_x, 0.01) at t=1000: (%.6f, %.6f)\n", traj.back().n_x, traj.back().n_y);
  }
}
