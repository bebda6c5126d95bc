#pragma once

#include <array>
#include <cmath>
#include <string>

#include "hgt/ode.hpp"
#include "hgt/scenario.hpp"

namespace testing_support {

/// (r_x, r_y, C_xx, C_xy, C_yx, C_yy, alpha(x, y), beta, mu)
inline hgt::TwoTraitParams params(const std::array<double, 9>& v) {
  hgt::TwoTraitParams p;
  p.r_x = v[0], p.r_y = v[1];
  p.c_xx = v[2], p.c_xy = v[3], p.c_yx = v[4], p.c_yy = v[5];
  p.alpha = v[6], p.beta = v[7], p.mu = v[8];
  return p;
}

/// Two-trait coefficients of a preset at its two initial traits.
inline hgt::TwoTraitParams preset_params(const std::string& name) {
  auto sc = hgt::preset(name);
  return hgt::two_trait_params(sc.rates, sc.initial.at(0).trait, sc.initial.at(1).trait);
}

inline hgt::RateSet rates(const std::string& b, const std::string& d, const std::string& C, const std::string& tau,
                          double beta, double mu, double lo = 0.0, double hi = 4.0) {
  hgt::RateSet r;
  r.space = hgt::TraitSpace(lo, hi);
  r.birth = hgt::parse(b, {"x"});
  r.death = hgt::parse(d, {"x"});
  r.competition = hgt::parse(C, {"x", "y"});
  r.transfer = hgt::parse(tau, {"x", "y"});
  r.beta = beta, r.mu = mu;
  return r;
}

}  // namespace testing_support
