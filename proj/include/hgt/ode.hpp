#pragma once

// Deterministic large-population limits: the two-trait system, its
// (size, proportion) form and the trait-grid integro-differential equation.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "hgt/model.hpp"

namespace hgt {

class IntegrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct OdeOptions {
  double rtol = 1e-8;
  double atol = 1e-10;
  double clip = 1e-14;  // values below are set to 0; negative disables
  double lower = -std::numeric_limits<double>::infinity();  // box the state is clamped to
  double upper = std::numeric_limits<double>::infinity();
  double initial_dt = 1e-3;
  double max_dt = std::numeric_limits<double>::infinity();
};

/// Adaptive Dormand-Prince 5(4) integration of dx/dt = rhs(x, t) from t0 to t1.
/// observer(t, x) is called at t0 + k * cadence and at t1.
template <class Rhs, class Observer>
void integrate_adaptive(Rhs&& rhs, std::vector<double>& x, double t0, double t1, double cadence,
                        Observer&& observer, const OdeOptions& opt = {}) {
  namespace odeint = boost::numeric::odeint;
  using State = std::vector<double>;
  if (!(t1 >= t0)) throw std::invalid_argument("integration end before start");
  if (!(cadence > 0.0)) throw std::invalid_argument("cadence must be positive");
  auto stepper = odeint::make_controlled(opt.atol, opt.rtol, odeint::runge_kutta_dopri5<State>());
  auto system = [&](const State& s, State& dsdt, double t) { rhs(s, dsdt, t); };
  auto clip = [&] {
    for (double& v : x) {
      if (opt.clip >= 0.0 && v < opt.clip) v = 0.0;
      v = std::clamp(v, opt.lower, opt.upper);
    }
  };
  clip();
  double t = t0;
  double dt = std::min(opt.initial_dt, opt.max_dt);
  long long k = 0;
  observer(t, static_cast<const State&>(x));
  ++k;
  while (t < t1) {
    double target = std::min(t1, t0 + static_cast<double>(k) * cadence);
    while (t < target) {
      double h = std::min({dt, target - t, opt.max_dt});
      const bool truncated = h < dt;
      // try_step advances t and replaces h by the proposed next step
      if (stepper.try_step(system, x, t, h) == odeint::success) {
        clip();
        for (double v : x)
          if (!std::isfinite(v)) throw IntegrationError("solution became non-finite at t=" + detail::format_double(t));
        dt = truncated ? std::max(dt, h) : h;
      } else {
        dt = h;
        if (dt < 1e-14 * std::max(1.0, std::abs(t)))
          throw IntegrationError("step size underflow at t=" + detail::format_double(t));
      }
      if (target - t < 1e-12 * std::max(1.0, std::abs(target))) t = target;
    }
    observer(t, static_cast<const State&>(x));
    ++k;
  }
}

// Two-trait system ------------------------------------------------------------

/// Coefficients of the two-trait system for traits (x, y).
/// alpha = alpha(x, y) = tau(x, y) - tau(y, x).
struct TwoTraitParams {
  double r_x = 1.0, r_y = 1.0;
  double c_xx = 1.0, c_xy = 1.0, c_yx = 1.0, c_yy = 1.0;
  double alpha = 0.0;
  double beta = 0.0, mu = 1.0;
  // individual rates, used by invasion quantities
  double b_x = 1.0, b_y = 1.0;
  double tau_xy = 0.0, tau_yx = 0.0;

  double nbar_x() const { return r_x / c_xx; }
  double nbar_y() const { return r_y / c_yy; }
};

inline TwoTraitParams two_trait_params(const RateSet& rates, double x, double y) {
  rates.space.require(x);
  rates.space.require(y);
  TwoTraitParams p;
  p.r_x = growth_rate(x, rates);
  p.r_y = growth_rate(y, rates);
  p.c_xx = rates.C(x, x), p.c_xy = rates.C(x, y), p.c_yx = rates.C(y, x), p.c_yy = rates.C(y, y);
  p.tau_xy = rates.tau(x, y), p.tau_yx = rates.tau(y, x);
  p.alpha = p.tau_xy - p.tau_yx;
  p.beta = rates.beta, p.mu = rates.mu;
  p.b_x = rates.b(x), p.b_y = rates.b(y);
  return p;
}

struct TwoTraitState {
  double n_x = 0.0;
  double n_y = 0.0;
};

inline TwoTraitState two_trait_rhs(const TwoTraitState& s, const TwoTraitParams& p) {
  double n = s.n_x + s.n_y;
  double denom = p.beta + p.mu * n;
  // with beta = 0 the transfer term vanishes together with n
  double h = denom > 0.0 ? p.alpha / denom : 0.0;
  return {(p.r_x - p.c_xx * s.n_x - p.c_xy * s.n_y + h * s.n_y) * s.n_x,
          (p.r_y - p.c_yx * s.n_x - p.c_yy * s.n_y - h * s.n_x) * s.n_y};
}

struct TwoTraitSample {
  double time = 0.0;
  double n_x = 0.0;
  double n_y = 0.0;
};

inline std::vector<TwoTraitSample> integrate_two_trait(const TwoTraitState& initial, const TwoTraitParams& p,
                                                       double t_max, double cadence = 1.0, const OdeOptions& opt = {}) {
  if (!(initial.n_x >= 0.0 && initial.n_y >= 0.0 && std::isfinite(initial.n_x) && std::isfinite(initial.n_y)))
    throw std::invalid_argument("two-trait densities must be finite and nonnegative");
  std::vector<double> x{initial.n_x, initial.n_y};
  std::vector<TwoTraitSample> out;
  integrate_adaptive(
      [&](const std::vector<double>& s, std::vector<double>& ds, double) {
        auto d = two_trait_rhs({s[0], s[1]}, p);
        ds[0] = d.n_x, ds[1] = d.n_y;
      },
      x, 0.0, t_max, cadence, [&](double t, const std::vector<double>& s) { out.push_back({t, s[0], s[1]}); }, opt);
  return out;
}

enum class Focal { x, y };

/// Total density n and proportion p of the focal trait.
struct SizeProportion {
  double n = 0.0;
  double p = 0.0;
};

inline SizeProportion np_form(const TwoTraitState& s, Focal focal) {
  double n = s.n_x + s.n_y;
  if (!(n > 0.0)) throw std::domain_error("proportion undefined at zero total density");
  return {n, (focal == Focal::x ? s.n_x : s.n_y) / n};
}

inline TwoTraitState from_np(const SizeProportion& np, Focal focal) {
  double a = np.p * np.n, b = np.n - np.p * np.n;
  return focal == Focal::x ? TwoTraitState{a, b} : TwoTraitState{b, a};
}

// Trait grid --------------------------------------------------------------------

/// Density on M uniform cells of the trait space, evaluated at cell midpoints.
struct GridDensity {
  double x_min = 0.0;
  double x_max = 1.0;
  std::vector<double> u;

  GridDensity() = default;
  GridDensity(const TraitSpace& space, std::size_t cells)
      : x_min(space.x_min()), x_max(space.x_max()), u(cells, 0.0) {
    if (cells == 0) throw std::invalid_argument("grid needs at least one cell");
  }

  std::size_t cells() const noexcept { return u.size(); }
  double dx() const noexcept { return (x_max - x_min) / static_cast<double>(u.size()); }
  double point(std::size_t i) const noexcept { return x_min + (static_cast<double>(i) + 0.5) * dx(); }
  std::size_t cell_of(double x) const {
    auto i = static_cast<long long>(std::floor((x - x_min) / dx()));
    return static_cast<std::size_t>(std::clamp<long long>(i, 0, static_cast<long long>(u.size()) - 1));
  }
  double mass() const {
    double s = 0.0;
    for (double v : u) s += v;
    return s * dx();
  }
};

/// Rate functions tabulated on a grid.
class GridModel {
 public:
  GridModel(const RateSet& rates, const GridDensity& shape)
      : m_(shape.cells()), dx_(shape.dx()), beta_(rates.beta), mu_(rates.mu), r_(m_), c_(m_ * m_), a_(m_ * m_) {
    for (std::size_t i = 0; i < m_; ++i) {
      double xi = shape.point(i);
      r_[i] = rates.b(xi) - rates.d(xi);
      for (std::size_t j = 0; j < m_; ++j) {
        double xj = shape.point(j);
        c_[i * m_ + j] = rates.C(xi, xj);
        a_[i * m_ + j] = rates.tau(xi, xj) - rates.tau(xj, xi);
      }
    }
  }

  std::size_t cells() const noexcept { return m_; }

  void rhs(const std::vector<double>& u, std::vector<double>& du) const {
    double mass = 0.0;
    for (double v : u) mass += v;
    mass *= dx_;
    double denom = beta_ + mu_ * mass;
    for (std::size_t i = 0; i < m_; ++i) {
      if (u[i] == 0.0) {
        du[i] = 0.0;
        continue;
      }
      const double* ci = &c_[i * m_];
      const double* ai = &a_[i * m_];
      double comp = 0.0, flux = 0.0;
      for (std::size_t j = 0; j < m_; ++j) {
        comp += ci[j] * u[j];
        flux += ai[j] * u[j];
      }
      double transfer = denom > 0.0 ? flux * dx_ / denom : 0.0;
      du[i] = (r_[i] - comp * dx_ + transfer) * u[i];
    }
  }

 private:
  std::size_t m_;
  double dx_, beta_, mu_;
  std::vector<double> r_, c_, a_;
};

inline std::vector<double> grid_rhs(const GridDensity& u, const RateSet& rates) {
  GridModel model(rates, u);
  std::vector<double> du(u.cells());
  model.rhs(u.u, du);
  return du;
}

struct GridSample {
  double time = 0.0;
  GridDensity density;
};

inline std::vector<GridSample> integrate_grid(const GridDensity& u0, const RateSet& rates, double t_max,
                                              double cadence = 1.0, const OdeOptions& opt = {}) {
  for (double v : u0.u)
    if (!(v >= 0.0 && std::isfinite(v))) throw std::invalid_argument("grid density must be finite and nonnegative");
  GridModel model(rates, u0);
  std::vector<double> x = u0.u;
  std::vector<GridSample> out;
  integrate_adaptive(
      [&](const std::vector<double>& s, std::vector<double>& ds, double) { model.rhs(s, ds); }, x, 0.0, t_max,
      cadence,
      [&](double t, const std::vector<double>& s) {
        GridDensity g = u0;
        g.u = s;
        out.push_back({t, std::move(g)});
      },
      opt);
  return out;
}

}  // namespace hgt
