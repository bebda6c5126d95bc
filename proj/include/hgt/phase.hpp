#pragma once

// Fitness functions, fixed points and phase-diagram classification of the
// two-trait system.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hgt/model.hpp"
#include "hgt/ode.hpp"

namespace hgt {

/// f(y; x) = r(y) - C(y, x) r(x) / C(x, x): growth of rare y in a resident x.
inline double fitness_f(double y, double x, const RateSet& rates) {
  return growth_rate(y, rates) - rates.C(y, x) * growth_rate(x, rates) / rates.C(x, x);
}

/// Invasion fitness with transfer:
///   S(y; x) = f(y; x) + alpha(y, x) r(x) / (beta C(x, x) + mu r(x)).
inline double fitness_S(double y, double x, const RateSet& rates) {
  double rx = growth_rate(x, rates);
  double denom = rates.beta * rates.C(x, x) + rates.mu * rx;
  if (!(denom > 0.0)) throw std::domain_error("degenerate invasion fitness denominator at x=" + detail::format_double(x));
  return fitness_f(y, x, rates) + flux_rate(y, x, rates) * rx / denom;
}

/// S(y; x) and S(x; y) from two-trait coefficients (x resident in the first).
inline double invasion_fitness_y(const TwoTraitParams& p) {
  double denom = p.beta * p.c_xx + p.mu * p.r_x;
  if (!(denom > 0.0)) throw std::domain_error("degenerate invasion fitness denominator");
  return p.r_y - p.c_yx * p.r_x / p.c_xx - p.alpha * p.r_x / denom;
}

inline double invasion_fitness_x(const TwoTraitParams& p) {
  double denom = p.beta * p.c_yy + p.mu * p.r_y;
  if (!(denom > 0.0)) throw std::domain_error("degenerate invasion fitness denominator");
  return p.r_x - p.c_xy * p.r_y / p.c_yy + p.alpha * p.r_y / denom;
}

struct FitnessReport {
  double y = 0.0, x = 0.0;  // invader, resident
  double f = 0.0;
  double S = 0.0;
};

inline FitnessReport fitness_report(double y, double x, const RateSet& rates) {
  return {y, x, fitness_f(y, x, rates), fitness_S(y, x, rates)};
}

enum class PointKind { origin, boundary_x, boundary_y, interior };
enum class Stability { stable_node_or_focus, saddle, unstable, nonhyperbolic };

inline const char* to_string(PointKind k) {
  switch (k) {
    case PointKind::origin: return "origin";
    case PointKind::boundary_x: return "boundary_x";
    case PointKind::boundary_y: return "boundary_y";
    case PointKind::interior: return "interior";
  }
  return "?";
}

inline const char* to_string(Stability s) {
  switch (s) {
    case Stability::stable_node_or_focus: return "stable_node_or_focus";
    case Stability::saddle: return "saddle";
    case Stability::unstable: return "unstable";
    case Stability::nonhyperbolic: return "nonhyperbolic";
  }
  return "?";
}

struct FixedPoint {
  TwoTraitState location;
  PointKind kind = PointKind::interior;
  std::array<std::complex<double>, 2> eigenvalues{};
  Stability stability = Stability::nonhyperbolic;
  int index = 0;
  double residual = 0.0;
  double p_y = 0.0;  // fraction of y (interior points)
};

inline constexpr double hyperbolicity_tol = 1e-6;
inline constexpr double index_det_tol = 1e-8;

namespace detail {

inline std::array<std::complex<double>, 2> eigen2(double a, double b, double c, double d) {
  double tr = a + d, det = a * d - b * c;
  std::complex<double> disc = std::sqrt(std::complex<double>(tr * tr / 4.0 - det, 0.0));
  return {tr / 2.0 + disc, tr / 2.0 - disc};
}

inline void finish_classification(FixedPoint& fp, double det) {
  double re0 = fp.eigenvalues[0].real(), re1 = fp.eigenvalues[1].real();
  if (std::abs(re0) < hyperbolicity_tol || std::abs(re1) < hyperbolicity_tol)
    fp.stability = Stability::nonhyperbolic;
  else if (re0 < 0.0 && re1 < 0.0)
    fp.stability = Stability::stable_node_or_focus;
  else if (re0 > 0.0 && re1 > 0.0)
    fp.stability = Stability::unstable;
  else
    fp.stability = Stability::saddle;
  fp.index = std::abs(det) < index_det_tol ? 0 : (det > 0.0 ? 1 : -1);
}

inline double rhs_norm(const TwoTraitState& s, const TwoTraitParams& p) {
  auto d = two_trait_rhs(s, p);
  return std::hypot(d.n_x, d.n_y);
}

}  // namespace detail

/// Jacobian by central differences, eigenvalues, stability and index.
inline FixedPoint classify_fixed_point(const TwoTraitState& at, const TwoTraitParams& p,
                                       PointKind kind = PointKind::interior) {
  FixedPoint fp;
  fp.location = at;
  fp.kind = kind;
  fp.residual = detail::rhs_norm(at, p);
  double h = 1e-6 * (1.0 + std::hypot(at.n_x, at.n_y));
  auto f = [&](double a, double b) { return two_trait_rhs({a, b}, p); };
  auto px = f(at.n_x + h, at.n_y), mx = f(at.n_x - h, at.n_y);
  auto py = f(at.n_x, at.n_y + h), my = f(at.n_x, at.n_y - h);
  double j11 = (px.n_x - mx.n_x) / (2 * h), j21 = (px.n_y - mx.n_y) / (2 * h);
  double j12 = (py.n_x - my.n_x) / (2 * h), j22 = (py.n_y - my.n_y) / (2 * h);
  fp.eigenvalues = detail::eigen2(j11, j12, j21, j22);
  detail::finish_classification(fp, j11 * j22 - j12 * j21);
  double n = at.n_x + at.n_y;
  fp.p_y = n > 0.0 ? at.n_y / n : 0.0;
  return fp;
}

/// Origin and the two monomorphic equilibria. Their Jacobians are triangular,
/// so the eigenvalues are exact: the transverse one at (nbar_x, 0) is S(y; x).
inline std::array<FixedPoint, 3> boundary_fixed_points(const TwoTraitParams& p) {
  std::array<FixedPoint, 3> out;
  auto make = [&](TwoTraitState at, PointKind kind, double e0, double e1) {
    FixedPoint fp;
    fp.location = at;
    fp.kind = kind;
    fp.eigenvalues = {std::complex<double>(e0, 0.0), std::complex<double>(e1, 0.0)};
    fp.residual = detail::rhs_norm(at, p);
    detail::finish_classification(fp, e0 * e1);
    fp.p_y = kind == PointKind::boundary_y ? 1.0 : 0.0;
    return fp;
  };
  out[0] = make({0.0, 0.0}, PointKind::origin, p.r_x, p.r_y);
  out[1] = make({p.nbar_x(), 0.0}, PointKind::boundary_x, -p.r_x, invasion_fitness_y(p));
  out[2] = make({0.0, p.nbar_y()}, PointKind::boundary_y, invasion_fitness_x(p), -p.r_y);
  return out;
}

/// Maximum number of interior points for the transfer regime.
inline int interior_ceiling(const TwoTraitParams& p) {
  if (p.beta == 0.0) return 2;
  if (p.mu == 0.0) return 1;
  return 3;
}

/// Bracketed function whose roots in (0, 1) are the proportions of x at
/// interior equilibria, with n = R / Q:
///   R = p r_x + (1-p) r_y,  Q = C_xx p^2 + (C_xy + C_yx) p (1-p) + C_yy (1-p)^2,
///   G = (r_x - r_y) Q (beta Q + mu R)
///       + R (beta Q + mu R) (p (C_yx - C_xx) + (1-p) (C_yy - C_xy)) + alpha R Q.
/// Also returns the sum of absolute terms as a cancellation scale.
inline std::pair<double, double> interior_bracket(double px, const TwoTraitParams& p) {
  double q1 = 1.0 - px;
  double R = px * p.r_x + q1 * p.r_y;
  double Q = p.c_xx * px * px + (p.c_xy + p.c_yx) * px * q1 + p.c_yy * q1 * q1;
  double D = p.beta * Q + p.mu * R;
  double t1 = (p.r_x - p.r_y) * Q * D;
  double t2 = R * D * (px * (p.c_yx - p.c_xx) + q1 * (p.c_yy - p.c_xy));
  double t3 = p.alpha * R * Q;
  return {t1 + t2 + t3, std::abs(t1) + std::abs(t2) + std::abs(t3)};
}

struct InteriorResult {
  std::vector<FixedPoint> points;
  bool line_of_fixed_points = false;
  bool ceiling_exceeded = false;
};

inline InteriorResult interior_fixed_points(const TwoTraitParams& p, int scan = 10000) {
  InteriorResult res;
  std::vector<double> roots;
  auto G = [&](double px) { return interior_bracket(px, p).first; };
  auto is_zero = [&](double px) {
    auto [g, scale] = interior_bracket(px, p);
    return std::abs(g) <= 1e-13 * std::max(scale, 1e-300);
  };
  int zero_run = 0;
  double prev_p = 0.0, prev_g = G(0.0);
  for (int i = 1; i <= scan; ++i) {
    double cur_p = static_cast<double>(i) / scan;
    double cur_g = G(cur_p);
    if (i < scan && is_zero(cur_p)) {
      if (++zero_run >= 16) {
        res.line_of_fixed_points = true;
        return res;
      }
    } else {
      zero_run = 0;
    }
    if (i < scan && cur_g == 0.0) {
      roots.push_back(cur_p);
    } else if (prev_g != 0.0 && cur_g != 0.0 && (prev_g < 0.0) != (cur_g < 0.0)) {
      double a = prev_p, b = cur_p, ga = prev_g;
      while (b - a > 1e-12) {
        double m = 0.5 * (a + b), gm = G(m);
        if (gm == 0.0) {
          a = b = m;
          break;
        }
        if ((gm < 0.0) == (ga < 0.0))
          a = m, ga = gm;
        else
          b = m;
      }
      double r = 0.5 * (a + b);
      if (r > 0.0 && r < 1.0) roots.push_back(r);
    }
    prev_p = cur_p, prev_g = cur_g;
  }
  for (double px : roots) {
    double q1 = 1.0 - px;
    double R = px * p.r_x + q1 * p.r_y;
    double Q = p.c_xx * px * px + (p.c_xy + p.c_yx) * px * q1 + p.c_yy * q1 * q1;
    double n = R / Q;
    res.points.push_back(classify_fixed_point({px * n, q1 * n}, p, PointKind::interior));
  }
  res.ceiling_exceeded = static_cast<int>(res.points.size()) > interior_ceiling(p);
  return res;
}

struct PoincareReport {
  bool checked = false;  // false when some interior point is nonhyperbolic
  bool pass = false;
  int expected = 0;
  int index_sum = 0;
  std::string notice;
};

/// Interior index sum must be +1 (both boundary equilibria unstable), -1 (both
/// stable) or 0 (one of each).
inline PoincareReport poincare_consistency(const std::array<FixedPoint, 3>& boundary,
                                           const std::vector<FixedPoint>& interior) {
  PoincareReport rep;
  for (const auto& fp : interior)
    if (fp.stability == Stability::nonhyperbolic) {
      rep.notice = "skipped: nonhyperbolic interior point";
      return rep;
    }
  for (int k = 1; k <= 2; ++k)
    if (boundary[static_cast<std::size_t>(k)].stability == Stability::nonhyperbolic) {
      rep.notice = "skipped: nonhyperbolic boundary equilibrium";
      return rep;
    }
  bool x_stable = boundary[1].stability == Stability::stable_node_or_focus;
  bool y_stable = boundary[2].stability == Stability::stable_node_or_focus;
  rep.expected = (x_stable && y_stable) ? -1 : (!x_stable && !y_stable ? 1 : 0);
  for (const auto& fp : interior) rep.index_sum += fp.index;
  rep.checked = true;
  rep.pass = rep.index_sum == rep.expected;
  return rep;
}

/// Phase diagram 1..8, or 0 for unclassified.
///   1: x fixes            2: y fixes
///   3: both boundary equilibria unstable, one interior sink
///   4: both stable, one interior saddle
///   5: x stable, y unstable, interior saddle and sink
///   6: y stable, x unstable, interior saddle and sink
///   7: both unstable, two sinks and a saddle
///   8: both stable, two saddles and a sink
struct PhaseDiagram {
  int id = 0;
  bool classified() const noexcept { return id != 0; }
  std::string label() const { return id == 0 ? "unclassified" : std::to_string(id); }
};

struct PhaseReport {
  TwoTraitParams params;
  std::array<FixedPoint, 3> boundary;
  InteriorResult interior;
  PoincareReport poincare;
  PhaseDiagram diagram;
  double S_yx = 0.0, S_xy = 0.0;
};

inline PhaseDiagram classify_diagram(const std::array<FixedPoint, 3>& boundary, const InteriorResult& interior) {
  if (interior.line_of_fixed_points) return {};
  for (const auto& fp : boundary)
    if (fp.stability == Stability::nonhyperbolic) return {};
  int sinks = 0, saddles = 0;
  for (const auto& fp : interior.points) {
    if (fp.stability == Stability::stable_node_or_focus)
      ++sinks;
    else if (fp.stability == Stability::saddle)
      ++saddles;
    else
      return {};
  }
  bool xs = boundary[1].stability == Stability::stable_node_or_focus;
  bool ys = boundary[2].stability == Stability::stable_node_or_focus;
  auto is = [&](bool x, bool y, int si, int sa) { return xs == x && ys == y && sinks == si && saddles == sa; };
  if (is(true, false, 0, 0)) return {1};
  if (is(false, true, 0, 0)) return {2};
  if (is(false, false, 1, 0)) return {3};
  if (is(true, true, 0, 1)) return {4};
  if (is(true, false, 1, 1)) return {5};
  if (is(false, true, 1, 1)) return {6};
  if (is(false, false, 2, 1)) return {7};
  if (is(true, true, 1, 2)) return {8};
  return {};
}

inline PhaseReport analyze_phase(const TwoTraitParams& p) {
  PhaseReport rep;
  rep.params = p;
  rep.boundary = boundary_fixed_points(p);
  rep.interior = interior_fixed_points(p);
  rep.poincare = poincare_consistency(rep.boundary, rep.interior.points);
  rep.diagram = classify_diagram(rep.boundary, rep.interior);
  rep.S_yx = invasion_fitness_y(p);
  rep.S_xy = invasion_fitness_x(p);
  return rep;
}

struct ConstantCReport {
  bool frequency_dependent = false;  // routed to the invasion-implies-fixation criterion
  double phat = 0.0;                 // fraction of y at the polymorphic point
  bool exists = false;
  bool stable = false;
  bool invader_fixes = false;  // y replaces x
};

/// Constant competition C: polymorphic point
///   phat = -(f (beta C + mu r(x)) + alpha r(x)) / (mu f^2 + alpha f),
/// f = f(y; x), alpha = alpha(y, x); stable iff mu f + alpha > 0. With
/// beta = 0 there is no polymorphic point and y fixes iff S(y; x) > 0.
inline ConstantCReport constant_C_report(const TwoTraitParams& p) {
  if (!(p.c_xx == p.c_xy && p.c_xy == p.c_yx && p.c_yx == p.c_yy))
    throw std::invalid_argument("constant_C_report needs a constant competition kernel");
  ConstantCReport rep;
  double C = p.c_xx;
  double f = p.r_y - p.r_x;
  double a = -p.alpha;  // alpha(y, x)
  if (p.beta == 0.0) {
    rep.frequency_dependent = true;
    rep.invader_fixes = invasion_fitness_y(p) > 0.0;
    return rep;
  }
  double denom = p.mu * f * f + a * f;
  if (denom == 0.0) {
    rep.phat = std::numeric_limits<double>::quiet_NaN();
  } else {
    rep.phat = -(f * (p.beta * C + p.mu * p.r_x) + a * p.r_x) / denom;
  }
  rep.exists = rep.phat > 0.0 && rep.phat < 1.0;
  rep.stable = rep.exists && f * a < 0.0;
  rep.invader_fixes = !rep.exists && invasion_fitness_y(p) > 0.0;
  return rep;
}

}  // namespace hgt
