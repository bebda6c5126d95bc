#pragma once

// CSV artifacts. Long format, one row per time and species (or cell).
//   stochastic runs   time,trait,count
//   grid solver       time,trait,density
//   two-trait ODE     time,n_x,n_y
//   TSS / canonical   time,x

#include <fstream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hgt/gillespie.hpp"
#include "hgt/ode.hpp"
#include "hgt/phase.hpp"
#include "hgt/tss.hpp"

namespace hgt {

inline constexpr const char* population_csv_header = "time,trait,count";
inline constexpr const char* density_csv_header = "time,trait,density";
inline constexpr const char* two_trait_csv_header = "time,n_x,n_y";
inline constexpr const char* path_csv_header = "time,x";
inline constexpr const char* fixed_point_csv_header = "kind,n_x,n_y,p_y,stability,index,eig1_re,eig1_im,eig2_re,eig2_im,residual";

namespace detail {
inline std::string num(double v) { return format_double(v); }
}  // namespace detail

inline void write_population_csv(std::ostream& os, const std::vector<Snapshot>& snaps) {
  os << population_csv_header << '\n';
  for (const auto& s : snaps)
    for (const auto& sp : s.species) os << detail::num(s.time) << ',' << detail::num(sp.trait) << ',' << sp.count << '\n';
}

inline void write_density_csv(std::ostream& os, const std::vector<GridSample>& samples) {
  os << density_csv_header << '\n';
  for (const auto& s : samples)
    for (std::size_t i = 0; i < s.density.cells(); ++i)
      os << detail::num(s.time) << ',' << detail::num(s.density.point(i)) << ',' << detail::num(s.density.u[i]) << '\n';
}

inline void write_two_trait_csv(std::ostream& os, const std::vector<TwoTraitSample>& samples) {
  os << two_trait_csv_header << '\n';
  for (const auto& s : samples) os << detail::num(s.time) << ',' << detail::num(s.n_x) << ',' << detail::num(s.n_y) << '\n';
}

inline void write_path_csv(std::ostream& os, const std::vector<double>& times, const std::vector<double>& traits) {
  if (times.size() != traits.size()) throw std::invalid_argument("path times and traits differ in length");
  os << path_csv_header << '\n';
  for (std::size_t i = 0; i < times.size(); ++i) os << detail::num(times[i]) << ',' << detail::num(traits[i]) << '\n';
}

/// Jump points plus a closing row at the end of the simulated window.
inline void write_tss_csv(std::ostream& os, const TssPath& path) {
  auto times = path.times;
  auto traits = path.traits;
  if (!times.empty() && path.t_end > times.back()) {
    times.push_back(path.t_end);
    traits.push_back(traits.back());
  }
  write_path_csv(os, times, traits);
}

inline void write_fixed_points_csv(std::ostream& os, const PhaseReport& rep) {
  os << fixed_point_csv_header << '\n';
  auto row = [&](const FixedPoint& fp) {
    os << to_string(fp.kind) << ',' << detail::num(fp.location.n_x) << ',' << detail::num(fp.location.n_y) << ','
       << detail::num(fp.p_y) << ',' << to_string(fp.stability) << ',' << fp.index << ','
       << detail::num(fp.eigenvalues[0].real()) << ',' << detail::num(fp.eigenvalues[0].imag()) << ','
       << detail::num(fp.eigenvalues[1].real()) << ',' << detail::num(fp.eigenvalues[1].imag()) << ','
       << detail::num(fp.residual) << '\n';
  };
  for (const auto& fp : rep.boundary) row(fp);
  for (const auto& fp : rep.interior.points) row(fp);
}

/// Opens `path` for writing or throws.
inline std::ofstream open_output(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  return f;
}

}  // namespace hgt
