#pragma once

// Uniform sampling of the co-moving coordinate and the TDSE space/time grid.

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "kinkbeam/errors.hpp"
#include "kinkbeam/params.hpp"

namespace kinkbeam {

/// n points zeta_min + i*h, h = (zeta_max - zeta_min)/n. The right end is
/// excluded so the same axis serves periodic domains.
struct SpatialAxis {
  double zeta_min = -0.5;
  double zeta_max = 0.5;
  std::size_t n_points = 10000;

  double spacing() const { return (zeta_max - zeta_min) / static_cast<double>(n_points); }
  double at(std::size_t i) const { return zeta_min + static_cast<double>(i) * spacing(); }
  double length() const { return zeta_max - zeta_min; }

  std::vector<double> points() const {
    std::vector<double> z(n_points);
    for (std::size_t i = 0; i < n_points; ++i) z[i] = at(i);
    return z;
  }

  void validate() const {
    if (!std::isfinite(zeta_min) || !std::isfinite(zeta_max) || !(zeta_max > zeta_min))
      throw ValidationError("grid.zeta_range", "zeta_max must exceed zeta_min");
    if (n_points < 1) throw ValidationError("grid.n_points", "must be >= 1");
  }

  bool operator==(const SpatialAxis&) const = default;
};

/// TDSE grid. The evolution variable is tau_c = c t (um).
struct Grid {
  double zeta_min = -0.5;
  double zeta_max = 0.5;
  std::size_t n_points = 10000;
  double tau_step = 1.5e-3;  // um
  std::size_t n_steps = 0;

  SpatialAxis axis() const { return {zeta_min, zeta_max, n_points}; }
  double delta_zeta() const { return axis().spacing(); }
  double zeta(std::size_t i) const { return axis().at(i); }
  /// Physical time step in fs.
  double time_step() const { return tau_step / PhysicalConstants::c; }
  double duration() const { return time_step() * static_cast<double>(n_steps); }

  /// Upper bounds on the resolution that keep the grating and optical phases resolved.
  static double max_delta_zeta(const DerivedParams& d) { return d.grating_period / 40.0; }
  static double max_tau_step(const DerivedParams& d) { return PhysicalConstants::c / (20.0 * d.omega_L); }

  void validate(const DerivedParams& d) const {
    axis().validate();
    if (!std::isfinite(tau_step) || !(tau_step > 0.0))
      throw ValidationError("grid.tau_step", "must be > 0");
    constexpr double slack = 1.0 + 1e-9;
    if (delta_zeta() > max_delta_zeta(d) * slack)
      throw ValidationError("grid.n_points", "delta_zeta = " + std::to_string(delta_zeta()) +
                                                 " um exceeds grating_period/40 = " +
                                                 std::to_string(max_delta_zeta(d)));
    if (tau_step > max_tau_step(d) * slack)
      throw ValidationError("grid.tau_step", "tau_step = " + std::to_string(tau_step) +
                                                 " um exceeds c/(20 omega_L) = " +
                                                 std::to_string(max_tau_step(d)));
  }

  /// Grid covering [zeta_min, zeta_max) at the coarsest allowed spacing, stepping
  /// `duration_fs` with the largest allowed step.
  static Grid for_duration(const DerivedParams& d, double zeta_min, double zeta_max,
                           double duration_fs) {
    Grid g;
    g.zeta_min = zeta_min;
    g.zeta_max = zeta_max;
    g.n_points = static_cast<std::size_t>(std::ceil((zeta_max - zeta_min) / max_delta_zeta(d) - 1e-9));
    const double tau = PhysicalConstants::c * duration_fs;
    g.n_steps = static_cast<std::size_t>(std::ceil(tau / max_tau_step(d) - 1e-9));
    g.tau_step = g.n_steps > 0 ? tau / static_cast<double>(g.n_steps) : max_tau_step(d);
    return g;
  }

  bool operator==(const Grid&) const = default;
};

}  // namespace kinkbeam
