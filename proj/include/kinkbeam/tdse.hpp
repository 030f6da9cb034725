#pragma once

// Co-moving-frame TDSE on a uniform zeta grid:
//   i d/dtau chi = H chi,   tau = c t,
// with H = -alpha2 d^2 [+ i beta d] + alpha1 (grating A.p term) + potential * alpha0 sin(k_z zeta -+ theta),
// discretized to a Hermitian tridiagonal matrix and stepped with Crank-Nicolson.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "kinkbeam/dirac.hpp"
#include "kinkbeam/errors.hpp"
#include "kinkbeam/grid.hpp"
#include "kinkbeam/observables.hpp"
#include "kinkbeam/params.hpp"
#include "kinkbeam/profiles.hpp"
#include "kinkbeam/tridiagonal.hpp"
#include "kinkbeam/wavefunction.hpp"

namespace kinkbeam {

enum class Frame { CoMoving, CoMovingWithDrift };
enum class BoundaryKind { Periodic, AbsorbingMask };

inline std::string_view to_string(Frame f) {
  return f == Frame::CoMoving ? "co_moving" : "co_moving_with_drift";
}
inline std::string_view to_string(BoundaryKind b) {
  return b == BoundaryKind::Periodic ? "periodic" : "absorbing_mask";
}

struct BoundaryConfig {
  BoundaryKind kind = BoundaryKind::Periodic;
  double mask_width = 0.1;     // um, absorbing layer at each end
  double mask_strength = 1.0;  // um^-1 of tau; per-step factor exp(-strength dtau s^2)

  bool operator==(const BoundaryConfig&) const = default;
};

/// Per-snapshot observables computed during evolve().
struct ObservableSettings {
  SidebandBasis sideband_basis = SidebandBasis::JackiwRebbi;
  int sideband_n_max = 2;
  std::optional<double> trap_center;  // um; defaults to the first kink center, else 0
  double trap_halfwidth = 0.0;        // um; 0 -> 3 localization lengths

  bool operator==(const ObservableSettings&) const = default;
};

struct TdseRunConfig {
  BeamConfig beam;
  PhaseProfile profile;
  Grid grid;
  Frame frame = Frame::CoMoving;
  PhaseSign phase_sign = PhaseSign::MinusTheta;
  PotentialSign potential_sign = PotentialSign::Negative;
  std::size_t snapshot_every = 1;
  BoundaryConfig boundary;
  ObservableSettings observables;
  bool keep_snapshots = true;
};

struct Trajectory {
  std::vector<double> times;  // fs
  std::vector<std::size_t> steps;
  std::vector<Wavefunction> snapshots;  // empty unless keep_snapshots
  std::vector<double> norm;
  std::vector<double> rms_width;  // um
  std::vector<char> width_reliable;
  std::vector<std::map<int, double>> sideband_populations;
  std::vector<double> trapped_fraction;
  std::vector<double> absorbed_norm;
  std::vector<double> edge_density;  // boundary / peak density
  double trap_center = 0.0;
  double trap_halfwidth = 0.0;
  std::vector<std::string> warnings;

  std::size_t size() const noexcept { return times.size(); }
};

inline constexpr double kEdgeDensityWarning = 1e-8;

/// Tridiagonal H for the configured frame and sign conventions. Bonds use the
/// average of the two site phases for the alpha1 term, which keeps H Hermitian.
inline TridiagonalOperator assemble_hamiltonian(const TdseRunConfig& cfg, const DerivedParams& d) {
  cfg.grid.validate(d);
  const std::size_t n = cfg.grid.n_points;
  const double h = cfg.grid.delta_zeta();
  const double s = cfg.phase_sign == PhaseSign::MinusTheta ? -1.0 : 1.0;
  const double pot = cfg.potential_sign == PotentialSign::Negative ? -1.0 : 1.0;
  const double beta_eff = cfg.frame == Frame::CoMovingWithDrift ? d.beta : 0.0;
  const bool periodic = cfg.boundary.kind == BoundaryKind::Periodic;

  TridiagonalOperator H(n, periodic);
  std::vector<cplx> phase(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double z = cfg.grid.zeta(i);
    const double x = d.k_z * z + s * cfg.profile.theta(z);
    phase[i] = std::polar(1.0, x);
    H.diag[i] = 2.0 * d.alpha2 / (h * h) - (d.alpha1 / h) * std::cos(x) + pot * d.alpha0 * std::sin(x);
  }
  if (n == 1) return H;
  const cplx kinetic{-d.alpha2 / (h * h), -beta_eff / (2.0 * h)};
  const std::size_t bonds = H.periodic ? n : n - 1;
  for (std::size_t i = 0; i < bonds; ++i) {
    const std::size_t j = (i + 1) % n;
    const cplx up = kinetic + (d.alpha1 / (4.0 * h)) * (phase[i] + phase[j]);
    H.upper[i] = up;
    H.lower[i] = std::conj(up);
  }
  return H;
}

/// One Crank-Nicolson step (1 + i dtau H/2)^{-1} (1 - i dtau H/2) chi. Factorizes
/// H each call; evolve() reuses the factorization instead.
inline Wavefunction cn_step(const Wavefunction& chi, const TridiagonalOperator& H, double tau_step) {
  CrankNicolson cn(H, tau_step);
  Wavefunction out = chi;
  cn.step(out.amplitudes);
  return out;
}

/// Smooth absorbing mask, 1 in the interior.
inline std::vector<double> absorbing_mask(const Grid& g, const BoundaryConfig& b) {
  std::vector<double> m(g.n_points, 1.0);
  if (b.kind != BoundaryKind::AbsorbingMask) return m;
  if (!(b.mask_width > 0.0) || !(b.mask_strength >= 0.0))
    throw ValidationError("boundary", "mask width must be > 0 and strength >= 0");
  if (2.0 * b.mask_width >= g.zeta_max - g.zeta_min)
    throw ValidationError("boundary.mask_width", "absorbing layers cover the whole grid");
  for (std::size_t i = 0; i < g.n_points; ++i) {
    const double z = g.zeta(i);
    const double dist = std::min(z - g.zeta_min, g.zeta_max - z);
    if (dist < b.mask_width) {
      const double s = (b.mask_width - dist) / b.mask_width;
      m[i] = std::exp(-b.mask_strength * g.tau_step * s * s);
    }
  }
  return m;
}

using SnapshotObserver = std::function<void(std::size_t step, double time_fs, const Wavefunction&)>;

/// Evolve chi0 for grid.n_steps steps. Records observables at step 0, every
/// snapshot_every steps and at the last step; `observer` sees the same states.
inline Trajectory evolve(const Wavefunction& chi0, const TdseRunConfig& cfg, const DerivedParams& d,
                         const SnapshotObserver& observer = {}) {
  if (cfg.snapshot_every < 1) throw ValidationError("snapshot_every", "must be >= 1");
  if (!(chi0.grid == cfg.grid)) throw ValidationError("initial_state", "grid does not match the run grid");
  if (!chi0.all_finite()) throw ValidationError("initial_state", "contains non-finite amplitudes");
  const auto H = assemble_hamiltonian(cfg, d);
  CrankNicolson cn(H, cfg.grid.tau_step);
  const auto mask = absorbing_mask(cfg.grid, cfg.boundary);
  const bool masked = cfg.boundary.kind == BoundaryKind::AbsorbingMask;

  Trajectory traj;
  const auto centers = cfg.profile.kink_centers();
  traj.trap_center = cfg.observables.trap_center.value_or(centers.empty() ? 0.5 * (cfg.grid.zeta_min + cfg.grid.zeta_max)
                                                                          : centers.front());
  traj.trap_halfwidth = cfg.observables.trap_halfwidth > 0.0
                            ? cfg.observables.trap_halfwidth
                            : 3.0 * DiracParams::from(d).localization_length;
  const bool trap_ok = std::isfinite(traj.trap_halfwidth) &&
                       traj.trap_center - traj.trap_halfwidth >= cfg.grid.zeta_min &&
                       traj.trap_center + traj.trap_halfwidth <= cfg.grid.zeta_max;
  if (!trap_ok) traj.warnings.push_back("trap window does not fit in the grid; trapped_fraction recorded as NaN");

  Wavefunction chi = chi0;
  double absorbed = 0.0;
  bool edge_warned = false;
  auto record = [&](std::size_t step) {
    const double t = static_cast<double>(step) * cfg.grid.time_step();
    traj.times.push_back(t);
    traj.steps.push_back(step);
    traj.norm.push_back(chi.norm_squared());
    const auto w = rms_width(chi);
    traj.rms_width.push_back(w.width);
    traj.width_reliable.push_back(w.reliable ? 1 : 0);
    traj.edge_density.push_back(w.edge_ratio);
    if (!edge_warned && !masked && w.edge_ratio > kEdgeDensityWarning) {
      char msg[128];
      std::snprintf(msg, sizeof msg, "edge density %.3g of peak exceeds 1e-8 at t = %.1f fs", w.edge_ratio, t);
      traj.warnings.push_back(msg);
      edge_warned = true;
    }
    traj.sideband_populations.push_back(sideband_populations(momentum_spectrum(chi), d, cfg.observables.sideband_n_max,
                                                             cfg.observables.sideband_basis));
    traj.trapped_fraction.push_back(trap_ok ? trapped_fraction(chi, traj.trap_center, traj.trap_halfwidth)
                                            : std::numeric_limits<double>::quiet_NaN());
    traj.absorbed_norm.push_back(absorbed);
    if (cfg.keep_snapshots) traj.snapshots.push_back(chi);
    if (observer) observer(step, t, chi);
  };

  record(0);
  const std::size_t n_steps = cfg.grid.n_steps;
  const double dz = cfg.grid.delta_zeta();
  for (std::size_t step = 1; step <= n_steps; ++step) {
    cn.step(chi.amplitudes);
    const cplx probe = chi.amplitudes.front();  // the back sweep carries any NaN to row 0
    if (!std::isfinite(probe.real()) || !std::isfinite(probe.imag()))
      throw NumericalError("non-finite amplitude after step " + std::to_string(step));
    if (masked) {
      double lost = 0.0;
      for (std::size_t i = 0; i < chi.size(); ++i) {
        if (mask[i] == 1.0) continue;
        const double before = std::norm(chi.amplitudes[i]);
        chi.amplitudes[i] *= mask[i];
        lost += before - std::norm(chi.amplitudes[i]);
      }
      absorbed += lost * dz;
    }
    if (step % cfg.snapshot_every == 0 || step == n_steps) record(step);
  }
  return traj;
}

struct GaussianOptions {
  double chirp_time = 0.0;  // fs; starts the packet as if it had spread freely for this long
  /// Sideband carrier (a, b): chi -> envelope * (a e^{-i k_z zeta/2} + b e^{+i k_z zeta/2}).
  std::optional<std::pair<cplx, cplx>> sideband_carrier;
};

/// chi ∝ exp(-(zeta - center)^2 / (4 sigma_z^2 (1 + i xi t0))), sigma_z = v0 sigma_t, normalized.
inline Wavefunction initial_gaussian(const DerivedParams& d, double sigma_t_fs, double center, const Grid& grid,
                                     const GaussianOptions& opt = {}) {
  grid.axis().validate();
  if (!(sigma_t_fs > 0.0)) throw ValidationError("sigma_t", "must be > 0");
  const auto chirp = GaussianChirpParams::from(d, sigma_t_fs);
  const double sz = chirp.sigma_z;
  if (center - 5.0 * sz < grid.zeta_min || center + 5.0 * sz > grid.zeta_max)
    throw ValidationError("center", "Gaussian needs a 5 sigma_z margin inside the grid (sigma_z = " +
                                        std::to_string(sz) + " um)");
  const cplx spread{1.0, chirp.chirp_xi * opt.chirp_time};
  Wavefunction chi(grid);
  for (std::size_t i = 0; i < grid.n_points; ++i) {
    const double dz = grid.zeta(i) - center;
    cplx v = std::exp(-dz * dz / (4.0 * sz * sz * spread));
    if (opt.sideband_carrier) {
      const double half = 0.5 * d.k_z * grid.zeta(i);
      v *= opt.sideband_carrier->first * std::polar(1.0, -half) + opt.sideband_carrier->second * std::polar(1.0, half);
    }
    chi.amplitudes[i] = v;
  }
  chi.normalize();
  return chi;
}

/// chi = u e^{-i k_z zeta/2} + l e^{+i k_z zeta/2} for a sideband spinor (u, l).
inline Wavefunction wavefunction_from_sidebands(const SpinorField& psi, const DerivedParams& d, const Grid& grid) {
  psi.check_consistent();
  if (!(psi.grid == grid.axis())) throw ValidationError("spinor", "grid does not match");
  Wavefunction chi(grid);
  for (std::size_t i = 0; i < grid.n_points; ++i) {
    const double half = 0.5 * d.k_z * grid.zeta(i);
    chi.amplitudes[i] = psi.upper[i] * std::polar(1.0, -half) + psi.lower[i] * std::polar(1.0, half);
  }
  chi.normalize();
  return chi;
}

/// Bound-state sideband spinor for the TDSE's effective Dirac mass. A single kink
/// gives the exact zero mode; several kinks give an equal-weight sum of one
/// localized mode per kink, each decaying away from its own center.
inline SpinorField jackiw_rebbi_spinor(const DerivedParams& d, const PhaseProfile& profile, const SpatialAxis& axis,
                                       PhaseSign phase = PhaseSign::MinusTheta,
                                       PotentialSign potential = PotentialSign::Negative) {
  axis.validate();
  const CouplingProfile coupling{d.kappa_mag, profile};
  const auto mass = MassProfile::tdse_effective(coupling, phase, potential);
  const auto dp = DiracParams::from(d);
  if (!(d.kappa_mag > 0.0)) throw ValidationError("field_strength", "bound state needs a nonzero coupling");
  const auto g = detail::gauge_mass(mass, axis);
  const auto& m = g.real_part;
  const std::size_t n = axis.n_points;
  std::vector<std::size_t> crossings;
  for (std::size_t i = 0; i + 1 < n; ++i)
    if ((m[i] > 0.0) != (m[i + 1] > 0.0)) crossings.push_back(i);
  if (crossings.empty()) throw ValidationError("profile", "no kink inside the grid: effective mass never changes sign");
  if (crossings.size() == 1 && m.back() < 0.0) return zero_mode(mass, dp, axis);

  const double h = axis.spacing();
  std::vector<double> abs_m(n);
  for (std::size_t i = 0; i < n; ++i) abs_m[i] = std::abs(m[i]);
  const auto integral = detail::cumulative_integral(abs_m, h);
  SpinorField psi(axis);
  const cplx ul = std::polar(1.0, -0.5 * g.phase), ll = std::polar(1.0, 0.5 * g.phase);
  for (std::size_t c : crossings) {
    const int chirality = m[c] > 0.0 ? +1 : -1;  // + -> - keeps (1, i), - -> + keeps (1, -i)
    const double frac = m[c] / (m[c] - m[c + 1]);
    const double anchor = integral[c] + frac * (integral[c + 1] - integral[c]);
    for (std::size_t i = 0; i < n; ++i) {
      const double f = std::exp(-std::abs(integral[i] - anchor) / dp.velocity_coeff) / std::numbers::sqrt2;
      psi.upper[i] += ul * f;
      psi.lower[i] += ll * cplx(0.0, chirality) * f;
    }
  }
  psi.normalize();
  return psi;
}

inline Wavefunction initial_jackiw_rebbi(const DerivedParams& d, const PhaseProfile& profile, const Grid& grid,
                                         PhaseSign phase = PhaseSign::MinusTheta,
                                         PotentialSign potential = PotentialSign::Negative) {
  return wavefunction_from_sidebands(jackiw_rebbi_spinor(d, profile, grid.axis(), phase, potential), d, grid);
}

/// Carrier (a, b) matching the bound-state chirality at the first kink, for
/// dressing a Gaussian so it overlaps the trapped mode.
inline std::pair<cplx, cplx> bound_state_carrier(const DerivedParams& d, const PhaseProfile& profile,
                                                 const SpatialAxis& axis, PhaseSign phase = PhaseSign::MinusTheta,
                                                 PotentialSign potential = PotentialSign::Negative) {
  const auto mass = MassProfile::tdse_effective(CouplingProfile{d.kappa_mag, profile}, phase, potential);
  const auto g = detail::gauge_mass(mass, axis);
  int chirality = +1;
  for (std::size_t i = 0; i + 1 < g.real_part.size(); ++i)
    if ((g.real_part[i] > 0.0) != (g.real_part[i + 1] > 0.0)) {
      chirality = g.real_part[i] > 0.0 ? +1 : -1;
      break;
    }
  const double r = 1.0 / std::numbers::sqrt2;
  return {std::polar(r, -0.5 * g.phase), cplx(0.0, chirality) * std::polar(r, 0.5 * g.phase)};
}

}  // namespace kinkbeam
