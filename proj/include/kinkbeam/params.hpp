#pragma once

// Physical constants, beam/laser/grating inputs and every derived constant.
//
// Unit system used throughout the library: length in um, time in fs,
// energy in eV, field strength in V/um (so e*E0 is in eV/um).

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>

#include "kinkbeam/errors.hpp"

namespace kinkbeam {

struct PhysicalConstants {
  static constexpr double hbar = 0.6582119569;              // eV fs
  static constexpr double c = 0.299792458;                  // um / fs
  static constexpr double electron_rest_energy = 510998.95; // eV

  /// Electron mass in eV fs^2 / um^2.
  static constexpr double electron_mass() { return electron_rest_energy / (c * c); }
  /// hbar * c in eV um.
  static constexpr double hbar_c() { return hbar * c; }
};

struct BeamConfig {
  double kinetic_energy = 100.0;    // eV
  double laser_wavelength = 0.2;    // um
  double grating_period = 0.004;    // um
  double field_strength = 5.0;      // V/um (0.5e7 V/m)
  std::optional<double> lorentz_gamma_override;
  // The quoted beam velocity. 100 eV alone gives beta = 0.01978, which misses
  // the grating synchronization c*Lambda/lambda = 0.02c by 1%.
  std::optional<double> beta_override = 0.02;

  bool operator==(const BeamConfig&) const = default;
};

struct DerivedParams {
  double beta = 0;           // v0 / c
  double gamma = 1;          // Lorentz factor
  double kinetic_energy = 0; // eV, (gamma - 1) m c^2
  double v0 = 0;             // um / fs
  double omega_L = 0;        // rad / fs
  double photon_energy = 0;  // eV
  double k_z = 0;            // um^-1, grating recoil wavevector q
  double k0 = 0;             // um^-1, central electron wavevector
  double p0 = 0;             // eV fs / um
  double alpha0 = 0;         // um^-1
  double alpha1 = 0;         // dimensionless
  double alpha2 = 0;         // um
  double kappa_mag = 0;      // eV
  double bragg_Q = 0;        // dimensionless
  double sync_residual = 0;  // dimensionless
  double grating_period = 0; // um, echoed for grid checks
  double laser_wavelength = 0;
  double field_strength = 0;

  /// Effective longitudinal mass gamma^3 m in eV fs^2 / um^2.
  double effective_mass() const {
    return gamma * gamma * gamma * PhysicalConstants::electron_mass();
  }
};

namespace detail {

inline void require_positive(double value, std::string_view field) {
  if (!std::isfinite(value) || !(value > 0.0))
    throw ValidationError(std::string(field), "must be a finite positive number");
}

}  // namespace detail

inline void validate(const BeamConfig& config) {
  detail::require_positive(config.kinetic_energy, "kinetic_energy");
  detail::require_positive(config.laser_wavelength, "laser_wavelength");
  detail::require_positive(config.grating_period, "grating_period");
  if (!std::isfinite(config.field_strength) || config.field_strength < 0.0)
    throw ValidationError("field_strength", "must be finite and >= 0");
  if (config.lorentz_gamma_override &&
      (!std::isfinite(*config.lorentz_gamma_override) || *config.lorentz_gamma_override < 1.0))
    throw ValidationError("lorentz_gamma_override", "must be finite and >= 1");
  if (config.beta_override &&
      (!std::isfinite(*config.beta_override) || *config.beta_override <= 0.0 ||
       *config.beta_override >= 1.0))
    throw ValidationError("beta_override", "must lie in (0, 1)");
}

inline DerivedParams derive_params(const BeamConfig& config) {
  using PC = PhysicalConstants;
  validate(config);

  DerivedParams d;
  const double mc2 = PC::electron_rest_energy;
  if (config.beta_override) {
    d.beta = *config.beta_override;
  } else {
    const double g = 1.0 + config.kinetic_energy / mc2;
    d.beta = std::sqrt(1.0 - 1.0 / (g * g));
  }
  d.gamma = config.lorentz_gamma_override ? *config.lorentz_gamma_override
                                          : 1.0 / std::sqrt(1.0 - d.beta * d.beta);
  d.kinetic_energy = (d.gamma - 1.0) * mc2;
  d.v0 = d.beta * PC::c;
  d.omega_L = 2.0 * std::numbers::pi * PC::c / config.laser_wavelength;
  d.photon_energy = PC::hbar * d.omega_L;
  d.k_z = 2.0 * std::numbers::pi / config.grating_period;

  const double mc = mc2 / PC::c;  // eV fs / um
  d.p0 = d.gamma * d.beta * mc;
  d.k0 = d.p0 / PC::hbar;

  const double eE = config.field_strength;  // eV / um
  d.alpha0 = eE * d.beta / (PC::hbar * d.omega_L);
  d.alpha1 = eE / (d.gamma * mc * d.omega_L);
  d.alpha2 = PC::hbar / (2.0 * d.gamma * d.gamma * d.gamma * mc);
  d.kappa_mag = eE * d.v0 / (2.0 * d.omega_L);
  d.bragg_Q = d.alpha0 > 0.0 ? d.alpha2 * d.k_z * d.k_z / d.alpha0
                             : std::numeric_limits<double>::infinity();
  d.sync_residual = std::abs(d.v0 - d.omega_L / d.k_z) / d.v0;

  d.grating_period = config.grating_period;
  d.laser_wavelength = config.laser_wavelength;
  d.field_strength = config.field_strength;
  return d;
}

enum class Regime { Bragg, Intermediate, RamanNath };

inline std::string_view to_string(Regime r) {
  switch (r) {
    case Regime::Bragg: return "Bragg";
    case Regime::Intermediate: return "Intermediate";
    case Regime::RamanNath: return "RamanNath";
  }
  return "?";
}

struct RegimeClassification {
  Regime regime;
  double Q;
};

// Thresholds are a project convention; Q alone does not fix a boundary.
inline constexpr double kBraggThreshold = 10.0;
inline constexpr double kRamanNathThreshold = 0.1;

inline RegimeClassification classify_regime(const DerivedParams& d) {
  const double Q = d.bragg_Q;
  if (Q >= kBraggThreshold) return {Regime::Bragg, Q};
  if (Q <= kRamanNathThreshold) return {Regime::RamanNath, Q};
  return {Regime::Intermediate, Q};
}

/// Ratio of the half-recoil kinetic energy hbar^2 (q/2)^2 / 2m* to |kappa|.
/// Two-sideband truncation is trusted when this is large; callers warn below 5.
inline double adiabatic_validity(const DerivedParams& d) {
  if (d.kappa_mag == 0.0) return std::numeric_limits<double>::infinity();
  const double hbar = PhysicalConstants::hbar;
  const double half_q = 0.5 * d.k_z;
  return hbar * hbar * half_q * half_q / (2.0 * d.effective_mass()) / d.kappa_mag;
}

inline constexpr double kAdiabaticWarningRatio = 5.0;

}  // namespace kinkbeam
