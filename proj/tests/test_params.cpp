#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "kinkbeam/params.hpp"

using namespace kinkbeam;

namespace {

// Independent evaluation of the derived constants straight from the definitions,
// with the constants spelled out again here.
struct Oracle {
  double omega, photon, kz, alpha0, alpha1, alpha2, kappa, Q, gamma, v0;
};

Oracle oracle(double beta, double lambda, double period, double field) {
  const double hbar = 0.6582119569, c = 0.299792458, mc2 = 510998.95;
  Oracle o{};
  o.gamma = 1.0 / std::sqrt(1.0 - beta * beta);
  o.v0 = beta * c;
  o.omega = 2.0 * std::numbers::pi * c / lambda;
  o.photon = hbar * o.omega;
  o.kz = 2.0 * std::numbers::pi / period;
  o.alpha0 = field * beta / (hbar * o.omega);
  o.alpha1 = field * c / (o.gamma * mc2 * o.omega);
  o.alpha2 = hbar * c / (2.0 * o.gamma * o.gamma * o.gamma * mc2);
  o.kappa = field * o.v0 / (2.0 * o.omega);
  o.Q = o.alpha2 * o.kz * o.kz / o.alpha0;
  return o;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST(DeriveParams, MatchesIndependentOracle) {
  const auto d = derive_params(BeamConfig{});
  const auto o = oracle(0.02, 0.2, 0.004, 5.0);
  EXPECT_LT(rel(d.omega_L, o.omega), 1e-12);
  EXPECT_LT(rel(d.photon_energy, o.photon), 1e-12);
  EXPECT_LT(rel(d.k_z, o.kz), 1e-12);
  EXPECT_LT(rel(d.alpha0, o.alpha0), 1e-12);
  EXPECT_LT(rel(d.alpha1, o.alpha1), 1e-12);
  EXPECT_LT(rel(d.alpha2, o.alpha2), 1e-12);
  EXPECT_LT(rel(d.kappa_mag, o.kappa), 1e-12);
  EXPECT_LT(rel(d.bragg_Q, o.Q), 1e-12);
  EXPECT_LT(rel(d.gamma, o.gamma), 1e-14);
}

TEST(DeriveParams, FrozenDefaults) {
  const auto d = derive_params(BeamConfig{});
  EXPECT_NEAR(d.alpha0, 0.0161311, 1e-7);
  EXPECT_NEAR(d.alpha1, 3.11396e-7, 1e-12);
  EXPECT_NEAR(d.alpha2, 1.92964e-7, 1e-12);
  EXPECT_NEAR(d.bragg_Q, 29.5156, 1e-3);
  EXPECT_NEAR(d.kappa_mag, 1.59155e-3, 1e-8);
}

TEST(DeriveParams, PublishedValues) {
  const auto d = derive_params(BeamConfig{});
  EXPECT_LT(rel(d.photon_energy, 6.20), 5e-3);
  EXPECT_LT(rel(d.alpha1, 3.11e-7), 1e-2);
  EXPECT_LT(rel(d.alpha2, 1.92e-7), 1e-2);
  EXPECT_LT(rel(d.alpha0, 0.016), 1e-2);
  EXPECT_LT(rel(d.bragg_Q, 29.3), 2e-2);
  EXPECT_LT(rel(d.kappa_mag, 1.59e-3), 2e-2);
}

TEST(DeriveParams, SynchronizationResidual) {
  const auto d = derive_params(BeamConfig{});
  EXPECT_LT(d.sync_residual, 1e-3);
  EXPECT_LT(std::abs(d.omega_L / d.k_z - d.v0) / d.v0, 1e-3);
}

TEST(DeriveParams, KineticEnergyWithoutBetaOverride) {
  BeamConfig c;
  c.beta_override.reset();
  const auto d = derive_params(c);
  const double gamma = 1.0 + 100.0 / 510998.95;
  EXPECT_NEAR(d.gamma, gamma, 1e-14);
  EXPECT_NEAR(d.beta, std::sqrt(1.0 - 1.0 / (gamma * gamma)), 1e-14);
  // 100 eV is slightly slower than the grating phase velocity
  EXPECT_GT(d.sync_residual, 1e-3);
}

TEST(DeriveParams, GammaOverride) {
  BeamConfig c;
  c.lorentz_gamma_override = 1.001;
  const auto d = derive_params(c);
  EXPECT_DOUBLE_EQ(d.gamma, 1.001);
  EXPECT_LT(rel(d.alpha2, 1.92e-7), 1e-2);
}

TEST(DeriveParams, FieldOffZeroesCoupling) {
  BeamConfig c;
  c.field_strength = 0.0;
  const auto d = derive_params(c);
  EXPECT_EQ(d.alpha0, 0.0);
  EXPECT_EQ(d.alpha1, 0.0);
  EXPECT_EQ(d.kappa_mag, 0.0);
  EXPECT_TRUE(std::isinf(d.bragg_Q));
  EXPECT_TRUE(std::isinf(adiabatic_validity(d)));
}

TEST(Validate, NamesTheField) {
  BeamConfig c;
  c.grating_period = 0.0;
  try {
    validate(c);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.field(), "grating_period");
  }
  c = BeamConfig{};
  c.field_strength = -1.0;
  EXPECT_THROW(validate(c), ValidationError);
  c = BeamConfig{};
  c.laser_wavelength = std::nan("");
  EXPECT_THROW(derive_params(c), ValidationError);
  c = BeamConfig{};
  c.beta_override = 1.0;
  EXPECT_THROW(derive_params(c), ValidationError);
}

TEST(Regime, DefaultIsBragg) {
  const auto r = classify_regime(derive_params(BeamConfig{}));
  EXPECT_EQ(r.regime, Regime::Bragg);
  EXPECT_LT(rel(r.Q, 29.3), 2e-2);
}

TEST(Regime, ScalesInverselyWithField) {
  BeamConfig c;
  const double q0 = derive_params(c).bragg_Q;
  c.field_strength *= 1000.0;
  const auto r = classify_regime(derive_params(c));
  EXPECT_NEAR(r.Q, q0 * 1e-3, 1e-12 * q0);
  EXPECT_EQ(r.regime, Regime::RamanNath);
}

TEST(Regime, TunedToUnityIsIntermediate) {
  BeamConfig c;
  c.field_strength *= derive_params(c).bragg_Q;  // Q is exactly 1/E0
  const auto r = classify_regime(derive_params(c));
  EXPECT_NEAR(r.Q, 1.0, 1e-12);
  EXPECT_EQ(r.regime, Regime::Intermediate);
}

TEST(Adiabatic, DefaultRatio) {
  const auto d = derive_params(BeamConfig{});
  const double m = d.effective_mass();
  const double expect = 0.6582119569 * 0.6582119569 * d.k_z * d.k_z / (8.0 * m * d.kappa_mag);
  EXPECT_LT(rel(adiabatic_validity(d), expect), 1e-12);
  EXPECT_LT(rel(adiabatic_validity(d), 14.7), 5e-2);
}

TEST(Adiabatic, ScaledFieldNearUnity) {
  BeamConfig c;
  c.field_strength *= 14.7;
  EXPECT_NEAR(adiabatic_validity(derive_params(c)), 1.0, 0.05);
}

TEST(Properties, WavelengthScaling) {
  BeamConfig a, b;
  b.laser_wavelength = 2.0 * a.laser_wavelength;
  const auto da = derive_params(a), db = derive_params(b);
  EXPECT_DOUBLE_EQ(db.omega_L, 0.5 * da.omega_L);
  EXPECT_DOUBLE_EQ(db.photon_energy, 0.5 * da.photon_energy);
}

TEST(Properties, QTwoWays) {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> field(0.1, 50.0), beta(0.005, 0.2);
  for (int i = 0; i < 50; ++i) {
    BeamConfig c;
    c.field_strength = field(rng);
    c.beta_override = beta(rng);
    const auto d = derive_params(c);
    const double hbar = PhysicalConstants::hbar;
    const double q2 = hbar * hbar * d.k_z * d.k_z / (2.0 * d.effective_mass()) / (2.0 * d.kappa_mag);
    EXPECT_LT(rel(d.bragg_Q, q2), 1e-10);
    for (double v : {d.omega_L, d.photon_energy, d.k_z, d.k0, d.alpha0, d.alpha1, d.alpha2, d.kappa_mag, d.bragg_Q}) {
      EXPECT_TRUE(std::isfinite(v));
      EXPECT_GT(v, 0.0);
    }
  }
}
