#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "kinkbeam/tdse.hpp"

using namespace kinkbeam;

namespace {

const DerivedParams& defaults() {
  static const DerivedParams d = derive_params(BeamConfig{});
  return d;
}

Grid grid(double lo, double hi, std::size_t n) {
  Grid g;
  g.zeta_min = lo;
  g.zeta_max = hi;
  g.n_points = n;
  return g;
}

Wavefunction random_wave(const Grid& g, std::mt19937& rng) {
  std::normal_distribution<double> n;
  Wavefunction w(g);
  for (auto& a : w.amplitudes) a = {n(rng), n(rng)};
  w.normalize();
  return w;
}

}  // namespace

TEST(Density, IntegratesToNorm) {
  std::mt19937 rng(1);
  const auto w = random_wave(grid(-0.5, 0.5, 1000), rng);
  double s = 0;
  for (double r : density(w)) s += r;
  EXPECT_NEAR(s * w.grid.delta_zeta(), 1.0, 1e-12);
}

TEST(Density, PlaneWaveIsUniform) {
  const auto g = grid(0.0, 0.1, 500);
  Wavefunction w(g);
  for (std::size_t i = 0; i < g.n_points; ++i) w.amplitudes[i] = std::polar(1.0, 123.4 * g.zeta(i));
  for (double r : density(w)) EXPECT_NEAR(r, 1.0, 1e-14);
}

TEST(Density, CoarseAverageRemovesFringes) {
  // two sidebands beat at k_z; averaging over one period flattens the fringe
  const auto g = grid(-0.2, 0.2, 4000);
  Wavefunction w(g);
  for (std::size_t i = 0; i < g.n_points; ++i)
    w.amplitudes[i] = 2.0 * std::cos(0.5 * defaults().k_z * g.zeta(i));
  for (double r : coarse_density(w, defaults().grating_period)) EXPECT_NEAR(r, 2.0, 1e-9);
  EXPECT_THROW(coarse_density(w, 1.0), ValidationError);
}

TEST(Momentum, ParsevalAndInverse) {
  std::mt19937 rng(2);
  for (std::size_t n : {64u, 1000u, 1023u}) {
    const auto w = random_wave(grid(-0.3, 0.3, n), rng);
    const auto s = momentum_spectrum(w);
    double total = 0;
    for (double x : s.weights) total += x;
    EXPECT_NEAR(total, 1.0, 1e-12);
    const auto back = from_momentum_amplitudes(w.grid, momentum_amplitudes(w));
    EXPECT_LT(l2_distance(back, w), 1e-12);
  }
}

TEST(Momentum, PlaneWaveLandsOnItsBin) {
  const auto g = grid(0.0, 0.2, 400);
  const auto k = momentum_axis(g.n_points, g.delta_zeta());
  Wavefunction w(g);
  for (std::size_t i = 0; i < g.n_points; ++i) w.amplitudes[i] = std::polar(1.0, k[230] * g.zeta(i));
  w.normalize();
  const auto s = momentum_spectrum(w);
  EXPECT_NEAR(s.weights[230], 1.0, 1e-12);
}

TEST(Momentum, GaussianWidth) {
  const auto g = grid(-0.25, 0.25, 10000);
  const auto w = initial_gaussian(defaults(), 1.0, 0.0, g);
  const double sz = GaussianChirpParams::from(defaults(), 1.0).sigma_z;
  const auto s = momentum_spectrum(w);
  double m2 = 0;
  for (std::size_t i = 0; i < s.k.size(); ++i) m2 += s.weights[i] * s.k[i] * s.k[i];
  EXPECT_NEAR(std::sqrt(m2), 1.0 / (2.0 * sz), 0.01 / (2.0 * sz));
}

TEST(Sidebands, JackiwRebbiSplitsEvenly) {
  const auto g = grid(-0.5, 0.5, 10000);
  const auto chi = initial_jackiw_rebbi(defaults(), PhaseProfile::kink(std::numbers::pi / 2, 0.0, 0.001), g);
  const auto pops = sideband_populations(momentum_spectrum(chi), defaults(), 2, SidebandBasis::JackiwRebbi);
  EXPECT_NEAR(pops.at(-1), 0.5, 1e-3);
  EXPECT_NEAR(pops.at(1), 0.5, 1e-3);
  EXPECT_EQ(pops.count(-5) + pops.count(5), 2u);
}

TEST(Sidebands, GaussianSitsInZerothOrder) {
  const auto g = grid(-0.25, 0.25, 10000);
  const auto pops =
      sideband_populations(momentum_spectrum(initial_gaussian(defaults(), 1.0, 0.0, g)), defaults(), 2, SidebandBasis::Ladder);
  EXPECT_GT(pops.at(0), 0.999);
  EXPECT_EQ(pops.size(), 5u);
}

TEST(Sidebands, RejectsBadWindows) {
  const auto g = grid(-0.25, 0.25, 10000);
  const auto s = momentum_spectrum(initial_gaussian(defaults(), 1.0, 0.0, g));
  EXPECT_THROW(sideband_populations(s, defaults(), 2, SidebandBasis::Ladder, 2 * defaults().k_z), ValidationError);
  EXPECT_THROW(sideband_populations(s, defaults(), 2, SidebandBasis::Ladder, -1.0), ValidationError);
  EXPECT_THROW(sideband_populations(s, defaults(), -1, SidebandBasis::Ladder), ValidationError);
  const auto coarse = momentum_spectrum(Wavefunction(grid(0, 0.004, 8), std::vector<cplx>(8, 1.0)));
  EXPECT_THROW(sideband_populations(coarse, defaults(), 1, SidebandBasis::Ladder), ValidationError);
}

TEST(Width, GaussianSigma) {
  const auto g = grid(-0.25, 0.25, 10000);
  const double sz = GaussianChirpParams::from(defaults(), 1.0).sigma_z;
  const auto a = rms_width(initial_gaussian(defaults(), 1.0, 0.0, g));
  EXPECT_NEAR(a.width, sz, 1e-6);
  EXPECT_TRUE(a.reliable);
  const auto b = rms_width(initial_gaussian(defaults(), 1.0, 0.07, g));
  EXPECT_NEAR(b.width, a.width, 1e-9);
  EXPECT_NEAR(b.mean, 0.07, 1e-9);
}

TEST(Width, PrechirpedAtOneOverXi) {
  const auto g = grid(-0.25, 0.25, 10000);
  const auto p = GaussianChirpParams::from(defaults(), 1.0);
  const auto w = initial_gaussian(defaults(), 1.0, 0.0, g, {.chirp_time = 1.0 / p.chirp_xi, .sideband_carrier = std::nullopt});
  EXPECT_NEAR(rms_width(w).width / p.sigma_z, std::numbers::sqrt2, 1e-5);
}

TEST(Width, FlagsEdgeDensity) {
  const auto g = grid(0.0, 0.1, 100);
  Wavefunction w(g, std::vector<cplx>(100, 1.0));
  EXPECT_FALSE(rms_width(w).reliable);
  EXPECT_THROW(rms_width(Wavefunction(g)), ValidationError);
}

TEST(Trapped, BoundStateStaysInWindow) {
  const auto g = grid(-0.5, 0.5, 10000);
  const auto chi = initial_jackiw_rebbi(defaults(), PhaseProfile::kink(std::numbers::pi / 2, 0.0, 0.001), g);
  const double ell = DiracParams::from(defaults()).localization_length;
  EXPECT_GT(trapped_fraction(chi, 0.0, 5 * ell), 0.99);
}

TEST(Trapped, DistantGaussianIsOutside) {
  const auto g = grid(-0.5, 0.5, 10000);
  const auto chi = initial_gaussian(defaults(), 1.0, 0.3, g);
  const double ell = DiracParams::from(defaults()).localization_length;
  EXPECT_LT(trapped_fraction(chi, 0.0, 3 * ell), 1e-4);
}

TEST(Trapped, RejectsBadWindow) {
  const auto g = grid(-0.5, 0.5, 1000);
  const auto chi = initial_gaussian(defaults(), 1.0, 0.0, g);
  EXPECT_THROW(trapped_fraction(chi, 0.0, 0.0), ValidationError);
  EXPECT_THROW(trapped_fraction(chi, 0.0, std::nan("")), ValidationError);
  EXPECT_THROW(trapped_fraction(chi, 0.45, 0.1), ValidationError);
}

TEST(Chirp, DefaultNumbers) {
  const auto p = GaussianChirpParams::from(defaults(), 1.0);
  const double hbar = 0.6582119569;
  EXPECT_NEAR(p.chirp_xi, hbar / (2 * defaults().effective_mass() * p.sigma_z * p.sigma_z), 1e-15);
  EXPECT_NEAR(p.sigma_z, 0.0059958, 1e-6);
  EXPECT_NEAR(p.chirp_xi, 1.6e-3, 0.1e-3);
  EXPECT_NEAR(chirp_prediction(p, 6000.0) / p.sigma_z, std::sqrt(1 + std::pow(p.chirp_xi * 6000.0, 2)), 1e-12);
  EXPECT_NEAR(chirp_prediction(p, 6000.0) / p.sigma_z, 9.7, 0.3);
  EXPECT_EQ(chirp_prediction(p, 0.0), p.sigma_z);
}
