#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "kinkbeam/profiles.hpp"

using namespace kinkbeam;
constexpr double pi = std::numbers::pi;

TEST(Theta, KinkValues) {
  const auto p = PhaseProfile::kink(pi / 2, 0.0, 0.001, +1);
  EXPECT_EQ(p.theta(0.0), 0.0);
  EXPECT_NEAR(p.theta(0.1), pi / 2, 1e-10);
  EXPECT_NEAR(p.theta(-0.1), -pi / 2, 1e-10);
  const auto m = PhaseProfile::kink(pi / 2, 0.0, 0.001, -1);
  EXPECT_NEAR(m.theta(0.1), -pi / 2, 1e-10);
}

TEST(Theta, KinkPairPlateau) {
  const auto p = PhaseProfile::kink_pair(pi / 2, -0.06, 0.06, 0.001, PairOrientation::ZeroPiZero);
  EXPECT_NEAR(p.theta(0.0), pi, 1e-6);
  EXPECT_NEAR(p.theta(-0.3), 0.0, 1e-10);
  EXPECT_NEAR(p.theta(0.3), 0.0, 1e-10);
  const auto q = PhaseProfile::kink_pair(pi / 2, -0.06, 0.06, 0.001, PairOrientation::PiZeroPi);
  EXPECT_NEAR(q.theta(0.0), 0.0, 1e-6);
  EXPECT_NEAR(q.theta(-0.3), pi, 1e-10);
}

TEST(Theta, CoincidentPairIsConstant) {
  for (double xi = -0.01; xi <= 0.01; xi += 1e-4)
    EXPECT_NEAR(kink_pair_theta(pi / 2, 0.002, 0.002, 0.001, PairOrientation::ZeroPiZero, xi), 0.0, 1e-12);
}

TEST(Theta, DerivativeMatchesFiniteDifference) {
  const auto p = PhaseProfile::kink_pair(pi / 2, -0.01, 0.02, 0.003);
  const double h = 1e-7;
  for (double xi = -0.03; xi <= 0.04; xi += 0.0013)
    EXPECT_NEAR(p.dtheta(xi), (p.theta(xi + h) - p.theta(xi - h)) / (2 * h), 1e-5 * 1000);
}

TEST(Factories, RejectInvalid) {
  EXPECT_THROW(PhaseProfile::kink(pi / 2, 0, 0.0), ValidationError);
  EXPECT_THROW(PhaseProfile::kink(pi / 2, 0, -1e-3), ValidationError);
  EXPECT_THROW(PhaseProfile::kink(pi / 2, 0, 1e-3, 2), ValidationError);
  EXPECT_THROW(PhaseProfile::kink_pair(pi / 2, 0.1, 0.1, 1e-3), ValidationError);
  EXPECT_THROW(PhaseProfile::kink_pair(pi / 2, 0.1, -0.1, 1e-3), ValidationError);
  EXPECT_THROW(PhaseProfile::tabulated({0.0}, {1.0}), ValidationError);
  EXPECT_THROW(PhaseProfile::tabulated({0.0, 0.0}, {1.0, 2.0}), ValidationError);
  EXPECT_THROW(PhaseProfile::tabulated({0.0, 1.0}, {1.0}), ValidationError);
  EXPECT_THROW(PhaseProfile::constant(std::nan("")), ValidationError);
}

TEST(Charge, SingleKink) {
  const auto p = PhaseProfile::kink(pi / 2, 0.0, 0.001, +1);
  EXPECT_EQ(topological_charge(p, -0.5, 0.5), -0.5);
  EXPECT_NEAR(topological_charge_quadrature(p, -0.5, 0.5), -0.5, 1e-6);
}

TEST(Charge, ConstantHasNone) {
  const auto p = PhaseProfile::constant(1.3);
  EXPECT_EQ(topological_charge(p, -0.5, 0.5), 0.0);
  EXPECT_NEAR(topological_charge_quadrature(p, -0.5, 0.5), 0.0, 1e-15);
}

TEST(Charge, PairWindows) {
  const auto p = PhaseProfile::kink_pair(pi / 2, -0.06, 0.06, 0.001);
  EXPECT_NEAR(topological_charge(p, -0.5, 0.5), 0.0, 1e-15);
  EXPECT_NEAR(topological_charge(p, -0.5, 0.0), -0.5, 1e-12);
  EXPECT_NEAR(topological_charge(p, 0.0, 0.5), 0.5, 1e-12);
  EXPECT_NEAR(topological_charge_quadrature(p, -0.5, 0.0), -0.5, 1e-6);
  EXPECT_NEAR(topological_charge_quadrature(p, 0.0, 0.5), 0.5, 1e-6);
}

TEST(Charge, EmptyRangeRejected) {
  const auto p = PhaseProfile::kink(pi / 2, 0.0, 0.001);
  EXPECT_THROW(topological_charge(p, 0.1, 0.1), ValidationError);
  EXPECT_THROW(topological_charge_quadrature(p, 0.2, 0.1), ValidationError);
}

TEST(Charge, Additivity) {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  const auto p = PhaseProfile::kink_pair(pi / 2, -0.05, 0.07, 0.002);
  for (int i = 0; i < 20; ++i) {
    double a = u(rng), b = u(rng);
    if (a > b) std::swap(a, b);
    const double whole = topological_charge_quadrature(p, -0.5, 0.5);
    const double parts = topological_charge_quadrature(p, -0.5, a) + topological_charge_quadrature(p, a, b) +
                         topological_charge_quadrature(p, b, 0.5);
    EXPECT_NEAR(whole, parts, 1e-6);
  }
}

TEST(Charge, InvariantUnderInteriorReparameterization) {
  // Tabulated kink, then the same endpoints with a randomly warped interior.
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> jitter(-0.3, 0.3);
  std::vector<double> z, t0, t1;
  const int n = 401;
  for (int i = 0; i < n; ++i) {
    const double x = -0.2 + 0.4 * i / (n - 1);
    z.push_back(x);
    t0.push_back(pi / 2 * std::tanh(x / 0.01));
    t1.push_back(i == 0 || i == n - 1 ? t0.back() : t0.back() + jitter(rng));
  }
  const auto a = PhaseProfile::tabulated(z, t0);
  const auto b = PhaseProfile::tabulated(z, t1);
  EXPECT_NEAR(topological_charge_quadrature(a, -0.2, 0.2), topological_charge_quadrature(b, -0.2, 0.2), 1e-12);
  EXPECT_NEAR(topological_charge_quadrature(b, -0.2, 0.2), topological_charge(b, -0.2, 0.2), 1e-12);
}

TEST(Coupling, KappaAsymptotics) {
  const CouplingProfile flat{1.0, PhaseProfile::constant(0.0)};
  EXPECT_EQ(kappa_at(flat, 0.3), std::complex<double>(1.0, 0.0));
  const CouplingProfile k{2.0, PhaseProfile::kink(pi / 2, 0.0, 0.001)};
  const auto left = kappa_at(k, -1.0), right = kappa_at(k, 1.0);
  EXPECT_NEAR(std::abs(left - std::polar(2.0, pi / 2)), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(right - std::polar(2.0, -pi / 2)), 0.0, 1e-12);
  // cos(theta - theta_left) runs +1 -> -1: the real-mass sign flip
  EXPECT_NEAR(std::cos(k.phase.theta(1.0) - k.phase.left_asymptote()), -1.0, 1e-12);
}

TEST(Coupling, DefaultKappaMagnitude) {
  const auto d = derive_params(BeamConfig{});
  EXPECT_NEAR(d.kappa_mag, 1.59e-3, 0.02 * 1.59e-3);
}

TEST(Separation, FlightTime) {
  const auto d = derive_params(BeamConfig{});
  EXPECT_NEAR(flight_time_to_length(3.3, d), 0.0198, 1e-4);
}

TEST(Tabulated, CsvRoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "kinkbeam_profile_test.csv";
  {
    std::ofstream out(path);
    out << "# a comment\nzeta,theta\n-0.1,0\n0,0.5\n0.1,1.0\n";
  }
  const auto p = load_tabulated_csv(path.string());
  EXPECT_NEAR(p.theta(0.05), 0.75, 1e-14);
  EXPECT_NEAR(topological_charge(p, -0.2, 0.2), -1.0 / (2 * pi), 1e-14);
  {
    std::ofstream out(path);
    out << "zeta,theta\n-0.1,0\nfoo,1\n";
  }
  EXPECT_THROW(load_tabulated_csv(path.string()), ValidationError);
  std::filesystem::remove(path);
}
