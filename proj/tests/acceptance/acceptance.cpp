// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fail.
// Takes a few minutes on one core.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numbers>
#include <random>
#include <string>

#include <Eigen/Dense>

#include "kinkbeam/app/runner.hpp"

using namespace kinkbeam;
using namespace kinkbeam::app;
namespace fs = std::filesystem;

namespace {

constexpr double pi = std::numbers::pi;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

fs::path workdir() {
  const auto p = fs::temp_directory_path() / "kinkbeam_acceptance";
  fs::create_directories(p);
  return p;
}

TdseRunConfig run_config(const BeamConfig& beam, const PhaseProfile& profile, const Grid& g, std::size_t every) {
  TdseRunConfig c;
  c.beam = beam;
  c.profile = profile;
  c.grid = g;
  c.snapshot_every = every;
  c.keep_snapshots = false;
  return c;
}

// Criterion 3 result is reused by 6.
double free_growth = 0.0;

Outcome published_constants() {
  const auto d = derive_params(BeamConfig{});
  const auto r = classify_regime(d);
  const bool ok = rel(d.alpha1, 3.11e-7) < 0.01 && rel(d.alpha2, 1.92e-7) < 0.01 && rel(d.alpha0, 0.016) < 0.01 &&
                  rel(r.Q, 29.3) < 0.02 && rel(d.photon_energy, 6.2) < 0.005;
  return {ok, fmt("alpha1=%.4g alpha2=%.4g um alpha0=%.4g /um Q=%.4g photon=%.4g eV", d.alpha1, d.alpha2, d.alpha0,
                  r.Q, d.photon_energy)};
}

Outcome synchronization() {
  const auto d = derive_params(BeamConfig{});
  const double c = PhysicalConstants::c;
  const double vphase = c * d.grating_period / d.laser_wavelength;
  const double residual = std::abs(vphase - d.beta * c) / (d.beta * c);
  return {residual < 1e-3 && d.sync_residual < 1e-3, fmt("c*Lambda/lambda vs beta*c residual %.3g", residual)};
}

Outcome free_dispersion() {
  BeamConfig beam;
  beam.field_strength = 0.0;
  const auto d = derive_params(beam);
  const auto g = Grid::for_duration(d, -0.15, 0.15, 2000.0);
  auto cfg = run_config(beam, PhaseProfile::constant(0.0), g, g.n_steps / 200);
  cfg.observables.sideband_basis = SidebandBasis::Ladder;
  const auto p = GaussianChirpParams::from(d, 1.0);
  const auto traj = evolve(initial_gaussian(d, 1.0, 0.0, g), cfg, d);
  double worst = 0.0;
  for (std::size_t i = 0; i < traj.size(); ++i) worst = std::max(worst, rel(traj.rms_width[i], chirp_prediction(p, traj.times[i])));
  free_growth = traj.rms_width.back() / traj.rms_width.front();
  return {worst < 1e-3 && free_growth >= 3.0 && traj.times.back() >= 2000.0 - 1e-9,
          fmt("%zu snapshots over %.0f fs, max relative width error %.2e, growth %.2fx, xi=%.3g /fs", traj.size(),
              traj.times.back(), worst, free_growth, p.chirp_xi)};
}

Outcome unitarity() {
  std::mt19937 rng(20240611);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  BeamConfig beam;
  beam.field_strength = 1.0 + 20.0 * u(rng);
  const auto d = derive_params(beam);
  const double left = -0.05 - 0.05 * u(rng), right = 0.02 + 0.05 * u(rng);
  const auto profile = PhaseProfile::kink_pair(pi / 2, left, right, 0.001 + 0.003 * u(rng));
  const auto g = [&] {
    Grid x;
    x.zeta_min = -0.2;
    x.zeta_max = 0.2;
    x.n_points = 4000;
    x.tau_step = Grid::max_tau_step(d) * (0.5 + 0.5 * u(rng));
    x.n_steps = 10000;
    return x;
  }();
  auto cfg = run_config(beam, profile, g, 10000);
  cfg.frame = u(rng) < 0.5 ? Frame::CoMoving : Frame::CoMovingWithDrift;
  cfg.phase_sign = u(rng) < 0.5 ? PhaseSign::MinusTheta : PhaseSign::PlusTheta;
  const auto chi0 = initial_gaussian(d, 0.5 + u(rng), 0.05 * (u(rng) - 0.5), g,
                                     {.sideband_carrier = std::pair{cplx(u(rng), 0.0), cplx(0.0, u(rng))}});
  const auto traj = evolve(chi0, cfg, d);
  const double drift = std::abs(traj.norm.back() - traj.norm.front());
  return {drift < 1e-6, fmt("E0=%.3g V/um, %zu steps, norm drift %.2e", beam.field_strength, traj.steps.back(), drift)};
}

Outcome jackiw_rebbi_mode() {
  const auto d = derive_params(BeamConfig{});
  const auto dp = DiracParams::from(d);
  const double k = d.kappa_mag;
  const SpatialAxis axis{-0.4, 0.4, 2048};
  const auto mass = MassProfile::tanh_kink(k, 0.0, 0.001);
  const auto ev = dirac_spectrum(mass, dp, axis);
  std::size_t inside = 0;
  double lower_edge = -std::numeric_limits<double>::infinity(), upper_edge = std::numeric_limits<double>::infinity();
  for (double e : ev) {
    if (std::abs(e) < 1e-2 * k) ++inside;
    else if (e > 0) upper_edge = std::min(upper_edge, e);
    else lower_edge = std::max(lower_edge, e);
  }
  const auto modes = dirac_eigenmodes(mass, dp, axis, 1);
  const auto ref = zero_mode(mass, dp, axis);
  cplx s{};
  for (std::size_t i = 0; i < axis.n_points; ++i)
    s += std::conj(ref.upper[i]) * modes[0].field.upper[i] + std::conj(ref.lower[i]) * modes[0].field.lower[i];
  const double overlap = std::abs(s) * axis.spacing();
  const bool ok = inside == 1 && rel(upper_edge, k) < 0.05 && rel(-lower_edge, k) < 0.05 && overlap > 0.999;
  return {ok, fmt("%zu state(s) with |E|<0.01|kappa| (E=%.2e|kappa|), gap edges %+.4f/%+.4f |kappa|, overlap %.7f",
                  inside, modes[0].energy / k, lower_edge / k, upper_edge / k, overlap)};
}

Outcome flying_bound_state() {
  const auto d = derive_params(BeamConfig{});
  const auto g = Grid::for_duration(d, -0.5, 0.5, 2000.0);
  const auto profile = PhaseProfile::kink(pi / 2, 0.0, 0.001);
  const auto cfg = run_config(BeamConfig{}, profile, g, g.n_steps / 100);
  const auto traj = evolve(initial_jackiw_rebbi(d, profile, g), cfg, d);
  double worst = 0.0;
  for (double w : traj.rms_width) worst = std::max(worst, rel(w, traj.rms_width.front()));
  return {worst < 0.05 && traj.times.back() >= 2000.0 - 1e-9 && free_growth >= 3.0,
          fmt("width %.5f um, max change %.2f%% over %.0f fs (free control grew %.2fx)", traj.rms_width.front(),
              100 * worst, traj.times.back(), free_growth)};
}

Outcome splitting() {
  const auto d = derive_params(BeamConfig{});
  const auto g = Grid::for_duration(d, -0.5, 0.5, 2000.0);
  const auto profile = PhaseProfile::kink(pi / 2, 0.0, 0.001);
  const auto carrier = bound_state_carrier(d, profile, g.axis());
  const auto chi0 = initial_gaussian(d, 1.0, 0.8 * d.v0, g, {.sideband_carrier = carrier});
  Wavefunction last;
  auto cfg = run_config(BeamConfig{}, profile, g, g.n_steps);
  const auto traj = evolve(chi0, cfg, d, [&](std::size_t, double, const Wavefunction& w) { last = w; });
  const double f = traj.trapped_fraction.back();
  double outside = 0.0;
  for (std::size_t i = 0; i < last.size(); ++i)
    if (std::abs(g.zeta(i) - traj.trap_center) > traj.trap_halfwidth) outside += std::norm(last.amplitudes[i]);
  outside *= g.delta_zeta();
  return {f > 0.1 && f < 0.9 && outside > 0.0,
          fmt("trapped fraction %.3f in |zeta|<=%.4f um after %.0f fs, norm outside %.3f", f, traj.trap_halfwidth,
              traj.times.back(), outside)};
}

Outcome charges() {
  const auto kink = PhaseProfile::kink(pi / 2, 0.0, 0.001);
  const double q = topological_charge(kink, -0.5, 0.5);
  const double qq = topological_charge_quadrature(kink, -0.5, 0.5);
  const auto pair = PhaseProfile::kink_pair(pi / 2, -0.06, 0.06, 0.001);
  const double a = topological_charge(pair, -0.5, 0.0), b = topological_charge(pair, 0.0, 0.5);
  const double net = topological_charge(pair, -0.5, 0.5);
  const bool ok = q == -0.5 && std::abs(qq + 0.5) < 1e-6 && std::abs(a + 0.5) < 1e-12 && std::abs(b - 0.5) < 1e-12 &&
                  std::abs(net) < 1e-12;
  return {ok, fmt("kink %.17g (quadrature %.9f), pair windows %+.6f / %+.6f, net %.1e", q, qq, a, b, net)};
}

Outcome pair_hybridization() {
  auto cfg = load_config_json(json::parse(R"({"pair_generation": {"separations_fs": [3.3, 20]}})"));
  const auto m = pair_generation_command(cfg, workdir() / "pair");
  const auto& s = m["results"]["separations"];
  const double near = s[0]["splitting_over_kappa"].get<double>(), far = s[1]["splitting_over_kappa"].get<double>();
  const double contrast = s[1]["lobe_contrast"].is_null() ? std::nan("") : s[1]["lobe_contrast"].get<double>();
  return {near >= 10.0 * far && contrast < 0.1,
          fmt("splitting %.4f|kappa| at 3.3 fs vs %.4f|kappa| at 20 fs (ratio %.1f); 20 fs lobe contrast %.3f after "
              "%.0f fs",
              near, far, near / far, contrast, cfg.config.pair_generation.duration_fs)};
}

Outcome model_reduction() {
  const auto d = derive_params(BeamConfig{});
  const auto dp = DiracParams::from(d);
  const double period = pi * PhysicalConstants::hbar / d.kappa_mag;
  const auto profile = PhaseProfile::constant(0.0);
  const double sigma = 0.15;  // um
  auto g = Grid::for_duration(d, -0.8, 0.8, period);
  auto cfg = run_config(BeamConfig{}, profile, g, g.n_steps / 100);
  const auto chi0 = initial_gaussian(d, sigma / d.v0, 0.0, g, {.sideband_carrier = std::pair{cplx(1.0), cplx(0.0)}});
  const auto traj = evolve(chi0, cfg, d);

  const SpatialAxis axis{-0.8, 0.8, 1600};
  SpinorField psi(axis);
  for (std::size_t i = 0; i < axis.n_points; ++i) psi.upper[i] = std::exp(-std::pow(axis.at(i) / (2 * sigma), 2));
  psi.normalize();
  const auto mass = MassProfile::tdse_effective({d.kappa_mag, profile}, PhaseSign::MinusTheta, PotentialSign::Negative);
  const double dt = period / 4000;
  const auto two = two_level_evolve(psi, mass, dp, period, dt, {.periodic = true, .snapshot_every = 1});

  double worst = 0.0, swing = 0.0;
  for (std::size_t r = 0; r < traj.size(); ++r) {
    const auto& pops = traj.sideband_populations[r];
    const double total = pops.at(-1) + pops.at(1);
    const auto j = std::min(two.times.size() - 1, static_cast<std::size_t>(std::lround(traj.times[r] / dt)));
    worst = std::max(worst, std::abs(pops.at(-1) / total - two.upper_population[j]));
    swing = std::max(swing, 1.0 - pops.at(-1) / total);
  }
  return {worst < 0.05, fmt("period %.1f fs, %zu TDSE records, max |dP| %.4f (lower sideband peaked at %.3f)", period,
                            traj.size(), worst, swing)};
}

Outcome dense_oracle() {
  const auto d = derive_params(BeamConfig{});
  Grid g;
  g.zeta_min = -0.024;
  g.zeta_max = 0.024;
  g.n_points = 480;
  g.tau_step = Grid::max_tau_step(d);
  g.n_steps = 100;
  const auto cfg = run_config(BeamConfig{}, PhaseProfile::kink(pi / 2, 0.0, 0.002), g, 100);
  const auto chi0 = initial_gaussian(d, 0.5, 0.0, g, {.sideband_carrier = std::pair{cplx(0.6), cplx(0, 0.8)}});
  Wavefunction last;
  evolve(chi0, cfg, d, [&](std::size_t, double, const Wavefunction& w) { last = w; });

  const auto H = assemble_hamiltonian(cfg, d);
  Eigen::MatrixXcd m(480, 480);
  for (Eigen::Index i = 0; i < 480; ++i)
    for (Eigen::Index j = 0; j < 480; ++j) m(i, j) = H.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m);
  const double tau = g.tau_step * 100;
  Eigen::VectorXcd phase(480);
  for (Eigen::Index i = 0; i < 480; ++i) phase(i) = std::polar(1.0, -es.eigenvalues()(i) * tau);
  const Eigen::VectorXcd x0 = Eigen::Map<const Eigen::VectorXcd>(chi0.amplitudes.data(), 480);
  const Eigen::VectorXcd exact = es.eigenvectors() * phase.asDiagonal() * (es.eigenvectors().adjoint() * x0);
  const Eigen::VectorXcd got = Eigen::Map<const Eigen::VectorXcd>(last.amplitudes.data(), 480);
  const double diff = (got - exact).norm() * std::sqrt(g.delta_zeta());
  return {diff < 1e-6, fmt("N=480, 100 steps: ||CN - exp(-iH tau)|| = %.2e", diff)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"derived constants", published_constants},
      {"synchronization", synchronization},
      {"free dispersion", free_dispersion},
      {"unitarity", unitarity},
      {"Jackiw-Rebbi zero mode", jackiw_rebbi_mode},
      {"flying bound state", flying_bound_state},
      {"splitting", splitting},
      {"topological charge", charges},
      {"pair hybridization", pair_hybridization},
      {"model reduction", model_reduction},
      {"dense oracle", dense_oracle},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s %2zu %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str(),
                secs);
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
