#pragma once

// Measurements on wavefunctions: density, momentum spectrum, sideband weights,
// rms width, trapped fraction, and the free-space chirp law.

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <mutex>
#include <numbers>
#include <string>
#include <vector>

#include <fftw3.h>

#include "kinkbeam/errors.hpp"
#include "kinkbeam/params.hpp"
#include "kinkbeam/wavefunction.hpp"

namespace kinkbeam {

inline std::vector<double> density(const Wavefunction& psi) {
  std::vector<double> rho(psi.size());
  for (std::size_t i = 0; i < rho.size(); ++i) rho[i] = std::norm(psi.amplitudes[i]);
  return rho;
}

/// Density averaged over a sliding window (um), e.g. one grating period to
/// remove the sideband interference fringes. The window wraps periodically.
inline std::vector<double> coarse_density(const Wavefunction& psi, double window) {
  const auto rho = density(psi);
  const std::size_t n = rho.size();
  const auto w = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(window / psi.grid.delta_zeta())));
  if (w >= n) throw ValidationError("window", "wider than the grid");
  std::vector<double> out(n);
  const std::size_t half = w / 2;
  double acc = 0.0;
  for (std::size_t j = 0; j < w; ++j) acc += rho[(j + n - half) % n];
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = acc / static_cast<double>(w);
    acc += rho[(i + w - half) % n] - rho[(i + n - half) % n];
  }
  return out;
}

namespace detail {

inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

/// Unitary DFT (sign -1 forward, +1 inverse). FFTW planning is not thread-safe,
/// so planning and destruction are serialized; execution is not.
inline std::vector<cplx> unitary_dft(const std::vector<cplx>& in, int sign) {
  const auto n = static_cast<int>(in.size());
  std::vector<cplx> out(in.size());
  if (n == 0) return out;
  std::vector<cplx> buf(in);
  fftw_plan plan;
  {
    std::lock_guard lock(fftw_planner_mutex());
    plan = fftw_plan_dft_1d(n, reinterpret_cast<fftw_complex*>(buf.data()),
                            reinterpret_cast<fftw_complex*>(out.data()), sign, FFTW_ESTIMATE);
  }
  if (!plan) throw NumericalError("FFTW plan creation failed");
  fftw_execute(plan);
  {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }
  const double s = 1.0 / std::sqrt(static_cast<double>(n));
  for (auto& v : out) v *= s;
  return out;
}

}  // namespace detail

/// Momentum amplitudes on the ascending grid k_m = 2 pi m / (N dzeta),
/// m = -N/2 .. N/2-1, relative to the carrier k0. Unitary, so sum |a_m|^2 dzeta
/// equals the norm.
struct MomentumSpectrum {
  std::vector<double> k;        // um^-1
  std::vector<double> weights;  // sum = norm
  double dk = 0.0;
};

inline std::vector<double> momentum_axis(std::size_t n, double dzeta) {
  std::vector<double> k(n);
  const double dk = 2.0 * std::numbers::pi / (static_cast<double>(n) * dzeta);
  const auto half = static_cast<long long>(n / 2);
  for (std::size_t m = 0; m < n; ++m) k[m] = dk * static_cast<double>(static_cast<long long>(m) - half);
  return k;
}

/// Unitary transform of psi, reordered so entry m pairs with momentum_axis()[m].
inline std::vector<cplx> momentum_amplitudes(const Wavefunction& psi) {
  const std::size_t n = psi.size();
  auto raw = detail::unitary_dft(psi.amplitudes, FFTW_FORWARD);
  std::vector<cplx> out(n);
  const std::size_t half = n / 2;
  for (std::size_t m = 0; m < n; ++m) out[m] = raw[(m + n - half) % n];
  return out;
}

/// Inverse of momentum_amplitudes.
inline Wavefunction from_momentum_amplitudes(const Grid& grid, const std::vector<cplx>& amp) {
  const std::size_t n = grid.n_points;
  if (amp.size() != n) throw ValidationError("momentum", "size does not match grid");
  std::vector<cplx> raw(n);
  const std::size_t half = n / 2;
  for (std::size_t m = 0; m < n; ++m) raw[(m + n - half) % n] = amp[m];
  return Wavefunction(grid, detail::unitary_dft(raw, FFTW_BACKWARD));
}

inline MomentumSpectrum momentum_spectrum(const Wavefunction& psi) {
  MomentumSpectrum s;
  const std::size_t n = psi.size();
  const double dz = psi.grid.delta_zeta();
  s.k = momentum_axis(n, dz);
  s.dk = 2.0 * std::numbers::pi / (static_cast<double>(n) * dz);
  const auto amp = momentum_amplitudes(psi);
  s.weights.resize(n);
  for (std::size_t m = 0; m < n; ++m) s.weights[m] = std::norm(amp[m]) * dz;
  return s;
}

/// JackiwRebbi: windows centred on odd multiples of k_z/2, keyed by the odd
/// integer 2n+1 (twice the half-integer order). Ladder: windows centred on n k_z, keyed by n.
enum class SidebandBasis { JackiwRebbi, Ladder };

inline std::string_view to_string(SidebandBasis b) {
  return b == SidebandBasis::JackiwRebbi ? "jackiw_rebbi" : "ladder";
}

/// Weight in rectangular windows of full width `window` (default k_z) around
/// each sideband centre, for orders up to n_max.
inline std::map<int, double> sideband_populations(const MomentumSpectrum& s, const DerivedParams& d, int n_max,
                                                  SidebandBasis basis, double window = 0.0) {
  const double kz = d.k_z;
  if (window == 0.0) window = kz;
  if (n_max < 0) throw ValidationError("n_max", "must be >= 0");
  if (!(window > 0.0) || window > kz * (1.0 + 1e-12))
    throw ValidationError("window", "sideband windows must be positive and no wider than k_z (they would overlap)");
  if (!(s.dk < kz / 10.0)) throw ValidationError("spectrum", "momentum resolution must be finer than k_z/10");
  std::map<int, double> pops;
  std::vector<std::pair<int, double>> centres;
  if (basis == SidebandBasis::Ladder) {
    for (int n = -n_max; n <= n_max; ++n) centres.emplace_back(n, n * kz);
  } else {
    for (int j = -n_max - 1; j <= n_max; ++j) centres.emplace_back(2 * j + 1, (j + 0.5) * kz);
  }
  for (auto [key, c] : centres) pops[key] = 0.0;
  const double half = 0.5 * window;
  for (std::size_t m = 0; m < s.k.size(); ++m) {
    const double k = s.k[m];
    // nearest centre, then the half-open window test
    const double order = basis == SidebandBasis::Ladder ? std::floor(k / kz + 0.5) : std::floor(k / kz) ;
    const double c = basis == SidebandBasis::Ladder ? order * kz : (order + 0.5) * kz;
    if (!(k >= c - half && k < c + half)) continue;
    const int key = basis == SidebandBasis::Ladder ? static_cast<int>(order) : static_cast<int>(2 * order + 1);
    auto it = pops.find(key);
    if (it != pops.end()) it->second += s.weights[m];
  }
  return pops;
}

struct WidthResult {
  double width = 0.0;  // um
  double mean = 0.0;   // um
  bool reliable = true;
  double edge_ratio = 0.0;  // boundary density / peak density
};

inline constexpr double kEdgeDensityLimit = 1e-6;

/// Second central moment of |chi|^2. Flagged unreliable when the density at the
/// grid ends exceeds 1e-6 of the peak.
inline WidthResult rms_width(const Wavefunction& psi) {
  WidthResult r;
  const auto rho = density(psi);
  double w = 0.0, m1 = 0.0, peak = 0.0;
  for (std::size_t i = 0; i < rho.size(); ++i) {
    w += rho[i];
    m1 += rho[i] * psi.grid.zeta(i);
    peak = std::max(peak, rho[i]);
  }
  if (!(w > 0.0)) throw ValidationError("wavefunction", "zero density has no width");
  r.mean = m1 / w;
  double m2 = 0.0;
  for (std::size_t i = 0; i < rho.size(); ++i) {
    const double dz = psi.grid.zeta(i) - r.mean;
    m2 += rho[i] * dz * dz;
  }
  r.width = std::sqrt(m2 / w);
  r.edge_ratio = std::max(rho.front(), rho.back()) / peak;
  r.reliable = r.edge_ratio < kEdgeDensityLimit;
  return r;
}

/// Fraction of the norm with |zeta - centre| <= halfwidth.
inline double trapped_fraction(const Wavefunction& psi, double window_center, double window_halfwidth) {
  if (!(window_halfwidth > 0.0) || !std::isfinite(window_halfwidth))
    throw ValidationError("trap_halfwidth", "window must have positive width");
  const auto& g = psi.grid;
  const double lo = window_center - window_halfwidth, hi = window_center + window_halfwidth;
  if (lo < g.zeta_min || hi > g.zeta_max) throw ValidationError("trap_window", "window extends outside the grid");
  double in = 0.0, total = 0.0;
  for (std::size_t i = 0; i < psi.size(); ++i) {
    const double r = std::norm(psi.amplitudes[i]);
    total += r;
    const double z = g.zeta(i);
    if (z >= lo && z <= hi) in += r;
  }
  if (!(total > 0.0)) throw ValidationError("wavefunction", "zero density");
  return in / total;
}

struct GaussianChirpParams {
  double sigma_z = 0.0;         // um
  double chirp_xi = 0.0;        // fs^-1
  double effective_mass = 0.0;  // eV fs^2 / um^2

  static GaussianChirpParams from(const DerivedParams& d, double sigma_t_fs) {
    GaussianChirpParams p;
    p.sigma_z = d.v0 * sigma_t_fs;
    p.effective_mass = d.effective_mass();
    p.chirp_xi = PhysicalConstants::hbar / (2.0 * p.effective_mass * p.sigma_z * p.sigma_z);
    return p;
  }
};

inline double chirp_prediction(const GaussianChirpParams& p, double t_fs) {
  return p.sigma_z * std::sqrt(1.0 + p.chirp_xi * p.chirp_xi * t_fs * t_fs);
}

}  // namespace kinkbeam
