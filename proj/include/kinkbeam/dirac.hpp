#pragma once

// Reduced two-sideband Dirac model
//   H = -v sigma_z p - M(xi) [+ eps p^2],  M = [[0, K], [conj K, 0]],
// with v = hbar^2 q / 2m*, eps = hbar^2 / 2m*, p = -i d/dxi, and the complex
// mass K(xi) (for the twisted field K = |kappa| e^{-i theta}).
//
// Spectra and two-level dynamics default to a staggered chain: in the sigma_y
// eigenbasis e_A = (1, i)/sqrt2, e_B = (1, -i)/sqrt2 the operator reads
//   [[ Im K, i(v d + Re K) ], [ i(v d - Re K), -Im K ]],
// and putting c_A and c_B on alternating grid points gives a nearest-neighbour
// chain with no doublers and exact chiral zero modes.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "kinkbeam/errors.hpp"
#include "kinkbeam/grid.hpp"
#include "kinkbeam/params.hpp"
#include "kinkbeam/profiles.hpp"
#include "kinkbeam/tridiagonal.hpp"

namespace kinkbeam {

struct DiracParams {
  double q = 0;                    // um^-1
  double mass = 0;                 // m* = gamma^3 m, eV fs^2 / um^2
  double velocity_coeff = 0;       // hbar^2 q / 2m*, eV um
  double kappa_mag = 0;            // eV
  double localization_length = 0;  // velocity_coeff / |kappa|, um

  /// hbar^2 / 2m*, eV um^2.
  double quadratic_coeff() const { return velocity_coeff / q; }

  static DiracParams from(const DerivedParams& d) {
    DiracParams p;
    p.q = d.k_z;
    p.mass = d.effective_mass();
    const double hbar = PhysicalConstants::hbar;
    p.velocity_coeff = hbar * hbar * p.q / (2.0 * p.mass);
    p.kappa_mag = d.kappa_mag;
    p.localization_length = d.kappa_mag > 0.0 ? p.velocity_coeff / d.kappa_mag
                                               : std::numeric_limits<double>::infinity();
    return p;
  }
};

/// Two-component field on a uniform axis; upper/lower are the amplitudes of the
/// sidebands at -q/2 and +q/2.
struct SpinorField {
  SpatialAxis grid;
  std::vector<cplx> upper;
  std::vector<cplx> lower;

  SpinorField() = default;
  explicit SpinorField(SpatialAxis g) : grid(g), upper(g.n_points), lower(g.n_points) {}

  double norm_squared() const {
    double s = 0.0;
    for (std::size_t i = 0; i < upper.size(); ++i) s += std::norm(upper[i]) + std::norm(lower[i]);
    return s * grid.spacing();
  }
  double norm() const { return std::sqrt(norm_squared()); }

  void normalize() {
    const double n = norm();
    if (!(n > 0.0) || !std::isfinite(n)) throw NumericalError("cannot normalize a zero or non-finite spinor");
    for (auto& v : upper) v /= n;
    for (auto& v : lower) v /= n;
  }

  /// (upper, lower) norm fractions.
  std::pair<double, double> populations() const {
    double a = 0.0, b = 0.0;
    for (std::size_t i = 0; i < upper.size(); ++i) {
      a += std::norm(upper[i]);
      b += std::norm(lower[i]);
    }
    const double t = a + b;
    return t > 0.0 ? std::pair{a / t, b / t} : std::pair{0.0, 0.0};
  }

  void check_consistent() const {
    if (upper.size() != grid.n_points || lower.size() != grid.n_points)
      throw ValidationError("spinor", "component lengths do not match the grid");
  }
};

/// Complex Dirac mass K(xi) in eV.
class MassProfile {
public:
  using Fn = std::function<cplx(double)>;

  MassProfile(Fn f, std::string label) : f_(std::move(f)), label_(std::move(label)) {}

  cplx operator()(double xi) const { return f_(xi); }
  const std::string& label() const noexcept { return label_; }

  std::vector<cplx> sample(const SpatialAxis& axis) const {
    std::vector<cplx> k(axis.n_points);
    for (std::size_t i = 0; i < k.size(); ++i) k[i] = f_(axis.at(i));
    return k;
  }

  static MassProfile constant(cplx k) {
    return {[k](double) { return k; }, "constant"};
  }

  /// K = |kappa| e^{-i theta(xi)}.
  static MassProfile from_coupling(const CouplingProfile& c) {
    return {[c](double xi) { return kappa_at(c, xi); }, "twisted"};
  }

  /// Real kink -orientation*|kappa| tanh((xi - center)/width); orientation +1 runs +|kappa| -> -|kappa|.
  static MassProfile tanh_kink(double kappa, double center, double width, int orientation = +1) {
    if (!(width > 0.0)) throw ValidationError("width", "must be > 0");
    return {[=](double xi) { return cplx(-orientation * kappa * std::tanh((xi - center) / width), 0.0); },
            "tanh_kink"};
  }

  /// Sharp sign flip at `center`.
  static MassProfile step(double kappa, double center, int orientation = +1) {
    return {[=](double xi) { return cplx(xi < center ? orientation * kappa : -orientation * kappa, 0.0); },
            "step"};
  }

  /// Keep only the component of K in phase with K(reference): in the gauge where
  /// K(reference) is real positive, drop Im K. The result stays in the original frame.
  static MassProfile real_projection(const MassProfile& m, double reference_xi) {
    const cplx ref = m(reference_xi);
    const cplx g = std::abs(ref) > 0.0 ? std::conj(ref) / std::abs(ref) : cplx(1.0);
    return {[m, g](double xi) { return (m(xi) * g).real() * std::conj(g); }, "real_projection"};
  }

  /// real_projection of the twisted coupling, referenced to theta at -infinity.
  static MassProfile real_projection(const CouplingProfile& c) {
    const double theta_left = c.phase.left_asymptote();
    return {[c, theta_left](double xi) {
              return std::polar(c.kappa_mag * std::cos(c.phase.theta(xi) - theta_left), -theta_left);
            },
            "real_projection"};
  }

  /// Effective mass seen by the two sidebands -k_z/2, +k_z/2 of the full TDSE
  /// Hamiltonian with the given sign conventions: K = i|kappa| e^{-i(s theta + phi0)},
  /// s = -1 for MinusTheta, +1 for PlusTheta, phi0 = 0 (Negative) or pi (Positive).
  static MassProfile tdse_effective(const CouplingProfile& c, PhaseSign phase, PotentialSign potential) {
    const double s = phase == PhaseSign::MinusTheta ? -1.0 : 1.0;
    const double phi0 = potential == PotentialSign::Negative ? 0.0 : std::numbers::pi;
    return {[c, s, phi0](double xi) {
              return cplx(0.0, 1.0) * std::polar(c.kappa_mag, -(s * c.phase.theta(xi) + phi0));
            },
            "tdse_effective"};
  }

private:
  Fn f_;
  std::string label_;
};

/// E+- = +-sqrt((v dk)^2 + |kappa|^2).
inline std::pair<double, double> dirac_dispersion(double dk, const DiracParams& d) {
  const double e = std::hypot(d.velocity_coeff * dk, d.kappa_mag);
  return {e, -e};
}

/// 2x2 symbol of H at wavevector dk for a constant mass K.
inline Eigen::Matrix2cd dirac_symbol(double dk, cplx k, const DiracParams& d, bool quadratic = false) {
  Eigen::Matrix2cd h;
  const double kin = -d.velocity_coeff * dk;
  const double q2 = quadratic ? d.quadratic_coeff() * dk * dk : 0.0;
  h << kin + q2, -k, -std::conj(k), -kin + q2;
  return h;
}

namespace detail {

/// Phase that rotates K(left end) onto the positive real axis.
inline double left_gauge_phase(const std::vector<cplx>& k) {
  if (k.empty() || std::abs(k.front()) == 0.0) return 0.0;
  return -std::arg(k.front());
}

/// Running integral of m (trapezoid with the Euler-Maclaurin end correction,
/// fourth order for smooth m).
inline std::vector<double> cumulative_integral(const std::vector<double>& m, double h) {
  const std::size_t n = m.size();
  std::vector<double> out(n, 0.0);
  if (n < 2) return out;
  std::vector<double> dm(n);
  if (n >= 3) {
    dm[0] = (-3.0 * m[0] + 4.0 * m[1] - m[2]) / (2.0 * h);
    dm[n - 1] = (3.0 * m[n - 1] - 4.0 * m[n - 2] + m[n - 3]) / (2.0 * h);
    for (std::size_t i = 1; i + 1 < n; ++i) dm[i] = (m[i + 1] - m[i - 1]) / (2.0 * h);
  } else {
    dm[0] = dm[1] = (m[1] - m[0]) / h;
  }
  double acc = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    acc += 0.5 * h * (m[i - 1] + m[i]);
    out[i] = acc - h * h / 12.0 * (dm[i] - dm[0]);
  }
  return out;
}

struct GaugedMass {
  double phase = 0.0;             // K~ = K e^{i phase}
  std::vector<double> real_part;  // Re K~
  std::vector<double> imag_part;  // Im K~
};

inline GaugedMass gauge_mass(const MassProfile& mass, const SpatialAxis& axis) {
  const auto k = mass.sample(axis);
  GaugedMass g;
  g.phase = left_gauge_phase(k);
  const cplx rot = std::polar(1.0, g.phase);
  g.real_part.resize(k.size());
  g.imag_part.resize(k.size());
  for (std::size_t i = 0; i < k.size(); ++i) {
    const cplx r = k[i] * rot;
    g.real_part[i] = r.real();
    g.imag_part[i] = r.imag();
  }
  return g;
}

}  // namespace detail

/// Normalizable zero mode of D = -i v sigma_z d + M. In the gauge where K is real
/// positive at the left end the mode is (1, i) exp((1/v) int Re K) / sqrt2; the
/// running integral is anchored at its maximum, i.e. the kink center. Exact for
/// masses with a fixed phase, the gauge-real part otherwise.
inline SpinorField zero_mode(const MassProfile& mass, const DiracParams& d, const SpatialAxis& axis) {
  axis.validate();
  if (axis.n_points < 3) throw ValidationError("grid.n_points", "zero_mode needs at least 3 points");
  if (!(d.velocity_coeff > 0.0)) throw ValidationError("velocity_coeff", "must be > 0");
  const auto g = detail::gauge_mass(mass, axis);
  const double scale = std::max(std::abs(g.real_part.front()), std::abs(g.real_part.back()));
  if (!(scale > 0.0) || !(g.real_part.back() < -1e-12 * scale) || !(g.real_part.front() > 0.0))
    throw ValidationError("profile", "no normalizable zero mode (mass does not change sign across the grid)");
  const auto integral = detail::cumulative_integral(g.real_part, axis.spacing());
  const double peak = *std::max_element(integral.begin(), integral.end());
  SpinorField psi(axis);
  const cplx lower_dir = cplx(0.0, 1.0) * std::polar(1.0, -g.phase);
  for (std::size_t i = 0; i < axis.n_points; ++i) {
    const double f = std::exp((integral[i] - peak) / d.velocity_coeff) / std::numbers::sqrt2;
    psi.upper[i] = f;
    psi.lower[i] = f * lower_dir;
  }
  psi.normalize();
  return psi;
}

inline SpinorField zero_mode(const CouplingProfile& c, const DiracParams& d, const SpatialAxis& axis) {
  return zero_mode(MassProfile::from_coupling(c), d, axis);
}

/// int |f|^2 for the chirality branch f = exp(chirality/v int Re K~), scaled to 1
/// at the kink center. chirality +1 is the kept branch for a +/- kink; -1 is the
/// discarded one, whose norm grows with the grid extent.
inline double branch_norm(const MassProfile& mass, const DiracParams& d, const SpatialAxis& axis,
                          int chirality, double kink_center) {
  const auto g = detail::gauge_mass(mass, axis);
  auto integral = detail::cumulative_integral(g.real_part, axis.spacing());
  const double h = axis.spacing();
  const auto j = static_cast<std::size_t>(std::clamp((kink_center - axis.zeta_min) / h, 0.0,
                                                     static_cast<double>(axis.n_points - 1)));
  const double anchor = integral[j];
  double s = 0.0;
  for (double v : integral) s += std::exp(2.0 * chirality * (v - anchor) / d.velocity_coeff);
  return s * h;
}

/// ||D psi|| / (|kappa| ||psi||) with D = -i v sigma_z d + M, central differences
/// on interior points.
inline double dirac_residual(const SpinorField& psi, const MassProfile& mass, const DiracParams& d) {
  psi.check_consistent();
  const std::size_t n = psi.grid.n_points;
  if (n < 3) throw ValidationError("grid.n_points", "residual needs at least 3 points");
  if (!(d.kappa_mag > 0.0)) throw ValidationError("kappa_mag", "residual is scaled by |kappa|, which is 0");
  const double h = psi.grid.spacing();
  const double nrm = psi.norm();
  if (!(nrm > 0.0)) throw ValidationError("spinor", "zero vector has no defined residual");
  const cplx iv{0.0, d.velocity_coeff / (2.0 * h)};
  double acc = 0.0;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const cplx k = mass(psi.grid.at(i));
    const cplx du = psi.upper[i + 1] - psi.upper[i - 1];
    const cplx dl = psi.lower[i + 1] - psi.lower[i - 1];
    const cplx ru = -iv * du + k * psi.lower[i];
    const cplx rl = iv * dl + std::conj(k) * psi.upper[i];
    acc += std::norm(ru) + std::norm(rl);
  }
  return std::sqrt(acc * h) / (d.kappa_mag * nrm);
}

enum class SpectrumMethod { Staggered, CentralDifference };
enum class SpectrumBoundary { Box, Periodic };

struct SpectrumOptions {
  SpectrumMethod method = SpectrumMethod::Staggered;
  SpectrumBoundary boundary = SpectrumBoundary::Box;
  bool quadratic_term = false;  // central differences only
};

/// Staggered chain for a mass profile. Site s sits on grid point s and carries
/// c_A (type +1) or c_B (type -1). Box chains start on the type matching the sign
/// of the left mass and end on the type matching the right mass, dropping the
/// last grid point if needed, so hard walls host no spurious edge modes.
struct StaggeredChain {
  SpatialAxis grid;
  std::vector<int> type;
  TridiagonalOperator hamiltonian;  // eV
  double gauge_phase = 0.0;

  std::size_t size() const noexcept { return type.size(); }
};

inline StaggeredChain build_staggered_chain(const MassProfile& mass, const DiracParams& d,
                                            const SpatialAxis& axis, bool periodic) {
  axis.validate();
  const std::size_t n_grid = axis.n_points;
  if (n_grid < 4) throw ValidationError("grid.n_points", "staggered chain needs at least 4 points");
  const auto g = detail::gauge_mass(mass, axis);
  const int start = g.real_part.front() >= 0.0 ? +1 : -1;
  std::size_t n = n_grid;
  if (periodic) {
    if (n_grid % 2 != 0) throw ValidationError("grid.n_points", "periodic staggered chain needs an even count");
  } else {
    const int end = g.real_part.back() > 0.0 ? -1 : +1;
    const int last = (n_grid % 2 == 1) ? start : -start;
    if (last != end) --n;
  }

  StaggeredChain chain;
  chain.grid = axis;
  chain.gauge_phase = g.phase;
  chain.type.resize(n);
  for (std::size_t s = 0; s < n; ++s) chain.type[s] = (s % 2 == 0) ? start : -start;

  const double hop = d.velocity_coeff / (2.0 * axis.spacing());
  chain.hamiltonian = TridiagonalOperator(n, periodic);
  auto& h = chain.hamiltonian;
  for (std::size_t s = 0; s < n; ++s) h.diag[s] = chain.type[s] * g.imag_part[s];
  const std::size_t bonds = periodic ? n : n - 1;
  for (std::size_t s = 0; s < bonds; ++s) {
    const std::size_t t = (s + 1) % n;
    cplx up;  // H(s, t)
    if (chain.type[s] == +1) {
      // A at s, B to its right
      up = cplx(0.0, hop + 0.5 * g.real_part[s]);
    } else {
      // B at s, A at t sees it on its left: H(t, s) = i(-v/a + m_t/2)
      up = std::conj(cplx(0.0, -hop + 0.5 * g.real_part[t]));
    }
    h.upper[s] = up;
    h.lower[s] = std::conj(up);
  }
  return chain;
}

namespace detail {

/// Phases p with H = P T P^dagger, T real symmetric tridiagonal with |off-diagonals|.
inline std::vector<cplx> chain_phases(const TridiagonalOperator& h) {
  const std::size_t n = h.size();
  std::vector<cplx> p(n, cplx(1.0));
  for (std::size_t s = 0; s + 1 < n; ++s) {
    const cplx t = h.upper[s];
    const double a = std::abs(t);
    const cplx phase = a > 0.0 ? t / a : cplx(1.0);
    p[s + 1] = p[s] * std::conj(phase);
  }
  return p;
}

inline Eigen::VectorXd tridiagonal_eigenvalues(const std::vector<double>& diag, const std::vector<double>& off) {
  const auto n = static_cast<Eigen::Index>(diag.size());
  Eigen::VectorXd dv = Eigen::Map<const Eigen::VectorXd>(diag.data(), n);
  Eigen::VectorXd ov = n > 1 ? Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(off.data(), n - 1))
                             : Eigen::VectorXd(0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(dv, ov, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericalError("tridiagonal eigen-solve did not converge");
  return solver.eigenvalues();
}

inline Eigen::MatrixXcd dense(const TridiagonalOperator& h) {
  const auto n = static_cast<Eigen::Index>(h.size());
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = std::max<Eigen::Index>(0, i - 1); j <= std::min(n - 1, i + 1); ++j)
      m(i, j) = h.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
  if (h.periodic) {
    m(n - 1, 0) = h.upper[h.size() - 1];
    m(0, n - 1) = h.lower[h.size() - 1];
  }
  return m;
}

inline Eigen::MatrixXcd central_difference_matrix(const MassProfile& mass, const DiracParams& d,
                                                  const SpatialAxis& axis, bool periodic, bool quadratic) {
  const auto n = static_cast<Eigen::Index>(axis.n_points);
  const double h = axis.spacing();
  const auto k = mass.sample(axis);
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(2 * n, 2 * n);
  const cplx drift{0.0, d.velocity_coeff / (2.0 * h)};  // i v d  ->  +-i v/(2h)
  const double eps = quadratic ? d.quadratic_coeff() / (h * h) : 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto u = i, l = n + i;
    m(u, l) = -k[static_cast<std::size_t>(i)];
    m(l, u) = -std::conj(k[static_cast<std::size_t>(i)]);
    m(u, u) += 2.0 * eps;
    m(l, l) += 2.0 * eps;
    Eigen::Index j = i + 1;
    if (j == n) {
      if (!periodic) continue;
      j = 0;
    }
    m(u, j) += drift - eps;
    m(j, u) += -drift - eps;
    m(l, n + j) += -drift - eps;
    m(n + j, l) += drift - eps;
  }
  return m;
}

}  // namespace detail

/// Sorted eigenvalues (eV) of the discretized H.
inline std::vector<double> dirac_spectrum(const MassProfile& mass, const DiracParams& d,
                                          const SpatialAxis& axis, const SpectrumOptions& opt = {}) {
  axis.validate();
  if (axis.n_points < 16) throw ValidationError("grid.n_points", "spectrum needs N >= 16");
  Eigen::VectorXd ev;
  const bool periodic = opt.boundary == SpectrumBoundary::Periodic;
  if (opt.method == SpectrumMethod::Staggered) {
    if (opt.quadratic_term)
      throw ValidationError("quadratic_term", "only available with central differences");
    const auto chain = build_staggered_chain(mass, d, axis, periodic);
    if (periodic) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(detail::dense(chain.hamiltonian),
                                                              Eigen::EigenvaluesOnly);
      if (solver.info() != Eigen::Success) throw NumericalError("eigen-solve did not converge");
      ev = solver.eigenvalues();
    } else {
      const auto& h = chain.hamiltonian;
      std::vector<double> diag(h.size()), off(h.size() > 0 ? h.size() - 1 : 0);
      for (std::size_t s = 0; s < h.size(); ++s) diag[s] = h.diag[s].real();
      for (std::size_t s = 0; s + 1 < h.size(); ++s) off[s] = std::abs(h.upper[s]);
      ev = detail::tridiagonal_eigenvalues(diag, off);
    }
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(
        detail::central_difference_matrix(mass, d, axis, periodic, opt.quadratic_term), Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw NumericalError("eigen-solve did not converge");
    ev = solver.eigenvalues();
  }
  std::vector<double> out(ev.data(), ev.data() + ev.size());
  std::sort(out.begin(), out.end());
  return out;
}

inline std::vector<double> dirac_spectrum(const CouplingProfile& c, const DiracParams& d,
                                          const SpatialAxis& axis, const SpectrumOptions& opt = {}) {
  return dirac_spectrum(MassProfile::from_coupling(c), d, axis, opt);
}

/// Chain amplitudes (one per site) to a spinor on every grid point; the missing
/// component at each site is the mean of its neighbours.
inline SpinorField chain_to_spinor(const StaggeredChain& chain, const std::vector<cplx>& amp) {
  const std::size_t n = chain.grid.n_points;
  std::vector<cplx> ca(n), cb(n);
  std::vector<char> has_a(n, 0), has_b(n, 0);
  for (std::size_t s = 0; s < chain.size(); ++s) {
    if (chain.type[s] == +1) {
      ca[s] = amp[s];
      has_a[s] = 1;
    } else {
      cb[s] = amp[s];
      has_b[s] = 1;
    }
  }
  auto fill = [n](std::vector<cplx>& c, const std::vector<char>& has) {
    for (std::size_t i = 0; i < n; ++i) {
      if (has[i]) continue;
      cplx sum{};
      int cnt = 0;
      if (i > 0 && has[i - 1]) sum += c[i - 1], ++cnt;
      if (i + 1 < n && has[i + 1]) sum += c[i + 1], ++cnt;
      c[i] = cnt ? sum / static_cast<double>(cnt) : cplx{};
    }
  };
  fill(ca, has_a);
  fill(cb, has_b);
  SpinorField psi(chain.grid);
  const cplx ul = std::polar(1.0, -0.5 * chain.gauge_phase);
  const cplx ll = std::polar(1.0, 0.5 * chain.gauge_phase);
  const double r = 1.0 / std::numbers::sqrt2;
  for (std::size_t i = 0; i < n; ++i) {
    psi.upper[i] = ul * r * (ca[i] + cb[i]);
    psi.lower[i] = ll * cplx(0.0, r) * (ca[i] - cb[i]);
  }
  return psi;
}

/// Inverse of chain_to_spinor: sample c_A on A sites and c_B on B sites.
inline std::vector<cplx> spinor_to_chain(const StaggeredChain& chain, const SpinorField& psi) {
  psi.check_consistent();
  if (!(psi.grid == chain.grid)) throw ValidationError("spinor", "grid does not match the chain");
  const cplx ru = std::polar(1.0, 0.5 * chain.gauge_phase);
  const cplx rl = std::polar(1.0, -0.5 * chain.gauge_phase);
  const double r = 1.0 / std::numbers::sqrt2;
  std::vector<cplx> amp(chain.size());
  for (std::size_t s = 0; s < chain.size(); ++s) {
    const cplx p1 = ru * psi.upper[s], p2 = rl * psi.lower[s];
    amp[s] = chain.type[s] == +1 ? r * (p1 - cplx(0.0, 1.0) * p2) : r * (p1 + cplx(0.0, 1.0) * p2);
  }
  return amp;
}

struct DiracMode {
  double energy = 0.0;  // eV
  SpinorField field;    // unit norm
};

/// The `count` eigenpairs closest to `target` (eV) on the staggered box chain,
/// eigenvectors by inverse iteration. Ordered by energy.
inline std::vector<DiracMode> dirac_eigenmodes(const MassProfile& mass, const DiracParams& d,
                                               const SpatialAxis& axis, std::size_t count,
                                               double target = 0.0) {
  axis.validate();
  if (axis.n_points < 16) throw ValidationError("grid.n_points", "spectrum needs N >= 16");
  const auto chain = build_staggered_chain(mass, d, axis, false);
  const auto& h = chain.hamiltonian;
  const std::size_t n = h.size();
  std::vector<double> diag(n), off(n - 1);
  for (std::size_t s = 0; s < n; ++s) diag[s] = h.diag[s].real();
  for (std::size_t s = 0; s + 1 < n; ++s) off[s] = std::abs(h.upper[s]);
  const auto ev = detail::tridiagonal_eigenvalues(diag, off);
  std::vector<double> values(ev.data(), ev.data() + ev.size());
  std::sort(values.begin(), values.end(),
            [target](double a, double b) { return std::abs(a - target) < std::abs(b - target); });
  values.resize(std::min(count, values.size()));
  std::sort(values.begin(), values.end());

  const auto phases = detail::chain_phases(h);
  std::vector<cplx> dc(n), uc(n), lc(n);
  for (std::size_t s = 0; s < n; ++s) dc[s] = diag[s];
  for (std::size_t s = 0; s + 1 < n; ++s) uc[s] = lc[s] = off[s];
  double scale = 0.0;
  for (std::size_t s = 0; s < n; ++s) scale = std::max({scale, std::abs(diag[s]), s + 1 < n ? off[s] : 0.0});

  std::vector<std::vector<cplx>> found;
  std::vector<DiracMode> modes;
  for (double lambda : values) {
    std::vector<cplx> x(n);
    for (std::size_t s = 0; s < n; ++s) x[s] = 1.0 + 0.01 * std::sin(0.7 * static_cast<double>(s));
    const cplx shift = lambda + 1e-12 * scale;
    for (int it = 0; it < 4; ++it) {
      x = solve_tridiagonal_pivoted(dc, uc, lc, shift, std::move(x));
      for (const auto& y : found) {  // keep clustered eigenvectors orthogonal
        cplx dot{};
        for (std::size_t s = 0; s < n; ++s) dot += std::conj(y[s]) * x[s];
        for (std::size_t s = 0; s < n; ++s) x[s] -= dot * y[s];
      }
      double nn = 0.0;
      for (auto v : x) nn += std::norm(v);
      nn = std::sqrt(nn);
      if (!(nn > 0.0) || !std::isfinite(nn)) throw NumericalError("inverse iteration broke down");
      for (auto& v : x) v /= nn;
    }
    found.push_back(x);
    std::vector<cplx> amp(n);
    for (std::size_t s = 0; s < n; ++s) amp[s] = phases[s] * x[s];
    DiracMode mode{lambda, chain_to_spinor(chain, amp)};
    mode.field.normalize();
    modes.push_back(std::move(mode));
  }
  return modes;
}

struct TwoLevelOptions {
  bool periodic = true;
  std::size_t snapshot_every = 0;  // 0: about 200 records
};

struct TwoLevelTrajectory {
  std::vector<double> times;  // fs
  std::vector<SpinorField> snapshots;
  std::vector<double> upper_population;
  std::vector<double> lower_population;
  std::vector<double> norm;
  std::vector<std::string> warnings;
};

/// i hbar d/dt psi = H psi on the staggered chain with Crank-Nicolson steps.
inline TwoLevelTrajectory two_level_evolve(const SpinorField& psi0, const MassProfile& mass,
                                           const DiracParams& d, double duration_fs, double dt_fs,
                                           const TwoLevelOptions& opt = {}) {
  psi0.check_consistent();
  if (!(duration_fs >= 0.0) || !std::isfinite(duration_fs))
    throw ValidationError("duration", "must be finite and >= 0");
  if (!(dt_fs > 0.0) || !std::isfinite(dt_fs)) throw ValidationError("dt", "must be finite and > 0");
  TwoLevelTrajectory traj;
  if (d.kappa_mag > 0.0) {
    const double limit = PhysicalConstants::hbar / d.kappa_mag / 50.0;
    if (dt_fs > limit)
      traj.warnings.push_back("dt = " + std::to_string(dt_fs) + " fs resolves hbar/|kappa| by fewer than 50 steps (limit " +
                              std::to_string(limit) + " fs)");
  }
  const auto chain = build_staggered_chain(mass, d, psi0.grid, opt.periodic);
  TridiagonalOperator h = chain.hamiltonian;
  const double inv_hbar = 1.0 / PhysicalConstants::hbar;
  for (std::size_t s = 0; s < h.size(); ++s) {
    h.diag[s] *= inv_hbar;
    h.upper[s] *= inv_hbar;
    h.lower[s] *= inv_hbar;
  }
  CrankNicolson cn(h, dt_fs);
  auto amp = spinor_to_chain(chain, psi0);
  const auto steps = static_cast<std::size_t>(std::llround(duration_fs / dt_fs));
  const std::size_t stride = opt.snapshot_every > 0 ? opt.snapshot_every : std::max<std::size_t>(1, steps / 200);
  auto record = [&](std::size_t step) {
    auto field = chain_to_spinor(chain, amp);
    const auto [pu, pl] = field.populations();
    traj.times.push_back(static_cast<double>(step) * dt_fs);
    traj.upper_population.push_back(pu);
    traj.lower_population.push_back(pl);
    double nn = 0.0;
    for (auto v : amp) nn += std::norm(v);
    traj.norm.push_back(nn * 2.0 * psi0.grid.spacing());
    traj.snapshots.push_back(std::move(field));
  };
  record(0);
  for (std::size_t step = 1; step <= steps; ++step) {
    cn.step(amp);
    if (!std::isfinite(amp[0].real()) || !std::isfinite(amp[0].imag()))
      throw NumericalError("NaN in two-level evolution at step " + std::to_string(step));
    if (step % stride == 0 || step == steps) record(step);
  }
  return traj;
}

}  // namespace kinkbeam
