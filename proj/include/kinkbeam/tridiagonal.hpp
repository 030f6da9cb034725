#pragma once

// Complex tridiagonal operators (optionally cyclic) and the Crank-Nicolson
// step (1 + i dt H/2)^{-1} (1 - i dt H/2) with a factorization reused across steps.

#include <cmath>
#include <complex>
#include <span>
#include <string>
#include <vector>

#include "kinkbeam/errors.hpp"

namespace kinkbeam {

using cplx = std::complex<double>;

/// Tridiagonal matrix with optional corner entries for periodic boundaries.
/// upper[i] = H(i, i+1), lower[i] = H(i+1, i); when periodic, upper[n-1] = H(n-1, 0)
/// and lower[n-1] = H(0, n-1). Both arrays have length n (last entry unused when not periodic).
struct TridiagonalOperator {
  std::vector<cplx> diag;
  std::vector<cplx> upper;
  std::vector<cplx> lower;
  bool periodic = false;

  TridiagonalOperator() = default;
  explicit TridiagonalOperator(std::size_t n, bool periodic_ = false)
      : diag(n), upper(n), lower(n), periodic(periodic_ && n >= 3) {}

  std::size_t size() const noexcept { return diag.size(); }

  /// Dense entry (i, j); zero outside the band.
  cplx at(std::size_t i, std::size_t j) const {
    const std::size_t n = size();
    if (i == j) return diag[i];
    if (j == i + 1) return upper[i];
    if (i == j + 1) return lower[j];
    if (periodic && i == n - 1 && j == 0) return upper[n - 1];
    if (periodic && i == 0 && j == n - 1) return lower[n - 1];
    return {};
  }

  void apply(std::span<const cplx> x, std::span<cplx> y) const {
    const std::size_t n = size();
    if (x.size() != n || y.size() != n) throw ValidationError("operator size mismatch");
    if (n == 0) return;
    if (n == 1) {
      y[0] = diag[0] * x[0];
      return;
    }
    y[0] = diag[0] * x[0] + upper[0] * x[1];
    for (std::size_t i = 1; i + 1 < n; ++i)
      y[i] = lower[i - 1] * x[i - 1] + diag[i] * x[i] + upper[i] * x[i + 1];
    y[n - 1] = lower[n - 2] * x[n - 2] + diag[n - 1] * x[n - 1];
    if (periodic) {
      y[n - 1] += upper[n - 1] * x[0];
      y[0] += lower[n - 1] * x[n - 1];
    }
  }

  std::vector<cplx> apply(std::span<const cplx> x) const {
    std::vector<cplx> y(x.size());
    apply(x, y);
    return y;
  }

  /// max |H(i,j) - conj(H(j,i))| over the band.
  double hermiticity_defect() const {
    const std::size_t n = size();
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, std::abs(diag[i].imag()) * 2.0);
    const std::size_t bonds = periodic ? n : (n > 0 ? n - 1 : 0);
    for (std::size_t i = 0; i < bonds; ++i)
      worst = std::max(worst, std::abs(upper[i] - std::conj(lower[i])));
    return worst;
  }

  double max_abs() const {
    double m = 0.0;
    for (const auto& v : diag) m = std::max(m, std::abs(v));
    const std::size_t bonds = periodic ? size() : (size() > 0 ? size() - 1 : 0);
    for (std::size_t i = 0; i < bonds; ++i) m = std::max({m, std::abs(upper[i]), std::abs(lower[i])});
    return m;
  }
};

namespace detail {

/// LU of a (non-cyclic) tridiagonal matrix without pivoting. Stores the
/// elimination multipliers and reciprocal pivots so each solve is two sweeps.
class TridiagonalLU {
public:
  TridiagonalLU() = default;
  TridiagonalLU(std::span<const cplx> diag, std::span<const cplx> upper, std::span<const cplx> lower) {
    const std::size_t n = diag.size();
    mult_.assign(n, cplx{});
    inv_pivot_.assign(n, cplx{});
    upper_.assign(upper.begin(), upper.begin() + static_cast<std::ptrdiff_t>(n > 0 ? n - 1 : 0));
    if (n == 0) return;
    const double scale = max_abs(diag, upper, lower);
    cplx pivot = diag[0];
    check(pivot, 0, scale);
    inv_pivot_[0] = 1.0 / pivot;
    for (std::size_t i = 1; i < n; ++i) {
      mult_[i] = lower[i - 1] * inv_pivot_[i - 1];
      pivot = diag[i] - mult_[i] * upper[i - 1];
      check(pivot, i, scale);
      inv_pivot_[i] = 1.0 / pivot;
    }
  }

  std::size_t size() const noexcept { return inv_pivot_.size(); }

  void solve_in_place(std::span<cplx> x) const {
    const std::size_t n = size();
    for (std::size_t i = 1; i < n; ++i) x[i] -= mult_[i] * x[i - 1];
    if (n == 0) return;
    x[n - 1] *= inv_pivot_[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) x[i] = (x[i] - upper_[i] * x[i + 1]) * inv_pivot_[i];
  }

  const std::vector<cplx>& multipliers() const noexcept { return mult_; }
  const std::vector<cplx>& inverse_pivots() const noexcept { return inv_pivot_; }
  const std::vector<cplx>& upper() const noexcept { return upper_; }

private:
  static double max_abs(std::span<const cplx> d, std::span<const cplx> u, std::span<const cplx> l) {
    double m = 0.0;
    for (auto v : d) m = std::max(m, std::abs(v));
    for (auto v : u) m = std::max(m, std::abs(v));
    for (auto v : l) m = std::max(m, std::abs(v));
    return m;
  }
  static void check(cplx pivot, std::size_t i, double scale) {
    if (!(std::abs(pivot) > 1e-14 * scale) || !std::isfinite(std::abs(pivot)))
      throw NumericalError("singular tridiagonal pivot at row " + std::to_string(i) +
                           " (|pivot| = " + std::to_string(std::abs(pivot)) + ")");
  }

  std::vector<cplx> mult_;
  std::vector<cplx> inv_pivot_;
  std::vector<cplx> upper_;
};

}  // namespace detail

/// Crank-Nicolson propagator for a fixed Hermitian tridiagonal H and step dt.
/// The left-hand factorization is built once; step() costs one fused
/// multiply/forward sweep plus one back sweep (and one extra dot product when
/// periodic, via Sherman-Morrison).
class CrankNicolson {
public:
  CrankNicolson(const TridiagonalOperator& h, double dt) : n_(h.size()), periodic_(h.periodic) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("dt", "must be finite and > 0");
    const cplx half{0.0, 0.5 * dt};
    // Right-hand side B = 1 - i dt H / 2.
    b_diag_.resize(n_);
    b_upper_.resize(n_);
    b_lower_.resize(n_);
    std::vector<cplx> a_diag(n_), a_upper(n_), a_lower(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      b_diag_[i] = 1.0 - half * h.diag[i];
      b_upper_[i] = -half * h.upper[i];
      b_lower_[i] = -half * h.lower[i];
      a_diag[i] = 1.0 + half * h.diag[i];
      a_upper[i] = half * h.upper[i];
      a_lower[i] = half * h.lower[i];
    }
    if (periodic_) {
      // A = A' + u v^T with u = (g, 0.., A(n-1,0)), v = (1, 0.., A(0,n-1)/g).
      gamma_ = -a_diag[0];
      corner_top_ = a_lower[n_ - 1];     // A(0, n-1)
      corner_bottom_ = a_upper[n_ - 1];  // A(n-1, 0)
      a_diag[0] -= gamma_;
      a_diag[n_ - 1] -= corner_bottom_ * corner_top_ / gamma_;
    }
    lu_ = detail::TridiagonalLU(a_diag, a_upper, a_lower);
    if (periodic_) {
      z_.assign(n_, cplx{});
      z_[0] = gamma_;
      z_[n_ - 1] = corner_bottom_;
      lu_.solve_in_place(z_);
      const cplx denom = 1.0 + z_[0] + corner_top_ / gamma_ * z_[n_ - 1];
      if (!(std::abs(denom) > 1e-14))
        throw NumericalError("singular Sherman-Morrison correction in periodic solve");
      inv_sm_denom_ = 1.0 / denom;
    }
    work_.resize(n_);
  }

  std::size_t size() const noexcept { return n_; }

  /// Advance chi by one step in place.
  void step(std::span<cplx> chi) {
    if (chi.size() != n_) throw ValidationError("wavefunction size does not match operator");
    if (n_ == 0) return;
    if (n_ == 1) {
      chi[0] = b_diag_[0] * chi[0] * lu_.inverse_pivots()[0];
      return;
    }
    const auto& mult = lu_.multipliers();
    const auto& inv_piv = lu_.inverse_pivots();
    const auto& up = lu_.upper();
    cplx* w = work_.data();
    // Fused r = B chi and forward elimination.
    w[0] = b_diag_[0] * chi[0] + b_upper_[0] * chi[1];
    if (periodic_) w[0] += b_lower_[n_ - 1] * chi[n_ - 1];
    for (std::size_t i = 1; i + 1 < n_; ++i) {
      const cplx r = b_lower_[i - 1] * chi[i - 1] + b_diag_[i] * chi[i] + b_upper_[i] * chi[i + 1];
      w[i] = r - mult[i] * w[i - 1];
    }
    {
      const std::size_t i = n_ - 1;
      cplx r = b_lower_[i - 1] * chi[i - 1] + b_diag_[i] * chi[i];
      if (periodic_) r += b_upper_[n_ - 1] * chi[0];
      w[i] = r - mult[i] * w[i - 1];
    }
    // Back substitution into chi.
    chi[n_ - 1] = w[n_ - 1] * inv_piv[n_ - 1];
    for (std::size_t i = n_ - 1; i-- > 0;) chi[i] = (w[i] - up[i] * chi[i + 1]) * inv_piv[i];
    if (periodic_) {
      const cplx vy = chi[0] + corner_top_ / gamma_ * chi[n_ - 1];
      const cplx f = vy * inv_sm_denom_;
      for (std::size_t i = 0; i < n_; ++i) chi[i] -= f * z_[i];
    }
  }

private:
  std::size_t n_;
  bool periodic_;
  std::vector<cplx> b_diag_, b_upper_, b_lower_;
  detail::TridiagonalLU lu_;
  cplx gamma_{}, corner_top_{}, corner_bottom_{};
  std::vector<cplx> z_;
  cplx inv_sm_denom_{};
  std::vector<cplx> work_;
};

/// Solve (T - shift) x = b for a general complex tridiagonal T with partial
/// pivoting (fill-in of one extra super-diagonal). Used by inverse iteration,
/// where the shifted matrix is nearly singular by design.
inline std::vector<cplx> solve_tridiagonal_pivoted(std::span<const cplx> diag,
                                                   std::span<const cplx> upper,
                                                   std::span<const cplx> lower, cplx shift,
                                                   std::vector<cplx> rhs) {
  const std::size_t n = diag.size();
  if (rhs.size() != n) throw ValidationError("rhs size mismatch");
  if (n == 0) return rhs;
  std::vector<cplx> d(n), u(n, cplx{}), u2(n, cplx{}), l(n, cplx{});
  for (std::size_t i = 0; i < n; ++i) {
    d[i] = diag[i] - shift;
    if (i + 1 < n) {
      u[i] = upper[i];
      l[i] = lower[i];
    }
  }
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) scale = std::max({scale, std::abs(d[i]), std::abs(u[i]), std::abs(l[i])});
  const double tiny = std::max(scale, 1e-300) * 1e-15;
  // Gaussian elimination on rows i, i+1.
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (std::abs(l[i]) > std::abs(d[i])) {
      // swap rows i and i+1 (row i+1 has entries l[i], d[i+1], u[i+1] in columns i, i+1, i+2)
      std::swap(d[i], l[i]);
      std::swap(u[i], d[i + 1]);
      std::swap(u2[i], u[i + 1]);
      std::swap(rhs[i], rhs[i + 1]);
    }
    if (std::abs(d[i]) < tiny) d[i] = tiny;
    const cplx m = l[i] / d[i];
    d[i + 1] -= m * u[i];
    u[i + 1] -= m * u2[i];
    rhs[i + 1] -= m * rhs[i];
  }
  if (std::abs(d[n - 1]) < tiny) d[n - 1] = tiny;
  rhs[n - 1] /= d[n - 1];
  if (n >= 2) rhs[n - 2] = (rhs[n - 2] - u[n - 2] * rhs[n - 1]) / d[n - 2];
  for (std::size_t i = n >= 2 ? n - 2 : 0; i-- > 0;)
    rhs[i] = (rhs[i] - u[i] * rhs[i + 1] - u2[i] * rhs[i + 2]) / d[i];
  return rhs;
}

}  // namespace kinkbeam
