#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "kinkbeam/errors.hpp"
#include "kinkbeam/grid.hpp"
#include "kinkbeam/tridiagonal.hpp"

namespace kinkbeam {

/// Slowly varying amplitude chi(zeta) with the carrier e^{i(p0 z - E0 t)/hbar} factored out.
struct Wavefunction {
  Grid grid;
  std::vector<cplx> amplitudes;

  Wavefunction() = default;
  explicit Wavefunction(Grid g) : grid(g), amplitudes(g.n_points) {}
  Wavefunction(Grid g, std::vector<cplx> a) : grid(g), amplitudes(std::move(a)) {
    if (amplitudes.size() != grid.n_points) throw ValidationError("wavefunction", "size does not match grid");
  }

  std::size_t size() const noexcept { return amplitudes.size(); }

  double norm_squared() const {
    double s = 0.0;
    for (const auto& v : amplitudes) s += std::norm(v);
    return s * grid.delta_zeta();
  }
  double norm() const { return std::sqrt(norm_squared()); }

  void normalize() {
    const double n = norm();
    if (!(n > 0.0) || !std::isfinite(n)) throw NumericalError("cannot normalize a zero or non-finite wavefunction");
    for (auto& v : amplitudes) v /= n;
  }

  bool all_finite() const {
    for (const auto& v : amplitudes)
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    return true;
  }
};

/// L2 distance ||a - b|| on the common grid.
inline double l2_distance(const Wavefunction& a, const Wavefunction& b) {
  if (a.size() != b.size()) throw ValidationError("wavefunction", "size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::norm(a.amplitudes[i] - b.amplitudes[i]);
  return std::sqrt(s * a.grid.delta_zeta());
}

}  // namespace kinkbeam
