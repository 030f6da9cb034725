#pragma once

// Wavefront phase profiles theta(xi) in the co-moving coordinate, the complex
// coupling kappa(xi) = |kappa| e^{-i theta(xi)}, and winding charge.

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "kinkbeam/errors.hpp"
#include "kinkbeam/params.hpp"

namespace kinkbeam {

enum class PairOrientation { ZeroPiZero, PiZeroPi };

inline std::string_view to_string(PairOrientation o) {
  return o == PairOrientation::ZeroPiZero ? "zero_pi_zero" : "pi_zero_pi";
}

/// Sign of theta inside the grating phase k_z zeta +- theta.
enum class PhaseSign { MinusTheta, PlusTheta };
/// Sign of the alpha0 sin(...) potential term.
enum class PotentialSign { Negative, Positive };

inline std::string_view to_string(PhaseSign s) {
  return s == PhaseSign::MinusTheta ? "minus_theta" : "plus_theta";
}
inline std::string_view to_string(PotentialSign s) {
  return s == PotentialSign::Negative ? "negative" : "positive";
}

/// theta for a kink/antikink pair; unlike PhaseProfile::kink_pair this accepts
/// coincident centers.
inline double kink_pair_theta(double amplitude, double left, double right, double width,
                              PairOrientation orientation, double xi) {
  const double bump = amplitude * (std::tanh((xi - left) / width) - std::tanh((xi - right) / width));
  return orientation == PairOrientation::ZeroPiZero ? bump : 2.0 * amplitude - bump;
}

class PhaseProfile {
public:
  struct Constant {
    double theta0 = 0.0;
  };
  struct Kink {
    double amplitude = std::numbers::pi / 2;
    double center = 0.0;
    double width = 0.001;
    int sign = +1;
  };
  struct KinkPair {
    double amplitude = std::numbers::pi / 2;
    double left = 0.0;
    double right = 0.0;
    double width = 0.001;
    PairOrientation orientation = PairOrientation::ZeroPiZero;
  };
  struct Tabulated {
    std::vector<double> zeta;
    std::vector<double> theta;
  };
  using Variant = std::variant<Constant, Kink, KinkPair, Tabulated>;

  PhaseProfile() = default;

  static PhaseProfile constant(double theta0) {
    if (!std::isfinite(theta0)) throw ValidationError("theta0", "must be finite");
    return PhaseProfile(Constant{theta0});
  }

  static PhaseProfile kink(double amplitude, double center, double width, int sign = +1) {
    check_common(amplitude, width);
    if (!std::isfinite(center)) throw ValidationError("center", "must be finite");
    if (sign != 1 && sign != -1) throw ValidationError("sign", "must be +1 or -1");
    return PhaseProfile(Kink{amplitude, center, width, sign});
  }

  static PhaseProfile kink_pair(double amplitude, double left, double right, double width,
                                PairOrientation orientation = PairOrientation::ZeroPiZero) {
    check_common(amplitude, width);
    if (!std::isfinite(left) || !std::isfinite(right))
      throw ValidationError("centers", "must be finite");
    if (!(left < right)) throw ValidationError("centers", "must be strictly ordered");
    return PhaseProfile(KinkPair{amplitude, left, right, width, orientation});
  }

  /// Pair centered on `midpoint` with the given center separation (um).
  static PhaseProfile kink_pair_centered(double amplitude, double midpoint, double separation,
                                         double width,
                                         PairOrientation orientation = PairOrientation::ZeroPiZero) {
    return kink_pair(amplitude, midpoint - separation / 2, midpoint + separation / 2, width,
                     orientation);
  }

  static PhaseProfile tabulated(std::vector<double> zeta, std::vector<double> theta) {
    if (zeta.size() != theta.size())
      throw ValidationError("tabulated", "zeta and theta columns differ in length");
    if (zeta.size() < 2) throw ValidationError("tabulated", "needs at least 2 samples");
    for (std::size_t i = 0; i < zeta.size(); ++i) {
      if (!std::isfinite(zeta[i]) || !std::isfinite(theta[i]))
        throw ValidationError("tabulated", "non-finite sample at row " + std::to_string(i));
      if (i > 0 && !(zeta[i] > zeta[i - 1]))
        throw ValidationError("tabulated", "zeta must be strictly increasing");
    }
    return PhaseProfile(Tabulated{std::move(zeta), std::move(theta)});
  }

  const Variant& variant() const noexcept { return v_; }

  double theta(double xi) const {
    return std::visit(
        [xi](const auto& p) -> double {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, Constant>) {
            return p.theta0;
          } else if constexpr (std::is_same_v<T, Kink>) {
            return p.sign * p.amplitude * std::tanh((xi - p.center) / p.width);
          } else if constexpr (std::is_same_v<T, KinkPair>) {
            return kink_pair_theta(p.amplitude, p.left, p.right, p.width, p.orientation, xi);
          } else {
            return interpolate(p, xi);
          }
        },
        v_);
  }

  /// d theta / d xi. Tabulated profiles return the slope of the containing segment.
  double dtheta(double xi) const {
    return std::visit(
        [xi](const auto& p) -> double {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, Constant>) {
            return 0.0;
          } else if constexpr (std::is_same_v<T, Kink>) {
            return p.sign * p.amplitude / p.width * sech2((xi - p.center) / p.width);
          } else if constexpr (std::is_same_v<T, KinkPair>) {
            const double s = p.amplitude / p.width *
                             (sech2((xi - p.left) / p.width) - sech2((xi - p.right) / p.width));
            return p.orientation == PairOrientation::ZeroPiZero ? s : -s;
          } else {
            if (xi <= p.zeta.front() || xi >= p.zeta.back()) return 0.0;
            const auto it = std::upper_bound(p.zeta.begin(), p.zeta.end(), xi);
            const auto i = static_cast<std::size_t>(it - p.zeta.begin()) - 1;
            return (p.theta[i + 1] - p.theta[i]) / (p.zeta[i + 1] - p.zeta[i]);
          }
        },
        v_);
  }

  /// Smallest length scale of the profile (kink width or table spacing); 0 for Constant.
  double feature_width() const {
    return std::visit(
        [](const auto& p) -> double {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, Constant>) {
            return 0.0;
          } else if constexpr (std::is_same_v<T, Tabulated>) {
            double h = p.zeta.back() - p.zeta.front();
            for (std::size_t i = 1; i < p.zeta.size(); ++i) h = std::min(h, p.zeta[i] - p.zeta[i - 1]);
            return h;
          } else {
            return p.width;
          }
        },
        v_);
  }

  /// theta far to the left of every feature.
  double left_asymptote() const { return theta(-std::numeric_limits<double>::max()); }

  /// Positions where theta winds (kink centers); empty for Constant and Tabulated.
  std::vector<double> kink_centers() const {
    if (const auto* k = std::get_if<Kink>(&v_)) return {k->center};
    if (const auto* k = std::get_if<KinkPair>(&v_)) return {k->left, k->right};
    return {};
  }

private:
  explicit PhaseProfile(Variant v) : v_(std::move(v)) {}

  static void check_common(double amplitude, double width) {
    if (!std::isfinite(amplitude)) throw ValidationError("amplitude", "must be finite");
    if (!std::isfinite(width) || !(width > 0.0)) throw ValidationError("width", "must be > 0");
  }

  static double sech2(double x) {
    const double c = std::cosh(x);
    return std::isfinite(c) ? 1.0 / (c * c) : 0.0;
  }

  static double interpolate(const Tabulated& t, double xi) {
    if (xi <= t.zeta.front()) return t.theta.front();
    if (xi >= t.zeta.back()) return t.theta.back();
    const auto it = std::upper_bound(t.zeta.begin(), t.zeta.end(), xi);
    const auto i = static_cast<std::size_t>(it - t.zeta.begin()) - 1;
    const double f = (xi - t.zeta[i]) / (t.zeta[i + 1] - t.zeta[i]);
    return t.theta[i] + f * (t.theta[i + 1] - t.theta[i]);
  }

  Variant v_ = Constant{};
};

struct CouplingProfile {
  double kappa_mag = 0.0;  // eV
  PhaseProfile phase;
};

inline std::complex<double> kappa_at(const CouplingProfile& c, double xi) {
  return std::polar(c.kappa_mag, -c.phase.theta(xi));
}

/// Winding charge in units of e over [zeta_min, zeta_max]: -(theta(max) - theta(min)) / 2pi.
inline double topological_charge(const PhaseProfile& p, double zeta_min, double zeta_max) {
  if (!std::isfinite(zeta_min) || !std::isfinite(zeta_max) || !(zeta_max > zeta_min))
    throw ValidationError("zeta_range", "empty or invalid range");
  return -(p.theta(zeta_max) - p.theta(zeta_min)) / (2.0 * std::numbers::pi);
}

/// Same charge from integrating d theta/d xi numerically. Tabulated profiles are
/// integrated segment by segment; analytic ones with composite Simpson at a step
/// well below the kink width.
inline double topological_charge_quadrature(const PhaseProfile& p, double zeta_min, double zeta_max) {
  if (!std::isfinite(zeta_min) || !std::isfinite(zeta_max) || !(zeta_max > zeta_min))
    throw ValidationError("zeta_range", "empty or invalid range");
  double integral = 0.0;
  if (const auto* t = std::get_if<PhaseProfile::Tabulated>(&p.variant())) {
    // Breakpoints inside the range plus the endpoints; slope is constant between them.
    std::vector<double> pts{zeta_min};
    for (double z : t->zeta)
      if (z > zeta_min && z < zeta_max) pts.push_back(z);
    pts.push_back(zeta_max);
    for (std::size_t i = 1; i < pts.size(); ++i) {
      const double mid = 0.5 * (pts[i - 1] + pts[i]);
      integral += p.dtheta(mid) * (pts[i] - pts[i - 1]);
    }
  } else {
    const double span = zeta_max - zeta_min;
    const double w = p.feature_width();
    std::size_t n = 2000;
    if (w > 0.0) n = std::max<std::size_t>(n, static_cast<std::size_t>(std::ceil(32.0 * span / w)));
    n += n % 2;
    const double h = span / static_cast<double>(n);
    double acc = p.dtheta(zeta_min) + p.dtheta(zeta_max);
    for (std::size_t i = 1; i < n; ++i)
      acc += (i % 2 ? 4.0 : 2.0) * p.dtheta(zeta_min + static_cast<double>(i) * h);
    integral = acc * h / 3.0;
  }
  return -integral / (2.0 * std::numbers::pi);
}

/// Convert a separation quoted in electron flight time (fs) to co-moving length (um).
inline double flight_time_to_length(double fs, const DerivedParams& d) { return fs * d.v0; }

/// Two-column CSV (zeta um, theta rad). Lines starting with '#' and a
/// non-numeric header row are skipped.
inline PhaseProfile load_tabulated_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("profile_csv", "cannot open " + path);
  std::vector<double> zeta, theta;
  std::string line;
  std::size_t row = 0;
  bool header_allowed = true;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    double z = 0, t = 0;
    if (!(ss >> z >> t)) {
      if (header_allowed) {  // header
        header_allowed = false;
        continue;
      }
      throw ValidationError("profile_csv", path + ": malformed row " + std::to_string(row));
    }
    header_allowed = false;
    zeta.push_back(z);
    theta.push_back(t);
  }
  return PhaseProfile::tabulated(std::move(zeta), std::move(theta));
}

}  // namespace kinkbeam
