#pragma once

// JSON run configuration: schema, defaults, unknown-key rejection, dotted-path
// overrides, and conversion to the typed engine configs.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "kinkbeam/kinkbeam.hpp"

namespace kinkbeam::app {

using json = nlohmann::ordered_json;

enum class InitialKind { JackiwRebbi, Gaussian };
enum class MassModel { Twisted, RealProjection, TdseEffective, TanhKink };
enum class SnapshotFormat { Binary, Csv, None };

struct GridSpec {
  double zeta_min = -0.5;
  double zeta_max = 0.5;
  std::optional<std::size_t> n_points;  // default: coarsest allowed spacing
  std::optional<double> tau_step;       // um; default: largest allowed step
  double duration_fs = 6000.0;

  Grid build(const DerivedParams& d) const {
    Grid g = Grid::for_duration(d, zeta_min, zeta_max, duration_fs);
    if (n_points) g.n_points = *n_points;
    if (tau_step) {
      g.tau_step = *tau_step;
      g.n_steps = static_cast<std::size_t>(std::llround(PhysicalConstants::c * duration_fs / *tau_step));
    }
    g.validate(d);
    return g;
  }
  bool operator==(const GridSpec&) const = default;
};

struct RunSpec {
  Frame frame = Frame::CoMoving;
  PhaseSign phase_sign = PhaseSign::MinusTheta;
  PotentialSign potential_sign = PotentialSign::Negative;
  std::optional<std::size_t> snapshot_every;  // default: at most target_snapshots records
  BoundaryConfig boundary;
  bool neglect_recoil_correction = true;
  bool operator==(const RunSpec&) const = default;
};

struct InitialStateSpec {
  InitialKind kind = InitialKind::JackiwRebbi;
  double sigma_t = 1.0;     // fs
  double center = 0.0;      // um
  double chirp_time = 0.0;  // fs
  bool bound_state_carrier = false;
  bool operator==(const InitialStateSpec&) const = default;
};

struct SpectrumSpec {
  SpectrumMethod method = SpectrumMethod::Staggered;
  SpectrumBoundary boundary = SpectrumBoundary::Box;
  bool quadratic_term = false;
  MassModel mass_model = MassModel::Twisted;
  double zeta_min = -0.4;
  double zeta_max = 0.4;
  std::size_t n_points = 2048;
  bool operator==(const SpectrumSpec&) const = default;
};

struct PairSpec {
  std::vector<double> separations_fs{3.3, 6.6, 20.0};
  double duration_fs = 1000.0;
  MassModel mass_model = MassModel::RealProjection;
  PairOrientation orientation = PairOrientation::ZeroPiZero;
  double spectrum_zeta_min = -0.5;
  double spectrum_zeta_max = 0.5;
  std::size_t spectrum_n_points = 8192;
  bool run_tdse = true;
  bool operator==(const PairSpec&) const = default;
};

struct SweepAxis {
  std::string path;
  std::vector<json> values;
  bool operator==(const SweepAxis&) const = default;
};

struct SweepSpec {
  std::vector<SweepAxis> axes;
  std::size_t cap = 1000;
  bool run_tdse = false;
  bool operator==(const SweepSpec&) const = default;
};

struct OutputSpec {
  SnapshotFormat snapshot_format = SnapshotFormat::Binary;
  bool momentum_series = true;
  std::size_t target_snapshots = 500;  // default stride keeps records <= this (hard cap 2000)
  bool operator==(const OutputSpec&) const = default;
};

struct AppConfig {
  BeamConfig beam;
  PhaseProfile profile = PhaseProfile::kink(std::numbers::pi / 2, 0.0, 0.001, +1);
  GridSpec grid;
  RunSpec run;
  InitialStateSpec initial_state;
  ObservableSettings observables;
  SpectrumSpec spectrum;
  PairSpec pair_generation;
  SweepSpec sweep;
  OutputSpec output;
};

inline constexpr std::size_t kMaxSnapshots = 2000;

namespace detail {

template <class E>
using EnumTable = std::vector<std::pair<std::string_view, E>>;

inline const EnumTable<Frame>& frames() {
  static const EnumTable<Frame> t{{"co_moving", Frame::CoMoving}, {"co_moving_with_drift", Frame::CoMovingWithDrift}};
  return t;
}
inline const EnumTable<PhaseSign>& phase_signs() {
  static const EnumTable<PhaseSign> t{{"minus_theta", PhaseSign::MinusTheta}, {"plus_theta", PhaseSign::PlusTheta}};
  return t;
}
inline const EnumTable<PotentialSign>& potential_signs() {
  static const EnumTable<PotentialSign> t{{"negative", PotentialSign::Negative}, {"positive", PotentialSign::Positive}};
  return t;
}
inline const EnumTable<BoundaryKind>& boundary_kinds() {
  static const EnumTable<BoundaryKind> t{{"periodic", BoundaryKind::Periodic},
                                         {"absorbing_mask", BoundaryKind::AbsorbingMask}};
  return t;
}
inline const EnumTable<InitialKind>& initial_kinds() {
  static const EnumTable<InitialKind> t{{"jackiw_rebbi", InitialKind::JackiwRebbi}, {"gaussian", InitialKind::Gaussian}};
  return t;
}
inline const EnumTable<SidebandBasis>& sideband_bases() {
  static const EnumTable<SidebandBasis> t{{"jackiw_rebbi", SidebandBasis::JackiwRebbi}, {"ladder", SidebandBasis::Ladder}};
  return t;
}
inline const EnumTable<SpectrumMethod>& spectrum_methods() {
  static const EnumTable<SpectrumMethod> t{{"staggered", SpectrumMethod::Staggered},
                                           {"central_difference", SpectrumMethod::CentralDifference}};
  return t;
}
inline const EnumTable<SpectrumBoundary>& spectrum_boundaries() {
  static const EnumTable<SpectrumBoundary> t{{"box", SpectrumBoundary::Box}, {"periodic", SpectrumBoundary::Periodic}};
  return t;
}
inline const EnumTable<MassModel>& mass_models() {
  static const EnumTable<MassModel> t{{"twisted", MassModel::Twisted},
                                      {"real_projection", MassModel::RealProjection},
                                      {"tdse_effective", MassModel::TdseEffective},
                                      {"tanh_kink", MassModel::TanhKink}};
  return t;
}
inline const EnumTable<PairOrientation>& orientations() {
  static const EnumTable<PairOrientation> t{{"zero_pi_zero", PairOrientation::ZeroPiZero},
                                            {"pi_zero_pi", PairOrientation::PiZeroPi}};
  return t;
}
inline const EnumTable<SnapshotFormat>& snapshot_formats() {
  static const EnumTable<SnapshotFormat> t{
      {"binary", SnapshotFormat::Binary}, {"csv", SnapshotFormat::Csv}, {"none", SnapshotFormat::None}};
  return t;
}

template <class E>
std::string enum_name(const EnumTable<E>& t, E v) {
  for (const auto& [name, e] : t)
    if (e == v) return std::string(name);
  return "?";
}

template <class E>
E parse_enum(const EnumTable<E>& t, const json& j, const std::string& path) {
  if (!j.is_string()) throw ValidationError(path, "expected a string");
  const auto s = j.get<std::string>();
  std::string choices;
  for (const auto& [name, e] : t) {
    if (name == s) return e;
    choices += (choices.empty() ? "" : ", ") + std::string(name);
  }
  throw ValidationError(path, "unknown value '" + s + "' (expected one of: " + choices + ")");
}

inline json optional_json(const auto& o) { return o ? json(*o) : json(nullptr); }

/// Reads typed leaves out of a merged document, naming the dotted path on failure.
class Reader {
public:
  explicit Reader(const json& root) : root_(root) {}

  const json& at(const std::string& path) const {
    const json* cur = &root_;
    std::size_t start = 0;
    while (start <= path.size()) {
      const auto dot = path.find('.', start);
      const auto key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
      if (!cur->is_object() || !cur->contains(key)) throw ValidationError(path, "missing");
      cur = &(*cur)[key];
      if (dot == std::string::npos) break;
      start = dot + 1;
    }
    return *cur;
  }

  double number(const std::string& path) const {
    const auto& j = at(path);
    if (!j.is_number()) throw ValidationError(path, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw ValidationError(path, "must be finite");
    return v;
  }
  std::optional<double> optional_number(const std::string& path) const {
    return at(path).is_null() ? std::nullopt : std::optional<double>(number(path));
  }
  std::size_t count(const std::string& path) const {
    const auto& j = at(path);
    if (!j.is_number_integer() || j.get<long long>() < 0) throw ValidationError(path, "expected a non-negative integer");
    return j.get<std::size_t>();
  }
  std::optional<std::size_t> optional_count(const std::string& path) const {
    return at(path).is_null() ? std::nullopt : std::optional<std::size_t>(count(path));
  }
  bool boolean(const std::string& path) const {
    const auto& j = at(path);
    if (!j.is_boolean()) throw ValidationError(path, "expected true or false");
    return j.get<bool>();
  }
  std::string string(const std::string& path) const {
    const auto& j = at(path);
    if (!j.is_string()) throw ValidationError(path, "expected a string");
    return j.get<std::string>();
  }
  std::vector<double> numbers(const std::string& path) const {
    const auto& j = at(path);
    if (!j.is_array()) throw ValidationError(path, "expected an array of numbers");
    std::vector<double> out;
    for (const auto& v : j) {
      if (!v.is_number()) throw ValidationError(path, "expected an array of numbers");
      out.push_back(v.get<double>());
    }
    return out;
  }
  template <class E>
  E choice(const EnumTable<E>& t, const std::string& path) const {
    return parse_enum(t, at(path), path);
  }

private:
  const json& root_;
};

inline json profile_defaults(const std::string& type) {
  if (type == "constant") return json{{"type", "constant"}, {"theta0", 0.0}};
  if (type == "kink")
    return json{{"type", "kink"}, {"amplitude", std::numbers::pi / 2}, {"center", 0.0}, {"width", 0.001}, {"sign", 1}};
  if (type == "kink_pair")
    return json{{"type", "kink_pair"}, {"amplitude", std::numbers::pi / 2}, {"left", -0.06}, {"right", 0.06},
                {"width", 0.001}, {"orientation", "zero_pi_zero"}};
  if (type == "tabulated") return json{{"type", "tabulated"}, {"csv", nullptr}, {"zeta", json::array()}, {"theta", json::array()}};
  throw ValidationError("profile.type", "unknown profile type '" + type + "' (expected constant, kink, kink_pair, tabulated)");
}

inline json profile_to_json(const PhaseProfile& p) {
  return std::visit(
      [](const auto& v) -> json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, PhaseProfile::Constant>) {
          return json{{"type", "constant"}, {"theta0", v.theta0}};
        } else if constexpr (std::is_same_v<T, PhaseProfile::Kink>) {
          return json{{"type", "kink"}, {"amplitude", v.amplitude}, {"center", v.center}, {"width", v.width},
                      {"sign", v.sign}};
        } else if constexpr (std::is_same_v<T, PhaseProfile::KinkPair>) {
          return json{{"type", "kink_pair"}, {"amplitude", v.amplitude}, {"left", v.left}, {"right", v.right},
                      {"width", v.width}, {"orientation", std::string(to_string(v.orientation))}};
        } else {
          return json{{"type", "tabulated"}, {"csv", nullptr}, {"zeta", v.zeta}, {"theta", v.theta}};
        }
      },
      p.variant());
}

inline PhaseProfile profile_from_json(const Reader& r, const std::filesystem::path& base_dir) {
  const auto type = r.string("profile.type");
  if (type == "constant") return PhaseProfile::constant(r.number("profile.theta0"));
  try {
    if (type == "kink") {
      const auto& sj = r.at("profile.sign");
      if (!sj.is_number_integer()) throw ValidationError("profile.sign", "must be +1 or -1");
      return PhaseProfile::kink(r.number("profile.amplitude"), r.number("profile.center"), r.number("profile.width"),
                                sj.get<int>());
    }
    if (type == "kink_pair")
      return PhaseProfile::kink_pair(r.number("profile.amplitude"), r.number("profile.left"), r.number("profile.right"),
                                     r.number("profile.width"), r.choice(orientations(), "profile.orientation"));
    if (type == "tabulated") {
      const auto& csv = r.at("profile.csv");
      if (!csv.is_null()) {
        std::filesystem::path p = csv.get<std::string>();
        if (p.is_relative()) p = base_dir / p;
        return load_tabulated_csv(p.string());
      }
      return PhaseProfile::tabulated(r.numbers("profile.zeta"), r.numbers("profile.theta"));
    }
  } catch (const ValidationError& e) {
    if (e.field().rfind("profile", 0) == 0) throw;
    throw ValidationError("profile." + (e.field().empty() ? std::string("value") : e.field()), e.what());
  }
  profile_defaults(type);  // throws for unknown types
  return {};
}

}  // namespace detail

/// Full configuration document with every field present.
inline json to_json(const AppConfig& c) {
  using namespace detail;
  json j;
  j["beam"] = {{"kinetic_energy", c.beam.kinetic_energy},
               {"laser_wavelength", c.beam.laser_wavelength},
               {"grating_period", c.beam.grating_period},
               {"field_strength", c.beam.field_strength},
               {"lorentz_gamma_override", optional_json(c.beam.lorentz_gamma_override)},
               {"beta_override", optional_json(c.beam.beta_override)}};
  j["profile"] = profile_to_json(c.profile);
  j["grid"] = {{"zeta_min", c.grid.zeta_min},
               {"zeta_max", c.grid.zeta_max},
               {"n_points", optional_json(c.grid.n_points)},
               {"tau_step", optional_json(c.grid.tau_step)},
               {"duration_fs", c.grid.duration_fs}};
  j["run"] = {{"frame", enum_name(frames(), c.run.frame)},
              {"phase_sign", enum_name(phase_signs(), c.run.phase_sign)},
              {"potential_sign", enum_name(potential_signs(), c.run.potential_sign)},
              {"snapshot_every", optional_json(c.run.snapshot_every)},
              {"boundary",
               {{"kind", enum_name(boundary_kinds(), c.run.boundary.kind)},
                {"mask_width", c.run.boundary.mask_width},
                {"mask_strength", c.run.boundary.mask_strength}}},
              {"neglect_recoil_correction", c.run.neglect_recoil_correction}};
  j["initial_state"] = {{"type", enum_name(initial_kinds(), c.initial_state.kind)},
                        {"sigma_t", c.initial_state.sigma_t},
                        {"center", c.initial_state.center},
                        {"chirp_time", c.initial_state.chirp_time},
                        {"bound_state_carrier", c.initial_state.bound_state_carrier}};
  j["observables"] = {{"sideband_basis", enum_name(sideband_bases(), c.observables.sideband_basis)},
                      {"sideband_n_max", c.observables.sideband_n_max},
                      {"trap_center", optional_json(c.observables.trap_center)},
                      {"trap_halfwidth", c.observables.trap_halfwidth > 0.0 ? json(c.observables.trap_halfwidth)
                                                                            : json(nullptr)}};
  j["spectrum"] = {{"method", enum_name(spectrum_methods(), c.spectrum.method)},
                   {"boundary", enum_name(spectrum_boundaries(), c.spectrum.boundary)},
                   {"quadratic_term", c.spectrum.quadratic_term},
                   {"mass_model", enum_name(mass_models(), c.spectrum.mass_model)},
                   {"zeta_min", c.spectrum.zeta_min},
                   {"zeta_max", c.spectrum.zeta_max},
                   {"n_points", c.spectrum.n_points}};
  j["pair_generation"] = {{"separations_fs", c.pair_generation.separations_fs},
                          {"duration_fs", c.pair_generation.duration_fs},
                          {"mass_model", enum_name(mass_models(), c.pair_generation.mass_model)},
                          {"orientation", enum_name(orientations(), c.pair_generation.orientation)},
                          {"spectrum_zeta_min", c.pair_generation.spectrum_zeta_min},
                          {"spectrum_zeta_max", c.pair_generation.spectrum_zeta_max},
                          {"spectrum_n_points", c.pair_generation.spectrum_n_points},
                          {"run_tdse", c.pair_generation.run_tdse}};
  json axes = json::array();
  for (const auto& a : c.sweep.axes) axes.push_back({{"path", a.path}, {"values", a.values}});
  j["sweep"] = {{"axes", axes}, {"cap", c.sweep.cap}, {"run_tdse", c.sweep.run_tdse}};
  j["output"] = {{"snapshot_format", enum_name(snapshot_formats(), c.output.snapshot_format)},
                 {"momentum_series", c.output.momentum_series},
                 {"target_snapshots", c.output.target_snapshots}};
  return j;
}

/// Typed config from a complete document (as produced by merge_with_defaults).
inline AppConfig from_json(const json& j, const std::filesystem::path& base_dir = ".") {
  using namespace detail;
  const Reader r(j);
  AppConfig c;
  c.beam.kinetic_energy = r.number("beam.kinetic_energy");
  c.beam.laser_wavelength = r.number("beam.laser_wavelength");
  c.beam.grating_period = r.number("beam.grating_period");
  c.beam.field_strength = r.number("beam.field_strength");
  c.beam.lorentz_gamma_override = r.optional_number("beam.lorentz_gamma_override");
  c.beam.beta_override = r.optional_number("beam.beta_override");
  try {
    validate(c.beam);
  } catch (const ValidationError& e) {
    throw ValidationError("beam." + e.field(), std::string(e.what()).substr(e.field().size() + 2));
  }
  c.profile = profile_from_json(r, base_dir);

  c.grid.zeta_min = r.number("grid.zeta_min");
  c.grid.zeta_max = r.number("grid.zeta_max");
  c.grid.n_points = r.optional_count("grid.n_points");
  c.grid.tau_step = r.optional_number("grid.tau_step");
  c.grid.duration_fs = r.number("grid.duration_fs");
  if (!(c.grid.zeta_max > c.grid.zeta_min)) throw ValidationError("grid.zeta_max", "must exceed grid.zeta_min");
  if (c.grid.duration_fs < 0.0) throw ValidationError("grid.duration_fs", "must be >= 0");
  if (c.grid.n_points && *c.grid.n_points < 1) throw ValidationError("grid.n_points", "must be >= 1");
  if (c.grid.tau_step && !(*c.grid.tau_step > 0.0)) throw ValidationError("grid.tau_step", "must be > 0");

  c.run.frame = r.choice(frames(), "run.frame");
  c.run.phase_sign = r.choice(phase_signs(), "run.phase_sign");
  c.run.potential_sign = r.choice(potential_signs(), "run.potential_sign");
  c.run.snapshot_every = r.optional_count("run.snapshot_every");
  if (c.run.snapshot_every && *c.run.snapshot_every < 1) throw ValidationError("run.snapshot_every", "must be >= 1");
  c.run.boundary.kind = r.choice(boundary_kinds(), "run.boundary.kind");
  c.run.boundary.mask_width = r.number("run.boundary.mask_width");
  c.run.boundary.mask_strength = r.number("run.boundary.mask_strength");
  if (!(c.run.boundary.mask_width > 0.0)) throw ValidationError("run.boundary.mask_width", "must be > 0");
  if (c.run.boundary.mask_strength < 0.0) throw ValidationError("run.boundary.mask_strength", "must be >= 0");
  c.run.neglect_recoil_correction = r.boolean("run.neglect_recoil_correction");
  if (!c.run.neglect_recoil_correction)
    throw ValidationError("run.neglect_recoil_correction", "the hbar k_z recoil correction is not implemented; must be true");

  c.initial_state.kind = r.choice(initial_kinds(), "initial_state.type");
  c.initial_state.sigma_t = r.number("initial_state.sigma_t");
  c.initial_state.center = r.number("initial_state.center");
  c.initial_state.chirp_time = r.number("initial_state.chirp_time");
  c.initial_state.bound_state_carrier = r.boolean("initial_state.bound_state_carrier");
  if (!(c.initial_state.sigma_t > 0.0)) throw ValidationError("initial_state.sigma_t", "must be > 0");

  c.observables.sideband_basis = r.choice(sideband_bases(), "observables.sideband_basis");
  const auto& nmax = r.at("observables.sideband_n_max");
  if (!nmax.is_number_integer() || nmax.get<int>() < 0)
    throw ValidationError("observables.sideband_n_max", "expected a non-negative integer");
  c.observables.sideband_n_max = nmax.get<int>();
  c.observables.trap_center = r.optional_number("observables.trap_center");
  c.observables.trap_halfwidth = r.optional_number("observables.trap_halfwidth").value_or(0.0);
  if (c.observables.trap_halfwidth < 0.0) throw ValidationError("observables.trap_halfwidth", "must be > 0");

  c.spectrum.method = r.choice(spectrum_methods(), "spectrum.method");
  c.spectrum.boundary = r.choice(spectrum_boundaries(), "spectrum.boundary");
  c.spectrum.quadratic_term = r.boolean("spectrum.quadratic_term");
  c.spectrum.mass_model = r.choice(mass_models(), "spectrum.mass_model");
  c.spectrum.zeta_min = r.number("spectrum.zeta_min");
  c.spectrum.zeta_max = r.number("spectrum.zeta_max");
  c.spectrum.n_points = r.count("spectrum.n_points");
  if (!(c.spectrum.zeta_max > c.spectrum.zeta_min)) throw ValidationError("spectrum.zeta_max", "must exceed zeta_min");

  c.pair_generation.separations_fs = r.numbers("pair_generation.separations_fs");
  for (double s : c.pair_generation.separations_fs)
    if (!(s > 0.0)) throw ValidationError("pair_generation.separations_fs", "separations must be positive");
  c.pair_generation.duration_fs = r.number("pair_generation.duration_fs");
  c.pair_generation.mass_model = r.choice(mass_models(), "pair_generation.mass_model");
  c.pair_generation.orientation = r.choice(orientations(), "pair_generation.orientation");
  c.pair_generation.spectrum_zeta_min = r.number("pair_generation.spectrum_zeta_min");
  c.pair_generation.spectrum_zeta_max = r.number("pair_generation.spectrum_zeta_max");
  c.pair_generation.spectrum_n_points = r.count("pair_generation.spectrum_n_points");
  c.pair_generation.run_tdse = r.boolean("pair_generation.run_tdse");

  const auto& axes = r.at("sweep.axes");
  if (!axes.is_array()) throw ValidationError("sweep.axes", "expected an array");
  for (std::size_t i = 0; i < axes.size(); ++i) {
    const auto p = "sweep.axes[" + std::to_string(i) + "]";
    const auto& a = axes[i];
    if (!a.is_object() || !a.contains("path") || !a["path"].is_string() || !a.contains("values") ||
        !a["values"].is_array() || a["values"].empty())
      throw ValidationError(p, "expected {\"path\": string, \"values\": non-empty array}");
    for (const auto& [k, v] : a.items())
      if (k != "path" && k != "values") throw ValidationError(p, "unknown key '" + k + "'");
    SweepAxis ax;
    ax.path = a["path"].get<std::string>();
    for (const auto& v : a["values"]) ax.values.push_back(v);
    c.sweep.axes.push_back(std::move(ax));
  }
  c.sweep.cap = r.count("sweep.cap");
  c.sweep.run_tdse = r.boolean("sweep.run_tdse");

  c.output.snapshot_format = r.choice(snapshot_formats(), "output.snapshot_format");
  c.output.momentum_series = r.boolean("output.momentum_series");
  c.output.target_snapshots = r.count("output.target_snapshots");
  if (c.output.target_snapshots < 1 || c.output.target_snapshots > kMaxSnapshots)
    throw ValidationError("output.target_snapshots", "must lie in [1, 2000]");
  return c;
}

namespace detail {

inline void collect_unknown(const json& user, const json& schema, const std::string& prefix,
                            std::vector<std::string>& unknown) {
  for (const auto& [key, value] : user.items()) {
    const auto path = prefix.empty() ? key : prefix + "." + key;
    if (!schema.is_object() || !schema.contains(key)) {
      unknown.push_back(path);
      continue;
    }
    const auto& s = schema[key];
    if (value.is_object() && s.is_object()) collect_unknown(value, s, path, unknown);
  }
}

inline void merge_into(json& target, const json& patch) {
  for (const auto& [key, value] : patch.items()) {
    if (value.is_object() && target.contains(key) && target[key].is_object())
      merge_into(target[key], value);
    else
      target[key] = value;
  }
}

inline void collect_leaves(const json& j, const std::string& prefix, std::vector<std::string>& out) {
  if (j.is_object() && !j.empty()) {
    for (const auto& [k, v] : j.items()) collect_leaves(v, prefix.empty() ? k : prefix + "." + k, out);
  } else {
    out.push_back(prefix);
  }
}

inline bool has_path(const json& j, const std::string& path) {
  const json* cur = &j;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const auto key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (!cur->is_object() || !cur->contains(key)) return false;
    cur = &(*cur)[key];
    if (dot == std::string::npos) return true;
    start = dot + 1;
  }
}

}  // namespace detail

/// Set `path` (dotted) in `doc` to `value`, creating objects on the way.
inline void set_path(json& doc, const std::string& path, const json& value) {
  if (path.empty()) throw ValidationError("override", "empty key");
  json* cur = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const auto key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) throw ValidationError("override", "malformed key '" + path + "'");
    if (!cur->is_object()) *cur = json::object();
    if (dot == std::string::npos) {
      (*cur)[key] = value;
      return;
    }
    cur = &(*cur)[key];
    start = dot + 1;
  }
}

/// Parse "key=value"; the value is read as JSON when possible, else as a string.
inline std::pair<std::string, json> parse_override(const std::string& kv) {
  const auto eq = kv.find('=');
  if (eq == std::string::npos || eq == 0) throw ValidationError("override", "expected key=value, got '" + kv + "'");
  const auto key = kv.substr(0, eq);
  const auto text = kv.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  return {key, value};
}

struct LoadedConfig {
  AppConfig config;
  json user;       // as given, after overrides
  json effective;  // every field, defaults filled in
  std::vector<std::string> defaulted;  // dotted paths taken from defaults
  std::filesystem::path base_dir = ".";
};

/// Validate a user document against the schema, fill defaults and build the typed config.
inline LoadedConfig load_config_json(json user, const std::vector<std::string>& overrides = {},
                                     const std::filesystem::path& base_dir = ".") {
  if (user.is_null()) user = json::object();
  if (!user.is_object()) throw ValidationError("config", "top level must be a JSON object");
  // A run manifest carries the effective config under "config".
  if (user.contains("kinkbeam_manifest") && user.contains("config")) user = json(user["config"]);
  for (const auto& kv : overrides) {
    auto [k, v] = parse_override(kv);
    set_path(user, k, v);
  }

  json defaults = to_json(AppConfig{});
  if (user.contains("profile")) {
    if (!user["profile"].is_object()) throw ValidationError("profile", "expected an object");
    const auto type = user["profile"].value("type", std::string("kink"));
    defaults["profile"] = detail::profile_defaults(type);
  }
  std::vector<std::string> unknown;
  detail::collect_unknown(user, defaults, "", unknown);
  if (!unknown.empty()) {
    std::string list;
    for (const auto& u : unknown) list += (list.empty() ? "" : ", ") + u;
    throw ValidationError("config", "unknown keys: " + list);
  }
  json effective = defaults;
  detail::merge_into(effective, user);

  LoadedConfig out;
  out.config = from_json(effective, base_dir);
  out.user = user;
  // Echo the canonical form (tabulated CSVs expanded) so the manifest alone reproduces the run.
  out.effective = to_json(out.config);
  out.base_dir = base_dir;
  std::vector<std::string> leaves;
  detail::collect_leaves(out.effective, "", leaves);
  for (const auto& p : leaves)
    if (!detail::has_path(user, p)) out.defaulted.push_back(p);
  return out;
}

inline LoadedConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {}) {
  std::ifstream in(path);
  if (!in) throw ValidationError("config", "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  json user = json::parse(ss.str(), nullptr, false);
  if (user.is_discarded()) throw ValidationError("config", path.string() + " is not valid JSON");
  return load_config_json(std::move(user), overrides, path.has_parent_path() ? path.parent_path() : ".");
}

/// {"path": {"value": v, "defaulted": bool}} for every leaf of the effective config.
inline json annotated_fields(const LoadedConfig& c) {
  json out = json::object();
  std::vector<std::string> leaves;
  detail::collect_leaves(c.effective, "", leaves);
  const std::set<std::string> defaulted(c.defaulted.begin(), c.defaulted.end());
  for (const auto& p : leaves) {
    const json* cur = &c.effective;
    std::size_t start = 0;
    while (true) {
      const auto dot = p.find('.', start);
      cur = &(*cur)[p.substr(start, dot == std::string::npos ? std::string::npos : dot - start)];
      if (dot == std::string::npos) break;
      start = dot + 1;
    }
    out[p] = {{"value", *cur}, {"defaulted", defaulted.count(p) > 0}};
  }
  return out;
}

/// Engine configuration for the TDSE run described by `c`.
inline TdseRunConfig make_run_config(const AppConfig& c, const DerivedParams& d) {
  TdseRunConfig r;
  r.beam = c.beam;
  r.profile = c.profile;
  r.grid = c.grid.build(d);
  r.frame = c.run.frame;
  r.phase_sign = c.run.phase_sign;
  r.potential_sign = c.run.potential_sign;
  r.boundary = c.run.boundary;
  r.observables = c.observables;
  const std::size_t target = std::min(c.output.target_snapshots, kMaxSnapshots);
  const std::size_t auto_stride = std::max<std::size_t>(1, (r.grid.n_steps + target - 1) / target);
  r.snapshot_every = c.run.snapshot_every.value_or(auto_stride);
  if (r.grid.n_steps / r.snapshot_every + 2 > kMaxSnapshots + 1)
    throw ValidationError("run.snapshot_every", "would record more than 2000 snapshots");
  r.keep_snapshots = false;
  return r;
}

inline MassProfile make_mass(MassModel model, const CouplingProfile& c, const RunSpec& run) {
  switch (model) {
    case MassModel::Twisted: return MassProfile::from_coupling(c);
    case MassModel::RealProjection: return MassProfile::real_projection(c);
    case MassModel::TdseEffective: return MassProfile::tdse_effective(c, run.phase_sign, run.potential_sign);
    case MassModel::TanhKink: {
      const auto* k = std::get_if<PhaseProfile::Kink>(&c.phase.variant());
      if (!k) throw ValidationError("spectrum.mass_model", "tanh_kink needs a single-kink profile");
      return MassProfile::tanh_kink(c.kappa_mag, k->center, k->width, k->sign);
    }
  }
  throw ValidationError("mass_model", "unknown");
}

}  // namespace kinkbeam::app
