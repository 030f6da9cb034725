#pragma once

// Run orchestration behind the CLI: simulate, pair generation, sweeps, plot data,
// and the small analysis commands. Every command writes a manifest.json.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "kinkbeam/app/config.hpp"
#include "kinkbeam/app/io.hpp"

namespace kinkbeam::app {

inline constexpr std::string_view kVersion = "0.1.0";

inline std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream ss;
  ss << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return ss.str();
}

inline json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json derived_json(const DerivedParams& d) {
  const auto dp = DiracParams::from(d);
  const auto regime = classify_regime(d);
  return {{"beta", d.beta},
          {"gamma", d.gamma},
          {"kinetic_energy_eV", d.kinetic_energy},
          {"v0_um_per_fs", d.v0},
          {"omega_L_rad_per_fs", d.omega_L},
          {"photon_energy_eV", d.photon_energy},
          {"k_z_per_um", d.k_z},
          {"k0_per_um", d.k0},
          {"p0_eV_fs_per_um", d.p0},
          {"alpha0_per_um", d.alpha0},
          {"alpha1", d.alpha1},
          {"alpha2_um", d.alpha2},
          {"kappa_eV", d.kappa_mag},
          {"bragg_Q", number_or_null(d.bragg_Q)},
          {"regime", std::string(to_string(regime.regime))},
          {"adiabatic_ratio", number_or_null(adiabatic_validity(d))},
          {"sync_residual", d.sync_residual},
          {"dirac_velocity_eV_um", dp.velocity_coeff},
          {"localization_length_um", number_or_null(dp.localization_length)},
          {"rabi_period_fs", d.kappa_mag > 0.0 ? json(std::numbers::pi * PhysicalConstants::hbar / d.kappa_mag)
                                               : json(nullptr)}};
}

inline std::vector<std::string> parameter_warnings(const DerivedParams& d) {
  std::vector<std::string> w;
  const auto r = classify_regime(d);
  if (r.regime != Regime::Bragg)
    w.push_back("regime is " + std::string(to_string(r.regime)) + " (Q = " + format_number(r.Q) +
                "); the two-sideband Dirac reduction does not apply");
  const double a = adiabatic_validity(d);
  if (a < kAdiabaticWarningRatio)
    w.push_back("adiabatic ratio " + format_number(a) + " is below " + format_number(kAdiabaticWarningRatio));
  return w;
}

/// Accumulates output files and writes the manifest.
class Manifest {
public:
  Manifest(std::string command, const LoadedConfig& cfg, fs::path dir) : dir_(std::move(dir)) {
    doc_["kinkbeam_manifest"] = 1;
    doc_["command"] = std::move(command);
    doc_["version"] = std::string(kVersion);
    doc_["status"] = "running";
    doc_["started_utc"] = utc_now();
    doc_["finished_utc"] = nullptr;
    doc_["config"] = cfg.effective;
    doc_["config_fields"] = annotated_fields(cfg);
    doc_["derived"] = nullptr;
    doc_["results"] = json::object();
    doc_["warnings"] = json::array();
    doc_["files"] = json::array();
  }

  json& doc() { return doc_; }
  const fs::path& dir() const { return dir_; }
  fs::path path(const std::string& name) const { return dir_ / name; }

  void add_file(const std::string& name) { files_.push_back(name); }
  void warn(const std::string& w) {
    for (const auto& e : doc_["warnings"])
      if (e == w) return;
    doc_["warnings"].push_back(w);
  }

  void finish(bool ok, const std::string& error = {}) {
    doc_["status"] = ok ? "complete" : "failed";
    if (!ok) doc_["error"] = error;
    doc_["finished_utc"] = utc_now();
    json files = json::array();
    for (const auto& name : files_) {
      const auto p = dir_ / name;
      json f{{"name", name}, {"valid", ok}};
      if (fs::exists(p)) {
        f["bytes"] = fs::file_size(p);
        f["sha256"] = sha256_file(p);
      } else {
        f["valid"] = false;
      }
      files.push_back(f);
    }
    doc_["files"] = files;
    std::ofstream out(dir_ / "manifest.json", std::ios::binary);
    out << doc_.dump(2) << '\n';
    if (!out) throw IoError("cannot write " + (dir_ / "manifest.json").string());
  }

private:
  fs::path dir_;
  json doc_;
  std::vector<std::string> files_;
};

/// Runs `body` and writes the manifest whether it succeeds or throws.
template <class Body>
json with_manifest(const std::string& command, const LoadedConfig& cfg, const fs::path& dir, Body&& body) {
  fs::create_directories(dir);
  Manifest m(command, cfg, dir);
  try {
    body(m);
  } catch (const std::exception& e) {
    m.finish(false, e.what());
    throw;
  }
  m.finish(true);
  return m.doc();
}

// ---------------------------------------------------------------------------
// simulate

inline Wavefunction build_initial_state(const AppConfig& c, const DerivedParams& d, const Grid& grid) {
  if (c.initial_state.kind == InitialKind::JackiwRebbi)
    return initial_jackiw_rebbi(d, c.profile, grid, c.run.phase_sign, c.run.potential_sign);
  GaussianOptions opt;
  opt.chirp_time = c.initial_state.chirp_time;
  if (c.initial_state.bound_state_carrier)
    opt.sideband_carrier = bound_state_carrier(d, c.profile, grid.axis(), c.run.phase_sign, c.run.potential_sign);
  return initial_gaussian(d, c.initial_state.sigma_t, c.initial_state.center, grid, opt);
}

inline std::vector<std::string> population_columns(const ObservableSettings& o) {
  std::vector<std::string> cols;
  if (o.sideband_basis == SidebandBasis::Ladder) {
    for (int n = -o.sideband_n_max; n <= o.sideband_n_max; ++n) cols.push_back("pop_" + std::to_string(n));
  } else {
    for (int j = -o.sideband_n_max - 1; j <= o.sideband_n_max; ++j)
      cols.push_back("pop_" + std::to_string(2 * j + 1) + "/2");
  }
  return cols;
}

/// Momentum bins kept in momentum_series.csv: |k| <= (n_max + 1) k_z.
inline std::vector<std::size_t> momentum_window(const std::vector<double>& k, const DerivedParams& d, int n_max) {
  std::vector<std::size_t> idx;
  const double kmax = (n_max + 1) * d.k_z;
  for (std::size_t m = 0; m < k.size(); ++m)
    if (std::abs(k[m]) <= kmax) idx.push_back(m);
  return idx;
}

struct SimulationSummary {
  double initial_width = 0.0, final_width = 0.0;
  double final_trapped_fraction = 0.0;
  double max_norm_drift = 0.0;
  std::size_t records = 0;
};

inline json summary_json(const SimulationSummary& s) {
  return {{"records", s.records},
          {"initial_rms_width_um", s.initial_width},
          {"final_rms_width_um", s.final_width},
          {"width_ratio", s.final_width / s.initial_width},
          {"final_trapped_fraction", number_or_null(s.final_trapped_fraction)},
          {"max_norm_drift", s.max_norm_drift}};
}

/// Full TDSE run: scalars.csv, snapshots (binary or CSV) and momentum_series.csv.
inline SimulationSummary simulate_into(Manifest& m, const AppConfig& c) {
  const auto d = derive_params(c.beam);
  m.doc()["derived"] = derived_json(d);
  for (const auto& w : parameter_warnings(d)) m.warn(w);
  const auto rc = make_run_config(c, d);
  const auto chi0 = build_initial_state(c, d, rc.grid);
  m.doc()["grid"] = {{"n_points", rc.grid.n_points},
                     {"delta_zeta_um", rc.grid.delta_zeta()},
                     {"tau_step_um", rc.grid.tau_step},
                     {"time_step_fs", rc.grid.time_step()},
                     {"n_steps", rc.grid.n_steps},
                     {"snapshot_every", rc.snapshot_every}};

  const bool plain_gaussian = c.initial_state.kind == InitialKind::Gaussian && !c.initial_state.bound_state_carrier;
  const auto chirp = GaussianChirpParams::from(d, c.initial_state.sigma_t);

  std::optional<SnapshotWriter> bin;
  std::optional<CsvWriter> snap_csv;
  if (c.output.snapshot_format == SnapshotFormat::Binary) {
    bin.emplace(m.path("snapshots.bin"), static_cast<std::uint32_t>(rc.grid.n_points), rc.grid.delta_zeta(),
                rc.grid.tau_step);
    m.add_file("snapshots.bin");
  } else if (c.output.snapshot_format == SnapshotFormat::Csv) {
    snap_csv.emplace(m.path("snapshots.csv"));
    m.add_file("snapshots.csv");
    snap_csv->comment("zeta_um: " + join_numbers(rc.grid.axis().points()));
    std::vector<std::string> h{"step", "time_fs"};
    for (std::size_t i = 0; i < rc.grid.n_points; ++i) {
      h.push_back("re_" + std::to_string(i));
      h.push_back("im_" + std::to_string(i));
    }
    snap_csv->header(h);
  }
  std::optional<CsvWriter> mom;
  std::vector<std::size_t> kwin;
  if (c.output.momentum_series) {
    mom.emplace(m.path("momentum_series.csv"));
    m.add_file("momentum_series.csv");
    const auto k = momentum_axis(rc.grid.n_points, rc.grid.delta_zeta());
    kwin = momentum_window(k, d, c.observables.sideband_n_max);
    std::vector<double> kk;
    for (auto i : kwin) kk.push_back(k[i]);
    mom->comment("k_per_um: " + join_numbers(kk));
    mom->comment("rows: momentum weights |a(k)|^2 dzeta per snapshot; columns after time_fs follow k_per_um");
    std::vector<std::string> h{"step", "time_fs"};
    for (double v : kk) h.push_back("k=" + format_number(v));
    mom->header(h);
  }

  auto observer = [&](std::size_t step, double t, const Wavefunction& chi) {
    if (bin) bin->append(chi.amplitudes);
    if (snap_csv) {
      std::vector<double> row{static_cast<double>(step), t};
      for (auto v : chi.amplitudes) {
        row.push_back(v.real());
        row.push_back(v.imag());
      }
      snap_csv->row(row);
    }
    if (mom) {
      const auto s = momentum_spectrum(chi);
      std::vector<double> row{static_cast<double>(step), t};
      for (auto i : kwin) row.push_back(s.weights[i]);
      mom->row(row);
    }
  };

  Trajectory traj;
  try {
    traj = evolve(chi0, rc, d, observer);
  } catch (...) {
    if (bin) bin->close();
    if (snap_csv) snap_csv->close();
    if (mom) mom->close();
    throw;
  }
  if (bin) bin->close();
  if (snap_csv) snap_csv->close();
  if (mom) mom->close();
  for (const auto& w : traj.warnings) m.warn(w);

  CsvWriter sc(m.path("scalars.csv"));
  m.add_file("scalars.csv");
  sc.comment("trap window: center " + format_number(traj.trap_center) + " um, halfwidth " +
             format_number(traj.trap_halfwidth) + " um");
  std::vector<std::string> h{"step",          "time_fs",       "norm",         "rms_width_um",
                             "width_reliable", "trapped_fraction", "absorbed_norm", "edge_density",
                             "chirp_prediction_um"};
  const auto pop_cols = population_columns(c.observables);
  h.insert(h.end(), pop_cols.begin(), pop_cols.end());
  sc.header(h);
  SimulationSummary s;
  for (std::size_t r = 0; r < traj.size(); ++r) {
    const double pred = plain_gaussian ? chirp_prediction(chirp, c.initial_state.chirp_time + traj.times[r])
                                       : std::numeric_limits<double>::quiet_NaN();
    std::vector<double> row{static_cast<double>(traj.steps[r]),
                            traj.times[r],
                            traj.norm[r],
                            traj.rms_width[r],
                            static_cast<double>(traj.width_reliable[r]),
                            traj.trapped_fraction[r],
                            traj.absorbed_norm[r],
                            traj.edge_density[r],
                            pred};
    for (const auto& [key, p] : traj.sideband_populations[r]) row.push_back(p);
    sc.row(row);
    s.max_norm_drift = std::max(s.max_norm_drift, std::abs(traj.norm[r] + traj.absorbed_norm[r] - traj.norm[0]));
  }
  sc.close();
  s.records = traj.size();
  s.initial_width = traj.rms_width.front();
  s.final_width = traj.rms_width.back();
  s.final_trapped_fraction = traj.trapped_fraction.back();
  m.doc()["results"] = summary_json(s);
  return s;
}

inline json run(const LoadedConfig& cfg, const fs::path& out_dir) {
  return with_manifest("simulate", cfg, out_dir, [&](Manifest& m) { simulate_into(m, cfg.config); });
}

// ---------------------------------------------------------------------------
// derive-params, charge, spectrum, zero-mode

inline json derive_command(const LoadedConfig& cfg, const fs::path& out_dir) {
  return with_manifest("derive-params", cfg, out_dir, [&](Manifest& m) {
    const auto d = derive_params(cfg.config.beam);
    m.doc()["derived"] = derived_json(d);
    m.doc()["results"] = derived_json(d);
    for (const auto& w : parameter_warnings(d)) m.warn(w);
  });
}

inline json charge_command(const LoadedConfig& cfg, const fs::path& out_dir) {
  return with_manifest("charge", cfg, out_dir, [&](Manifest& m) {
    const auto& c = cfg.config;
    const double lo = c.grid.zeta_min, hi = c.grid.zeta_max;
    json r{{"window", {lo, hi}},
           {"charge_e", topological_charge(c.profile, lo, hi)},
           {"charge_quadrature_e", topological_charge_quadrature(c.profile, lo, hi)}};
    const auto centers = c.profile.kink_centers();
    if (centers.size() > 1) {
      json per = json::array();
      for (std::size_t i = 0; i < centers.size(); ++i) {
        const double a = i == 0 ? lo : 0.5 * (centers[i - 1] + centers[i]);
        const double b = i + 1 == centers.size() ? hi : 0.5 * (centers[i] + centers[i + 1]);
        per.push_back({{"center", centers[i]},
                       {"window", {a, b}},
                       {"charge_e", topological_charge(c.profile, a, b)},
                       {"charge_quadrature_e", topological_charge_quadrature(c.profile, a, b)}});
      }
      r["per_kink"] = per;
    }
    m.doc()["results"] = r;
  });
}

inline MassProfile spectrum_mass(const AppConfig& c, const DerivedParams& d, MassModel model) {
  return make_mass(model, CouplingProfile{d.kappa_mag, c.profile}, c.run);
}

inline SpatialAxis spectrum_axis(const SpectrumSpec& s) { return {s.zeta_min, s.zeta_max, s.n_points}; }

inline SpectrumOptions spectrum_options(const SpectrumSpec& s) { return {s.method, s.boundary, s.quadratic_term}; }

struct MidGap {
  std::vector<double> energies;  // the `count` smallest |E|, sorted by |E|
  double gap_edge = 0.0;         // next |E| after them
};

inline MidGap mid_gap(std::vector<double> ev, std::size_t count) {
  std::sort(ev.begin(), ev.end(), [](double a, double b) { return std::abs(a) < std::abs(b); });
  MidGap g;
  for (std::size_t i = 0; i < std::min(count, ev.size()); ++i) g.energies.push_back(ev[i]);
  g.gap_edge = ev.size() > count ? std::abs(ev[count]) : std::numeric_limits<double>::quiet_NaN();
  return g;
}

/// Threshold separating mid-gap states from the continuum when counting them.
inline constexpr double kMidGapFraction = 0.5;

inline json spectrum_command(const LoadedConfig& cfg, const fs::path& out_dir) {
  return with_manifest("spectrum", cfg, out_dir, [&](Manifest& m) {
    const auto& c = cfg.config;
    const auto d = derive_params(c.beam);
    m.doc()["derived"] = derived_json(d);
    const auto dp = DiracParams::from(d);
    const auto ev = dirac_spectrum(spectrum_mass(c, d, c.spectrum.mass_model), dp, spectrum_axis(c.spectrum),
                                   spectrum_options(c.spectrum));
    CsvWriter out(m.path("spectrum.csv"));
    m.add_file("spectrum.csv");
    out.header({"index", "energy_eV", "energy_over_kappa"});
    std::size_t in_gap = 0;
    for (std::size_t i = 0; i < ev.size(); ++i) {
      out.row({static_cast<double>(i), ev[i], ev[i] / d.kappa_mag});
      if (std::abs(ev[i]) < kMidGapFraction * d.kappa_mag) ++in_gap;
    }
    out.close();
    const auto g = mid_gap(ev, std::max<std::size_t>(in_gap, 1));
    json mids = json::array();
    for (double e : g.energies) mids.push_back(e / d.kappa_mag);
    m.doc()["results"] = {{"eigenvalues", ev.size()},
                          {"mid_gap_count", in_gap},
                          {"mid_gap_energies_over_kappa", mids},
                          {"gap_edge_over_kappa", number_or_null(g.gap_edge / d.kappa_mag)}};
  });
}

inline json zero_mode_command(const LoadedConfig& cfg, const fs::path& out_dir) {
  return with_manifest("zero-mode", cfg, out_dir, [&](Manifest& m) {
    const auto& c = cfg.config;
    const auto d = derive_params(c.beam);
    m.doc()["derived"] = derived_json(d);
    const auto dp = DiracParams::from(d);
    const auto axis = spectrum_axis(c.spectrum);
    const auto mass = spectrum_mass(c, d, c.spectrum.mass_model);
    const auto psi = zero_mode(mass, dp, axis);
    CsvWriter out(m.path("zero_mode.csv"));
    m.add_file("zero_mode.csv");
    out.header({"zeta_um", "upper_re", "upper_im", "lower_re", "lower_im", "density"});
    for (std::size_t i = 0; i < axis.n_points; ++i)
      out.row({axis.at(i), psi.upper[i].real(), psi.upper[i].imag(), psi.lower[i].real(), psi.lower[i].imag(),
               std::norm(psi.upper[i]) + std::norm(psi.lower[i])});
    out.close();
    json r{{"residual", dirac_residual(psi, mass, dp)}, {"localization_length_um", dp.localization_length}};
    if (const auto* k = std::get_if<PhaseProfile::Kink>(&c.profile.variant()))
      r["envelope_exponent"] = k->width / dp.localization_length;
    m.doc()["results"] = r;
  });
}

// ---------------------------------------------------------------------------
// pair generation

struct PairResult {
  double separation_fs = 0.0;
  double separation_um = 0.0;
  double splitting_eV = 0.0;
  double gap_edge_eV = 0.0;
  double lobe_contrast = std::numeric_limits<double>::quiet_NaN();
  std::string density_file;
};

/// Inter-lobe minimum over the smaller lobe peak, from a density averaged over
/// one grating period. Lobes are searched within half a separation of each center.
inline double lobe_contrast(const Wavefunction& chi, double left, double right, double window) {
  const auto rho = coarse_density(chi, window);
  const double sep = right - left;
  double peak_l = 0.0, peak_r = 0.0, valley = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < rho.size(); ++i) {
    const double z = chi.grid.zeta(i);
    if (std::abs(z - left) <= 0.5 * sep) peak_l = std::max(peak_l, rho[i]);
    if (std::abs(z - right) <= 0.5 * sep) peak_r = std::max(peak_r, rho[i]);
    if (std::abs(z - 0.5 * (left + right)) <= 0.25 * sep) valley = std::min(valley, rho[i]);
  }
  const double peak = std::min(peak_l, peak_r);
  if (!(peak > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  return valley / peak;
}

inline PhaseProfile pair_profile(const PhaseProfile& base, const PairSpec& spec, double separation_um) {
  if (const auto* p = std::get_if<PhaseProfile::KinkPair>(&base.variant()))
    return PhaseProfile::kink_pair_centered(p->amplitude, 0.5 * (p->left + p->right), separation_um, p->width,
                                            spec.orientation);
  if (const auto* k = std::get_if<PhaseProfile::Kink>(&base.variant()))
    return PhaseProfile::kink_pair_centered(k->amplitude, k->center, separation_um, k->width, spec.orientation);
  throw ValidationError("profile.type", "pair generation needs a kink or kink_pair profile");
}

inline json pair_generation_command(const LoadedConfig& cfg, const fs::path& out_dir) {
  return with_manifest("pair-gen", cfg, out_dir, [&](Manifest& m) {
    const auto& c = cfg.config;
    const auto& spec = c.pair_generation;
    if (spec.separations_fs.empty()) throw ValidationError("pair_generation.separations_fs", "empty");
    const auto d = derive_params(c.beam);
    m.doc()["derived"] = derived_json(d);
    for (const auto& w : parameter_warnings(d)) m.warn(w);
    const auto dp = DiracParams::from(d);
    const SpatialAxis axis{spec.spectrum_zeta_min, spec.spectrum_zeta_max, spec.spectrum_n_points};

    std::vector<PairResult> results;
    for (double sep_fs : spec.separations_fs) {
      PairResult r;
      r.separation_fs = sep_fs;
      r.separation_um = flight_time_to_length(sep_fs, d);
      const auto profile = pair_profile(c.profile, spec, r.separation_um);
      const double width = profile.feature_width();
      if (r.separation_um < 4.0 * width)
        m.warn("separation " + format_number(sep_fs) + " fs is below 4 kink widths; the kinks merge");
      AppConfig pc = c;
      pc.profile = profile;
      const auto ev = dirac_spectrum(spectrum_mass(pc, d, spec.mass_model), dp, axis, {});
      const auto g = mid_gap(ev, 2);
      r.splitting_eV = std::abs(g.energies.at(0) - g.energies.at(1));
      r.gap_edge_eV = g.gap_edge;

      if (spec.run_tdse) {
        AppConfig rcfg = pc;
        rcfg.grid.duration_fs = spec.duration_fs;
        rcfg.initial_state.kind = InitialKind::JackiwRebbi;
        auto rc = make_run_config(rcfg, d);
        rc.snapshot_every = std::max<std::size_t>(rc.grid.n_steps, 1);
        rc.keep_snapshots = true;
        const auto chi0 = build_initial_state(rcfg, d, rc.grid);
        const auto traj = evolve(chi0, rc, d);
        for (const auto& w : traj.warnings) m.warn(w);
        const auto& chi = traj.snapshots.back();
        const auto centers = profile.kink_centers();
        r.lobe_contrast = lobe_contrast(chi, centers.front(), centers.back(), d.grating_period);
        const auto rho = density(chi);
        const auto coarse = coarse_density(chi, d.grating_period);
        std::ostringstream name;
        name << "density_sep_" << format_number(sep_fs) << "fs.csv";
        r.density_file = name.str();
        CsvWriter out(m.path(r.density_file));
        m.add_file(r.density_file);
        out.comment("end-of-run density at t = " + format_number(traj.times.back()) + " fs; coarse = one grating period average");
        out.header({"zeta_um", "density", "coarse_density"});
        for (std::size_t i = 0; i < rho.size(); ++i) out.row({chi.grid.zeta(i), rho[i], coarse[i]});
        out.close();
      }
      results.push_back(r);
    }

    CsvWriter sum(m.path("pair_summary.csv"));
    m.add_file("pair_summary.csv");
    sum.header({"separation_fs", "separation_um", "splitting_eV", "splitting_over_kappa", "beat_period_fs",
                "gap_edge_over_kappa", "lobe_contrast"});
    json arr = json::array();
    for (const auto& r : results) {
      const double beat = r.splitting_eV > 0.0 ? 2.0 * std::numbers::pi * PhysicalConstants::hbar / r.splitting_eV
                                               : std::numeric_limits<double>::infinity();
      sum.row({r.separation_fs, r.separation_um, r.splitting_eV, r.splitting_eV / d.kappa_mag, beat,
               r.gap_edge_eV / d.kappa_mag, r.lobe_contrast});
      arr.push_back({{"separation_fs", r.separation_fs},
                     {"separation_um", r.separation_um},
                     {"splitting_eV", r.splitting_eV},
                     {"splitting_over_kappa", r.splitting_eV / d.kappa_mag},
                     {"beat_period_fs", number_or_null(beat)},
                     {"gap_edge_over_kappa", number_or_null(r.gap_edge_eV / d.kappa_mag)},
                     {"lobe_contrast", number_or_null(r.lobe_contrast)},
                     {"density_file", r.density_file.empty() ? json(nullptr) : json(r.density_file)}});
    }
    sum.close();
    m.doc()["results"] = {{"separations", arr}};
  });
}

// ---------------------------------------------------------------------------
// sweep

struct SweepPoint {
  std::size_t index = 0;
  std::vector<json> values;
  bool ok = false;
  std::string error;
  double Q = 0, adiabatic = 0, localization = 0, exponent = 0, midgap = 0, splitting = 0, width_ratio = 0,
         trapped = 0;
  std::string regime;
};

inline std::size_t sweep_size(const SweepSpec& s) {
  std::size_t n = 1;
  for (const auto& a : s.axes) {
    n *= a.values.size();
    if (n > s.cap) return n;  // already over; stop before it can overflow
  }
  return n;
}

inline SweepPoint sweep_point(const LoadedConfig& base, std::size_t index, const fs::path& dir) {
  const auto& axes = base.config.sweep.axes;
  SweepPoint p;
  p.index = index;
  json user = base.user;
  user.erase("sweep");
  std::size_t rem = index;
  std::vector<json> vals(axes.size());
  for (std::size_t a = axes.size(); a-- > 0;) {
    vals[a] = axes[a].values[rem % axes[a].values.size()];
    rem /= axes[a].values.size();
  }
  p.values = vals;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  p.Q = p.adiabatic = p.localization = p.exponent = p.midgap = p.splitting = p.width_ratio = p.trapped = nan;
  try {
    for (std::size_t a = 0; a < axes.size(); ++a) set_path(user, axes[a].path, vals[a]);
    const auto cfg = load_config_json(user, {}, base.base_dir);
    const auto& c = cfg.config;
    with_manifest("sweep-point", cfg, dir, [&](Manifest& m) {
      const auto d = derive_params(c.beam);
      m.doc()["derived"] = derived_json(d);
      for (const auto& w : parameter_warnings(d)) m.warn(w);
      const auto dp = DiracParams::from(d);
      const auto reg = classify_regime(d);
      p.Q = reg.Q;
      p.regime = std::string(to_string(reg.regime));
      p.adiabatic = adiabatic_validity(d);
      p.localization = dp.localization_length;
      if (const auto* k = std::get_if<PhaseProfile::Kink>(&c.profile.variant())) p.exponent = k->width / p.localization;
      if (c.profile.kink_centers().size() > 0 && d.kappa_mag > 0.0) {
        const auto ev = dirac_spectrum(spectrum_mass(c, d, c.spectrum.mass_model), dp, spectrum_axis(c.spectrum),
                                       spectrum_options(c.spectrum));
        const auto g = mid_gap(ev, 2);
        p.midgap = std::abs(g.energies.at(0)) / d.kappa_mag;
        if (c.profile.kink_centers().size() > 1) p.splitting = std::abs(g.energies.at(0) - g.energies.at(1)) / d.kappa_mag;
      }
      if (base.config.sweep.run_tdse) {
        const auto s = simulate_into(m, c);
        p.width_ratio = s.final_width / s.initial_width;
        p.trapped = s.final_trapped_fraction;
      }
      m.doc()["results"]["sweep_point"] = {{"index", index}, {"values", vals}};
    });
    p.ok = true;
  } catch (const std::exception& e) {
    p.error = e.what();
  }
  return p;
}

/// Runs every point of the cartesian product; rows come out in point order.
inline json sweep(const LoadedConfig& cfg, const fs::path& out_dir, unsigned parallelism) {
  const auto& spec = cfg.config.sweep;
  const std::size_t total = sweep_size(spec);
  if (total > spec.cap)
    throw ValidationError("sweep.cap", "cartesian product exceeds the cap of " + std::to_string(spec.cap));
  return with_manifest("sweep", cfg, out_dir, [&](Manifest& m) {
    std::vector<SweepPoint> points(total);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t i = next++; i < total; i = next++) {
        std::ostringstream name;
        name << "point_" << std::setw(4) << std::setfill('0') << i;
        points[i] = sweep_point(cfg, i, out_dir / name.str());
      }
    };
    const unsigned threads = std::max(1u, std::min<unsigned>(parallelism, static_cast<unsigned>(total)));
    {
      std::vector<std::jthread> pool;
      for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
      worker();
    }
    CsvWriter out(m.path("summary.csv"));
    m.add_file("summary.csv");
    std::vector<std::string> h{"index"};
    for (const auto& a : spec.axes) h.push_back(a.path);
    for (const char* n : {"status", "Q", "regime", "adiabatic_ratio", "localization_length_um", "envelope_exponent",
                          "midgap_energy_over_kappa", "splitting_over_kappa", "width_ratio", "trapped_fraction",
                          "error"})
      h.push_back(n);
    out.header(h);
    std::size_t failed = 0;
    for (const auto& p : points) {
      std::vector<std::string> row{std::to_string(p.index)};
      for (const auto& v : p.values) row.push_back(v.is_string() ? v.get<std::string>() : v.dump());
      row.push_back(p.ok ? "ok" : "error");
      for (double v : {p.Q}) row.push_back(format_number(v));
      row.push_back(p.regime.empty() ? "nan" : p.regime);
      for (double v : {p.adiabatic, p.localization, p.exponent, p.midgap, p.splitting, p.width_ratio, p.trapped})
        row.push_back(format_number(v));
      std::string err = p.error;
      std::replace(err.begin(), err.end(), ',', ';');
      std::replace(err.begin(), err.end(), '\n', ' ');
      row.push_back(err);
      out.row_strings(row);
      if (!p.ok) {
        ++failed;
        m.warn("point " + std::to_string(p.index) + " failed: " + p.error);
      }
    }
    out.close();
    m.doc()["results"] = {{"points", total}, {"failed", failed}};
  });
}

// ---------------------------------------------------------------------------
// plot data

inline const std::vector<std::string>& plot_kinds() {
  static const std::vector<std::string> k{"space_time_heatmap", "momentum_time_heatmap", "profile_snapshots",
                                          "scalar_series"};
  return k;
}

struct PersistedRun {
  json manifest;
  LoadedConfig config;
  DerivedParams derived;
  Grid grid;
  fs::path dir;
};

inline PersistedRun load_run(const fs::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw IoError("no manifest.json in " + dir.string());
  PersistedRun r;
  r.dir = dir;
  r.manifest = json::parse(in, nullptr, false);
  if (r.manifest.is_discarded()) throw IoError("manifest.json is not valid JSON");
  if (r.manifest.value("command", "") != "simulate") throw ValidationError("run", dir.string() + " is not a simulate run");
  if (r.manifest.value("status", "") != "complete") throw ValidationError("run", "run did not complete; outputs are invalid");
  r.config = load_config_json(r.manifest["config"]);
  r.derived = derive_params(r.config.config.beam);
  r.grid = r.config.config.grid.build(r.derived);
  return r;
}

/// Rows of the persisted snapshot matrix as wavefunctions on the run grid.
inline std::vector<Wavefunction> load_snapshots(const PersistedRun& run) {
  std::vector<Wavefunction> out;
  if (fs::exists(run.dir / "snapshots.bin")) {
    const auto m = read_snapshots(run.dir / "snapshots.bin");
    if (m.cols != run.grid.n_points) throw IoError("snapshot width does not match the grid");
    for (std::size_t r = 0; r < m.rows; ++r)
      out.emplace_back(run.grid, std::vector<cplx>(m.row(r), m.row(r) + m.cols));
    return out;
  }
  if (fs::exists(run.dir / "snapshots.csv")) {
    const auto t = read_csv(run.dir / "snapshots.csv");
    for (const auto& row : t.rows) {
      if (row.size() != 2 + 2 * run.grid.n_points) throw IoError("snapshot row width does not match the grid");
      std::vector<cplx> a(run.grid.n_points);
      for (std::size_t i = 0; i < a.size(); ++i) a[i] = {row[2 + 2 * i], row[3 + 2 * i]};
      out.emplace_back(run.grid, std::move(a));
    }
    return out;
  }
  throw ValidationError("output.snapshot_format", "run has no persisted snapshots");
}

inline std::string emit_plot_data(const fs::path& run_dir, const std::string& kind, const fs::path& out_dir) {
  if (std::find(plot_kinds().begin(), plot_kinds().end(), kind) == plot_kinds().end())
    throw ValidationError("kind", "unknown plot kind '" + kind +
                                      "' (expected space_time_heatmap, momentum_time_heatmap, profile_snapshots, "
                                      "scalar_series)");
  const auto run = load_run(run_dir);
  fs::create_directories(out_dir);
  const auto path = out_dir / (kind + ".csv");
  const auto scalars = read_csv(run_dir / "scalars.csv");
  std::vector<double> times;
  const auto tcol = scalars.column("time_fs");
  for (const auto& row : scalars.rows) times.push_back(row[tcol]);

  CsvWriter out(path);
  if (kind == "space_time_heatmap") {
    const auto snaps = load_snapshots(run);
    out.comment("density |chi|^2; rows = snapshots (time_fs), columns = grid points (zeta_um)");
    out.comment("zeta_um: " + join_numbers(run.grid.axis().points()));
    out.comment("time_fs: " + join_numbers(times));
    for (const auto& s : snaps) out.row(density(s));
  } else if (kind == "momentum_time_heatmap") {
    const auto t = read_csv(run_dir / "momentum_series.csv");
    std::vector<double> k;
    for (std::size_t i = 2; i < t.columns.size(); ++i) k.push_back(std::stod(t.columns[i].substr(2)));
    out.comment("momentum weight |a(k)|^2 dzeta; rows = snapshots (time_fs), columns = k_per_um (relative to k0)");
    out.comment("k_per_um: " + join_numbers(k));
    out.comment("time_fs: " + join_numbers(times));
    for (const auto& row : t.rows) out.row(std::vector<double>(row.begin() + 2, row.end()));
  } else if (kind == "profile_snapshots") {
    const auto snaps = load_snapshots(run);
    constexpr std::size_t kProfiles = 6;
    std::vector<std::size_t> pick;
    const std::size_t n = snaps.size();
    for (std::size_t j = 0; j < std::min(kProfiles, n); ++j)
      pick.push_back(n == 1 ? 0 : j * (n - 1) / (std::min(kProfiles, n) - 1));
    std::vector<std::string> h{"zeta_um"};
    for (auto i : pick) h.push_back("t=" + format_number(times.at(i)) + "fs");
    out.comment("density |chi|^2 at selected snapshots");
    out.header(h);
    std::vector<std::vector<double>> rho;
    for (auto i : pick) rho.push_back(density(snaps[i]));
    for (std::size_t g = 0; g < run.grid.n_points; ++g) {
      std::vector<double> row{run.grid.zeta(g)};
      for (const auto& r : rho) row.push_back(r[g]);
      out.row(row);
    }
  } else {
    out.header(scalars.columns);
    for (const auto& row : scalars.rows) out.row(row);
  }
  out.close();
  return path.string();
}

}  // namespace kinkbeam::app
