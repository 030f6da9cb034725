// kinkbeam command-line front end.

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kinkbeam/app/runner.hpp"

namespace {

namespace fs = std::filesystem;
using namespace kinkbeam;
using namespace kinkbeam::app;

enum Exit { kOk = 0, kValidation = 1, kNumerical = 2 };

struct Options {
  std::string config;
  std::string out;
  unsigned parallel = 1;
  std::optional<long long> seed;  // reserved; the engine is deterministic
  std::vector<std::string> overrides;
  std::string run_dir;
  std::string kind;
};

fs::path output_dir(const Options& o, const std::string& command) {
  if (!o.out.empty()) return o.out;
  const char* root = std::getenv("KINKBEAM_OUT");
  return fs::path(root && *root ? root : "kinkbeam_out") / command;
}

LoadedConfig load(const Options& o) {
  if (o.config.empty()) return load_config_json(json::object(), o.overrides);
  return load_config(o.config, o.overrides);
}

void report(const json& manifest, const fs::path& dir) {
  json brief{{"status", manifest["status"]}, {"output", dir.string()}, {"results", manifest["results"]}};
  if (!manifest["warnings"].empty()) brief["warnings"] = manifest["warnings"];
  std::cout << brief.dump(2) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Flying topological bound states in a phase-twisted near field"};
  app.require_subcommand(1);
  Options o;

  auto common = [&o](CLI::App* sub) {
    sub->add_option("--config", o.config, "JSON config file (omit for all defaults)")->check(CLI::ExistingFile);
    sub->add_option("--out", o.out, "output directory (default $KINKBEAM_OUT/<command>)");
    sub->add_option("--override", o.overrides, "dotted.key=value, repeatable")->allow_extra_args(false);
    sub->add_option("--parallel", o.parallel, "worker threads for sweeps")->check(CLI::PositiveNumber);
    sub->add_option("--seed", o.seed, "reserved; results do not depend on it");
  };

  auto* derive = app.add_subcommand("derive-params", "derived constants, regime and warnings");
  auto* simulate = app.add_subcommand("simulate", "TDSE run with persisted trajectory");
  auto* zero = app.add_subcommand("zero-mode", "closed-form zero mode of the configured mass");
  auto* spectrum = app.add_subcommand("spectrum", "Dirac spectrum of the configured mass");
  auto* charge = app.add_subcommand("charge", "topological charge of the phase profile");
  auto* pair = app.add_subcommand("pair-gen", "kink-antikink splitting and end-of-run densities");
  auto* sweep_cmd = app.add_subcommand("sweep", "cartesian parameter sweep");
  auto* plot = app.add_subcommand("plot-data", "plot-ready matrices from a simulate run");
  for (auto* s : {derive, simulate, zero, spectrum, charge, pair, sweep_cmd, plot}) common(s);
  plot->add_option("--run", o.run_dir, "directory of a completed simulate run")->required()->check(CLI::ExistingDirectory);
  plot->add_option("--kind", o.kind, "space_time_heatmap | momentum_time_heatmap | profile_snapshots | scalar_series")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidation;
  }

  try {
    auto* sub = app.get_subcommands().front();
    const std::string name = sub->get_name();
    const auto dir = output_dir(o, name);
    if (sub == plot) {
      const auto path = emit_plot_data(o.run_dir, o.kind, o.out.empty() ? fs::path(o.run_dir) / "plot" : fs::path(o.out));
      std::cout << path << '\n';
      return kOk;
    }
    const auto cfg = load(o);
    json manifest;
    if (sub == derive) manifest = derive_command(cfg, dir);
    else if (sub == simulate) manifest = run(cfg, dir);
    else if (sub == zero) manifest = zero_mode_command(cfg, dir);
    else if (sub == spectrum) manifest = spectrum_command(cfg, dir);
    else if (sub == charge) manifest = charge_command(cfg, dir);
    else if (sub == pair) manifest = pair_generation_command(cfg, dir);
    else manifest = sweep(cfg, dir, o.parallel);
    report(manifest, dir);
    return kOk;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const ValidationError& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidation;
  }
}
