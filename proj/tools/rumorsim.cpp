// rumorsim: deterministic and stochastic simulation of competing rumor /
// refutation spread, plus one-at-a-time sensitivity sweeps.
//
// Subcommands: run, sweep, stochastic, compare, presets, replay.
// Exit codes: 0 success, 1 usage or environment error, 2 validation error,
// 3 numerical divergence. Diagnostics go to stderr; data goes to files and
// stdout only.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rumorsim/analysis.hpp"
#include "rumorsim/csv_io.hpp"
#include "rumorsim/gillespie.hpp"
#include "rumorsim/scenario.hpp"
#include "rumorsim/version.hpp"

namespace fs = std::filesystem;
using namespace rumorsim;

namespace {

struct CommonOpts {
  std::string scenario_file;
  std::string preset = "initial-value";
  double n = 10000.0;
  std::string mode;
  double dt = 0.0;
  double t_end = 0.0;
  double output_every = 0.0;
  double threshold_frac = kDefaultThresholdFrac;
  std::string out_dir = ".";

  CLI::Option* mode_opt = nullptr;
  CLI::Option* dt_opt = nullptr;
  CLI::Option* t_end_opt = nullptr;
  CLI::Option* output_every_opt = nullptr;
};

void add_common_options(CLI::App* cmd, CommonOpts& o, bool with_threshold) {
  auto* sc = cmd->add_option("--scenario", o.scenario_file, "Scenario JSON file");
  cmd->add_option("--preset", o.preset, "Preset name (see `presets`)")->excludes(sc);
  cmd->add_option("--n", o.n, "Population size when expanding a preset");
  o.mode_opt = cmd->add_option("--mode", o.mode, "Override mode: literal|conserving")
                   ->check(CLI::IsMember({"literal", "conserving"}));
  o.dt_opt = cmd->add_option("--dt", o.dt, "Override integration step, days");
  o.t_end_opt = cmd->add_option("--t-end", o.t_end, "Override horizon, days");
  o.output_every_opt =
      cmd->add_option("--output-every", o.output_every, "Override output cadence, days");
  cmd->add_option("--out", o.out_dir, "Output directory (created if missing)");
  if (with_threshold)
    cmd->add_option("--threshold-frac", o.threshold_frac,
                    "Duration threshold as a fraction of n");
}

Scenario resolve_scenario(const CommonOpts& o) {
  Scenario sc;
  if (!o.scenario_file.empty()) {
    sc = load_scenario(o.scenario_file);
  } else {
    const auto id = preset_from_name(o.preset);
    if (!id) throw ValidationError("unknown preset: " + o.preset);
    sc = expand_preset(*id, o.n);
  }
  if (o.mode_opt && o.mode_opt->count() > 0)
    sc.mode = (o.mode == "literal") ? RhsMode::Literal : RhsMode::Conserving;
  if (o.dt_opt && o.dt_opt->count() > 0) sc.controls.dt = o.dt;
  if (o.t_end_opt && o.t_end_opt->count() > 0) sc.controls.t_end = o.t_end;
  if (o.output_every_opt && o.output_every_opt->count() > 0)
    sc.controls.output_every = o.output_every;
  validate_scenario(sc).require();
  return sc;
}

fs::path prepare_out_dir(const std::string& dir) {
  fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + p.string());
  return p;
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> grid;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) grid.push_back(parse_double(item));
  return grid;
}

std::string join_grid(const std::vector<double>& grid) {
  std::string out;
  for (double v : grid) {
    if (!out.empty()) out += ',';
    out += format_double(v);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Command implementations (shared with replay)
// ---------------------------------------------------------------------------

void exec_run(const Scenario& sc, const fs::path& out_dir) {
  const Trajectory traj = run_scenario(sc);
  write_trajectory_csv(traj, out_dir / "trajectory.csv");
  MetaEntries meta{{"command", "run"}};
  append_scenario_meta(meta, sc);
  write_meta(meta, out_dir / "trajectory.meta");
  std::cerr << "wrote " << (out_dir / "trajectory.csv").string() << " (" << traj.times.size()
            << " rows)\n";
}

void exec_sweep(const Scenario& sc, const std::string& param, const std::vector<double>& grid,
                double threshold_frac, const fs::path& out_dir) {
  const SweepReport report = sweep(sc, param, grid, threshold_frac);
  const fs::path csv = out_dir / ("sweep_" + param + ".csv");
  write_sweep_csv(report, csv);
  MetaEntries meta{{"command", "sweep"}};
  append_scenario_meta(meta, sc);
  meta.emplace_back("sweep_param", param);
  meta.emplace_back("grid", join_grid(grid));
  meta.emplace_back("threshold_frac", format_double(threshold_frac));
  write_meta(meta, out_dir / ("sweep_" + param + ".meta"));

  std::cout << "parameter=" << param << " points=" << report.grid.size() << "\n";
  for (const MetricTrend& t : report.directions) {
    std::cout << "metric=" << t.metric << " direction=" << to_string(t.direction)
              << " early_late_ratio=" << format_double(t.early_late_ratio)
              << " pacing=" << pacing_label(t.early_late_ratio) << "\n";
  }
  std::cerr << "wrote " << csv.string() << "\n";
}

void exec_stochastic(const Scenario& sc, std::size_t runs, std::uint64_t seed,
                     const fs::path& out_dir) {
  const auto ensemble = run_scenario_ensemble(sc, runs, seed);
  const EnsembleStats stats = ensemble_stats(ensemble);
  write_ensemble_csv(stats, out_dir / "ensemble.csv");
  MetaEntries meta{{"command", "stochastic"}};
  append_scenario_meta(meta, sc);
  meta.emplace_back("runs", std::to_string(runs));
  meta.emplace_back("seed", std::to_string(seed));
  meta.emplace_back("rng", "mt19937_64");
  meta.emplace_back("seed_split", "splitmix64(seed, run_index)");
  write_meta(meta, out_dir / "ensemble.meta");
  std::cerr << "wrote " << (out_dir / "ensemble.csv").string() << " (" << runs << " runs)\n";
}

void exec_compare(const Scenario& sc, std::size_t runs, std::uint64_t seed,
                  const fs::path& out_dir) {
  if (sc.mode != RhsMode::Conserving)
    throw ValidationError("mode: compare requires conserving mode");
  const Trajectory ode = run_scenario(sc);
  const auto ensemble = run_scenario_ensemble(sc, runs, seed);
  const EnsembleStats stats = ensemble_stats(ensemble);
  write_compare_csv(ode, stats, out_dir / "compare.csv");
  MetaEntries meta{{"command", "compare"}};
  append_scenario_meta(meta, sc);
  meta.emplace_back("runs", std::to_string(runs));
  meta.emplace_back("seed", std::to_string(seed));
  meta.emplace_back("rng", "mt19937_64");
  meta.emplace_back("seed_split", "splitmix64(seed, run_index)");
  write_meta(meta, out_dir / "compare.meta");

  // summary: how often the ensemble mean I_A stays inside 3 standard errors
  // (plus a one-individual floor for points where every run has settled)
  const double root_runs = std::sqrt(static_cast<double>(stats.runs));
  std::size_t inside = 0, inside_strict = 0;
  for (std::size_t i = 0; i < stats.times.size(); ++i) {
    const double dev = std::abs(stats.mean[i].ia - ode.states[i].ia);
    const double se = stats.sd[i].ia / root_runs;
    if (dev <= 3.0 * se) ++inside_strict;
    if (dev <= 3.0 * se + 1.0) ++inside;
  }
  const auto points = static_cast<double>(stats.times.size());
  std::cout << "points=" << stats.times.size()
            << " within_3se_plus_one=" << format_double(static_cast<double>(inside) / points)
            << " within_3se_strict="
            << format_double(static_cast<double>(inside_strict) / points) << "\n";
  std::cerr << "wrote " << (out_dir / "compare.csv").string() << "\n";
}

void exec_presets(double n) {
  for (PresetId id : kAllPresets) {
    const Scenario sc = expand_preset(id, n);
    std::cout << preset_name(id) << ":\n";
    switch (id) {
      case PresetId::WeakContact:
        std::cout << "  defining: w1 = w2 = w3 = 4 (weak dissemination)\n";
        break;
      case PresetId::StrongContact:
        std::cout << "  defining: w1 = w2 = w3 = 8 (strong dissemination)\n";
        break;
      case PresetId::LowQuality:
        std::cout << "  defining: b1 > b2 (rumors recognized poorly)\n";
        break;
      case PresetId::HighQuality:
        std::cout << "  defining: b1 < b2 (rumors recognized well)\n";
        break;
      case PresetId::InitialValue:
        std::cout << "  defining: baseline with active refutation channels\n";
        break;
    }
    std::cout << "  params: b1=" << format_double(sc.params.b1)
              << " b2=" << format_double(sc.params.b2) << " o=" << format_double(sc.params.o)
              << " w1=" << format_double(sc.params.w1) << " w2=" << format_double(sc.params.w2)
              << " w3=" << format_double(sc.params.w3) << " r1=" << format_double(sc.params.r1)
              << " r2=" << format_double(sc.params.r2) << " n=" << format_double(sc.params.n)
              << "\n";
    std::cout << "  initial: s=" << format_double(sc.initial.s)
              << " ia=" << format_double(sc.initial.ia) << " ib=" << format_double(sc.initial.ib)
              << " r=" << format_double(sc.initial.r)
              << "  debunk_delay=" << format_double(sc.debunk_delay) << "\n";
    std::cout << "  controls: dt=" << format_double(sc.controls.dt)
              << " t_end=" << format_double(sc.controls.t_end)
              << " output_every=" << format_double(sc.controls.output_every)
              << " method=" << to_string(sc.controls.method)
              << " clamp_negatives=" << (sc.controls.clamp_negatives ? "true" : "false")
              << " mode=" << to_string(sc.mode) << "\n";
    std::cout << "  note: all magnitudes except the defining values are implementation"
                 " defaults\n";
  }
}

void exec_replay(const fs::path& meta_path, const fs::path& out_dir) {
  const MetaEntries meta = read_meta(meta_path);
  const std::string command = meta_require(meta, "command");
  const Scenario sc = scenario_from_meta(meta);
  if (command == "run") {
    exec_run(sc, out_dir);
  } else if (command == "sweep") {
    exec_sweep(sc, meta_require(meta, "sweep_param"), parse_grid(meta_require(meta, "grid")),
               parse_double(meta_require(meta, "threshold_frac")), out_dir);
  } else if (command == "stochastic") {
    exec_stochastic(sc, std::stoull(meta_require(meta, "runs")),
                    std::stoull(meta_require(meta, "seed")), out_dir);
  } else if (command == "compare") {
    exec_compare(sc, std::stoull(meta_require(meta, "runs")),
                 std::stoull(meta_require(meta, "seed")), out_dir);
  } else {
    throw ValidationError("meta command: unknown command \"" + command + "\"");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Competitive rumor / refutation spread simulator"};
  app.set_version_flag("--version", std::string("rumorsim ") + kVersion);
  app.require_subcommand(1);

  CommonOpts run_opts, sweep_opts, stochastic_opts, compare_opts;

  auto* cmd_run = app.add_subcommand("run", "Integrate one scenario and write trajectory.csv");
  add_common_options(cmd_run, run_opts, false);

  auto* cmd_sweep =
      app.add_subcommand("sweep", "One-at-a-time sensitivity sweep over one parameter");
  add_common_options(cmd_sweep, sweep_opts, true);
  std::string sweep_param;
  std::string sweep_grid_text;
  cmd_sweep->add_option("--param", sweep_param, "Parameter to sweep: b1|b2|o|w1|w2|w3")
      ->required();
  cmd_sweep->add_option("--grid", sweep_grid_text,
                        "Comma-separated grid values (default: 0..1 step 0.1 for fractions, "
                        "0..16 step 1 for contact weights)");

  auto* cmd_stochastic =
      app.add_subcommand("stochastic", "Run a stochastic ensemble and write ensemble.csv");
  add_common_options(cmd_stochastic, stochastic_opts, false);
  std::size_t stochastic_runs = 200;
  std::uint64_t stochastic_seed = 1;
  cmd_stochastic->add_option("--runs", stochastic_runs, "Number of sample paths");
  cmd_stochastic->add_option("--seed", stochastic_seed, "Base RNG seed");

  auto* cmd_compare = app.add_subcommand(
      "compare", "Deterministic run vs stochastic ensemble deviation table");
  add_common_options(cmd_compare, compare_opts, false);
  std::size_t compare_runs = 200;
  std::uint64_t compare_seed = 1;
  cmd_compare->add_option("--runs", compare_runs, "Number of sample paths");
  cmd_compare->add_option("--seed", compare_seed, "Base RNG seed");

  auto* cmd_presets = app.add_subcommand("presets", "List presets with expanded values");
  double presets_n = 10000.0;
  cmd_presets->add_option("--n", presets_n, "Population size to expand with");

  auto* cmd_replay =
      app.add_subcommand("replay", "Re-execute a command from its .meta sidecar");
  std::string replay_meta;
  std::string replay_out = ".";
  cmd_replay->add_option("meta", replay_meta, "Path to a .meta sidecar")->required();
  cmd_replay->add_option("--out", replay_out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (cmd_run->parsed()) {
      exec_run(resolve_scenario(run_opts), prepare_out_dir(run_opts.out_dir));
    } else if (cmd_sweep->parsed()) {
      const Scenario sc = resolve_scenario(sweep_opts);
      const std::vector<double> grid =
          sweep_grid_text.empty() ? default_sweep_grid(sweep_param) : parse_grid(sweep_grid_text);
      exec_sweep(sc, sweep_param, grid, sweep_opts.threshold_frac,
                 prepare_out_dir(sweep_opts.out_dir));
    } else if (cmd_stochastic->parsed()) {
      exec_stochastic(resolve_scenario(stochastic_opts), stochastic_runs, stochastic_seed,
                      prepare_out_dir(stochastic_opts.out_dir));
    } else if (cmd_compare->parsed()) {
      exec_compare(resolve_scenario(compare_opts), compare_runs, compare_seed,
                   prepare_out_dir(compare_opts.out_dir));
    } else if (cmd_presets->parsed()) {
      exec_presets(presets_n);
    } else if (cmd_replay->parsed()) {
      exec_replay(replay_meta, prepare_out_dir(replay_out));
    }
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const DivergenceError& e) {
    std::cerr << "numerical divergence at t=" << e.time << " days: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
