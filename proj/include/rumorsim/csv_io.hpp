#ifndef RUMORSIM_CSV_IO_HPP
#define RUMORSIM_CSV_IO_HPP

#include <cerrno>
#include <charconv>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "rumorsim/analysis.hpp"
#include "rumorsim/gillespie.hpp"
#include "rumorsim/integrator.hpp"
#include "rumorsim/scenario.hpp"
#include "rumorsim/version.hpp"

namespace rumorsim {

/// Shortest decimal form that parses back to the identical double.
inline std::string format_double(double v) {
  char buf[40];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

inline double parse_double(std::string_view text) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw ValidationError("not a number: \"" + std::string(text) + "\"");
  return v;
}

namespace detail {

inline std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);  // binary keeps Unix line endings everywhere
  if (!out)
    throw std::runtime_error("cannot write " + path.string() + ": " + std::strerror(errno));
  return out;
}

}  // namespace detail

/// Columns: time,s,ia,ib,r. One row per output time, full double precision,
/// Unix line endings. An empty trajectory produces a header-only file.
inline void write_trajectory_csv(const Trajectory& traj, const std::filesystem::path& path) {
  auto out = detail::open_for_write(path);
  out << "time,s,ia,ib,r\n";
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    const StateVec& x = traj.states[i];
    out << format_double(traj.times[i]) << ',' << format_double(x.s) << ','
        << format_double(x.ia) << ',' << format_double(x.ib) << ',' << format_double(x.r)
        << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

/// Columns: param_value,peak_ia,peak_time,duration,spread_scale,final_r.
inline void write_sweep_csv(const SweepReport& report, const std::filesystem::path& path) {
  auto out = detail::open_for_write(path);
  out << "param_value,peak_ia,peak_time,duration,spread_scale,final_r\n";
  for (std::size_t i = 0; i < report.grid.size(); ++i) {
    const SimMetrics& m = report.metrics[i];
    out << format_double(report.grid[i]) << ',' << format_double(m.peak_ia) << ','
        << format_double(m.peak_time) << ',' << format_double(m.duration) << ','
        << format_double(m.spread_scale) << ',' << format_double(m.final_r) << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

/// Columns: time, then mean and sample sd per compartment.
inline void write_ensemble_csv(const EnsembleStats& stats, const std::filesystem::path& path) {
  auto out = detail::open_for_write(path);
  out << "time,mean_s,mean_ia,mean_ib,mean_r,sd_s,sd_ia,sd_ib,sd_r\n";
  for (std::size_t i = 0; i < stats.times.size(); ++i) {
    const StateVec& m = stats.mean[i];
    const StateVec& d = stats.sd[i];
    out << format_double(stats.times[i]) << ',' << format_double(m.s) << ','
        << format_double(m.ia) << ',' << format_double(m.ib) << ',' << format_double(m.r)
        << ',' << format_double(d.s) << ',' << format_double(d.ia) << ','
        << format_double(d.ib) << ',' << format_double(d.r) << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

/// Per-time deviation table between a deterministic run and an ensemble on the
/// same grid. abs_dev_* = |ensemble mean - ode|, se_* = sd / sqrt(runs).
inline void write_compare_csv(const Trajectory& ode, const EnsembleStats& stats,
                              const std::filesystem::path& path) {
  if (ode.times != stats.times)
    throw ValidationError("compare: deterministic run and ensemble grids differ");
  auto out = detail::open_for_write(path);
  out << "time,ode_s,ode_ia,ode_ib,ode_r,mean_s,mean_ia,mean_ib,mean_r,"
         "se_s,se_ia,se_ib,se_r,abs_dev_s,abs_dev_ia,abs_dev_ib,abs_dev_r\n";
  const double root_runs = std::sqrt(static_cast<double>(stats.runs));
  for (std::size_t i = 0; i < stats.times.size(); ++i) {
    const StateVec& o = ode.states[i];
    const StateVec& m = stats.mean[i];
    const StateVec& d = stats.sd[i];
    out << format_double(stats.times[i]);
    for (double v : {o.s, o.ia, o.ib, o.r}) out << ',' << format_double(v);
    for (double v : {m.s, m.ia, m.ib, m.r}) out << ',' << format_double(v);
    for (double v : {d.s / root_runs, d.ia / root_runs, d.ib / root_runs, d.r / root_runs})
      out << ',' << format_double(v);
    out << ',' << format_double(std::abs(m.s - o.s)) << ','
        << format_double(std::abs(m.ia - o.ia)) << ',' << format_double(std::abs(m.ib - o.ib))
        << ',' << format_double(std::abs(m.r - o.r)) << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

// ---------------------------------------------------------------------------
// Run metadata sidecars (key=value lines)
// ---------------------------------------------------------------------------

using MetaEntries = std::vector<std::pair<std::string, std::string>>;

inline void write_meta(const MetaEntries& entries, const std::filesystem::path& path) {
  auto out = detail::open_for_write(path);
  for (const auto& [key, value] : entries) out << key << '=' << value << '\n';
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

inline MetaEntries read_meta(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open meta file: " + path.string());
  MetaEntries entries;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ValidationError("malformed meta line in " + path.string() + ": " + line);
    entries.emplace_back(line.substr(0, eq), line.substr(eq + 1));
  }
  return entries;
}

inline std::optional<std::string> meta_get(const MetaEntries& entries, std::string_view key) {
  for (const auto& [k, v] : entries)
    if (k == key) return v;
  return std::nullopt;
}

inline std::string meta_require(const MetaEntries& entries, std::string_view key) {
  if (auto v = meta_get(entries, key)) return *v;
  throw ValidationError("meta file is missing key: " + std::string(key));
}

/// Everything needed to reproduce a run: the fully normalized scenario plus
/// tool identity. Command-specific keys (seed, runs, sweep grid, ...) are
/// appended by the caller.
inline void append_scenario_meta(MetaEntries& m, const Scenario& sc) {
  m.emplace_back("tool", "rumorsim");
  m.emplace_back("version", kVersion);
  m.emplace_back("label", sc.label);
  m.emplace_back("mode", to_string(sc.mode));
  m.emplace_back("b1", format_double(sc.params.b1));
  m.emplace_back("b2", format_double(sc.params.b2));
  m.emplace_back("o", format_double(sc.params.o));
  m.emplace_back("w1", format_double(sc.params.w1));
  m.emplace_back("w2", format_double(sc.params.w2));
  m.emplace_back("w3", format_double(sc.params.w3));
  m.emplace_back("r1", format_double(sc.params.r1));
  m.emplace_back("r2", format_double(sc.params.r2));
  m.emplace_back("n", format_double(sc.params.n));
  m.emplace_back("initial_s", format_double(sc.initial.s));
  m.emplace_back("initial_ia", format_double(sc.initial.ia));
  m.emplace_back("initial_ib", format_double(sc.initial.ib));
  m.emplace_back("initial_r", format_double(sc.initial.r));
  m.emplace_back("debunk_delay", format_double(sc.debunk_delay));
  m.emplace_back("allow_equal_seeds", sc.allow_equal_seeds ? "true" : "false");
  m.emplace_back("dt", format_double(sc.controls.dt));
  m.emplace_back("t_end", format_double(sc.controls.t_end));
  m.emplace_back("output_every", format_double(sc.controls.output_every));
  m.emplace_back("method", to_string(sc.controls.method));
  m.emplace_back("clamp_negatives", sc.controls.clamp_negatives ? "true" : "false");
}

inline Scenario scenario_from_meta(const MetaEntries& m) {
  Scenario sc;
  sc.label = meta_require(m, "label");
  const std::string mode = meta_require(m, "mode");
  if (mode == "literal") sc.mode = RhsMode::Literal;
  else if (mode == "conserving") sc.mode = RhsMode::Conserving;
  else throw ValidationError("meta mode: must be \"literal\" or \"conserving\"");
  sc.params.b1 = parse_double(meta_require(m, "b1"));
  sc.params.b2 = parse_double(meta_require(m, "b2"));
  sc.params.o = parse_double(meta_require(m, "o"));
  sc.params.w1 = parse_double(meta_require(m, "w1"));
  sc.params.w2 = parse_double(meta_require(m, "w2"));
  sc.params.w3 = parse_double(meta_require(m, "w3"));
  sc.params.r1 = parse_double(meta_require(m, "r1"));
  sc.params.r2 = parse_double(meta_require(m, "r2"));
  sc.params.n = parse_double(meta_require(m, "n"));
  sc.initial.s = parse_double(meta_require(m, "initial_s"));
  sc.initial.ia = parse_double(meta_require(m, "initial_ia"));
  sc.initial.ib = parse_double(meta_require(m, "initial_ib"));
  sc.initial.r = parse_double(meta_require(m, "initial_r"));
  sc.debunk_delay = parse_double(meta_require(m, "debunk_delay"));
  sc.allow_equal_seeds = meta_require(m, "allow_equal_seeds") == "true";
  sc.controls.dt = parse_double(meta_require(m, "dt"));
  sc.controls.t_end = parse_double(meta_require(m, "t_end"));
  sc.controls.output_every = parse_double(meta_require(m, "output_every"));
  const std::string method = meta_require(m, "method");
  if (method == "rk4") sc.controls.method = Method::RK4;
  else if (method == "euler") sc.controls.method = Method::Euler;
  else throw ValidationError("meta method: must be \"rk4\" or \"euler\"");
  sc.controls.clamp_negatives = meta_require(m, "clamp_negatives") == "true";
  validate_scenario(sc).require();
  return sc;
}

}  // namespace rumorsim

#endif  // RUMORSIM_CSV_IO_HPP
