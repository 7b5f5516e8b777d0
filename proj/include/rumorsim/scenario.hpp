#ifndef RUMORSIM_SCENARIO_HPP
#define RUMORSIM_SCENARIO_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "rumorsim/detail/parallel.hpp"
#include "rumorsim/gillespie.hpp"
#include "rumorsim/integrator.hpp"
#include "rumorsim/model.hpp"

namespace rumorsim {

/// A complete, runnable experiment configuration.
///
/// `initial` holds the seeds of both information types. When debunk_delay is
/// positive, the refuter seed is held out of play: the run starts from
/// (s + ib, ia, 0, r) and at t = debunk_delay the seed is injected back by
/// moving min(ib, S(t)) individuals from S to I_B.
struct Scenario {
  ModelParams params;
  StateVec initial;
  double debunk_delay = 0.0;      ///< days before the refutation seed launches
  bool allow_equal_seeds = false; ///< relax the ia > ib seed rule to ia >= ib
  RhsMode mode = RhsMode::Conserving;
  IntegrationControls controls;
  std::string label;
};

inline ValidationResult validate_scenario(const Scenario& sc) {
  ValidationResult res = validate_params(sc.params);
  res.merge(validate_state(sc.initial));
  res.merge(validate_controls(sc.controls));
  if (!res.ok()) return res;

  if (std::abs(sc.initial.sum() - sc.params.n) > 1e-9 * sc.params.n)
    res.violations.push_back({"initial", "compartments must sum to n"});
  if (sc.allow_equal_seeds) {
    if (!(sc.initial.ia >= sc.initial.ib))
      res.violations.push_back({"initial.ia", "seed rule requires ia >= ib"});
  } else if (!(sc.initial.ia > sc.initial.ib)) {
    res.violations.push_back(
        {"initial.ia", "seed rule requires ia > ib (set allow_equal_seeds to relax to >=)"});
  }
  if (!(sc.debunk_delay >= 0.0) || !std::isfinite(sc.debunk_delay)) {
    res.violations.push_back({"debunk_delay", "must be finite and >= 0"});
  } else if (sc.debunk_delay > 0.0 && sc.debunk_delay < sc.controls.t_end) {
    const double k = std::round(sc.debunk_delay / sc.controls.output_every);
    if (std::abs(sc.debunk_delay - k * sc.controls.output_every) > 1e-9)
      res.violations.push_back(
          {"debunk_delay", "must be an integer multiple of output_every (or >= t_end)"});
    else if (sc.controls.t_end - sc.debunk_delay < sc.controls.dt)
      res.violations.push_back(
          {"debunk_delay",
           "leaves no room to integrate after the launch (use >= t_end to disable it)"});
  }
  return res;
}

// ---------------------------------------------------------------------------
// Presets
// ---------------------------------------------------------------------------

/// Canned scenarios. initial-value is the baseline used by default everywhere;
/// low-quality / high-quality differ only by swapping b1 and b2; weak-contact /
/// strong-contact pin every contact weight to 4 and 8 respectively.
enum class PresetId { InitialValue, LowQuality, HighQuality, WeakContact, StrongContact };

inline constexpr std::array<PresetId, 5> kAllPresets = {
    PresetId::InitialValue, PresetId::LowQuality, PresetId::HighQuality,
    PresetId::WeakContact, PresetId::StrongContact};

inline const char* preset_name(PresetId id) {
  switch (id) {
    case PresetId::InitialValue: return "initial-value";
    case PresetId::LowQuality: return "low-quality";
    case PresetId::HighQuality: return "high-quality";
    case PresetId::WeakContact: return "weak-contact";
    case PresetId::StrongContact: return "strong-contact";
  }
  return "?";
}

inline std::optional<PresetId> preset_from_name(std::string_view name) {
  for (PresetId id : kAllPresets)
    if (name == preset_name(id)) return id;
  return std::nullopt;
}

/// Expand a preset for a population of size n. Contact weights of the two
/// contact presets (4 and 8) and the b-ordering of the two quality presets are
/// the presets' defining values; every other magnitude is an implementation
/// default.
inline Scenario expand_preset(PresetId id, double n) {
  if (!(n > 0.0) || !std::isfinite(n)) throw ValidationError("n: must be finite and > 0");

  Scenario sc;
  sc.params.r1 = 0.1;
  sc.params.r2 = 0.1;
  sc.params.o = 0.3;
  sc.params.n = n;
  sc.mode = RhsMode::Conserving;
  sc.controls = IntegrationControls{0.01, 100.0, 0.1, Method::RK4, true};
  sc.label = preset_name(id);

  switch (id) {
    case PresetId::InitialValue:
      // governance baseline: refutation channels actively promoted
      sc.params.b1 = 0.45;
      sc.params.b2 = 0.8;
      sc.params.w1 = 4.0;
      sc.params.w2 = 10.0;
      sc.params.w3 = 6.0;
      sc.debunk_delay = 0.0;
      break;
    case PresetId::LowQuality:
      sc.params.b1 = 0.6;
      sc.params.b2 = 0.3;
      sc.params.w1 = 4.0;
      sc.params.w2 = 4.0;
      sc.params.w3 = 4.0;
      sc.debunk_delay = 1.0;
      break;
    case PresetId::HighQuality:
      sc.params.b1 = 0.3;
      sc.params.b2 = 0.6;
      sc.params.w1 = 4.0;
      sc.params.w2 = 4.0;
      sc.params.w3 = 4.0;
      sc.debunk_delay = 1.0;
      break;
    case PresetId::WeakContact:
      sc.params.b1 = 0.5;
      sc.params.b2 = 0.5;
      sc.params.w1 = 4.0;
      sc.params.w2 = 4.0;
      sc.params.w3 = 4.0;
      sc.debunk_delay = 1.0;
      break;
    case PresetId::StrongContact:
      sc.params.b1 = 0.5;
      sc.params.b2 = 0.5;
      sc.params.w1 = 8.0;
      sc.params.w2 = 8.0;
      sc.params.w3 = 8.0;
      sc.debunk_delay = 1.0;
      break;
  }

  // rumor seed 1% of n, refuter seed 0.5%, floored so that ia > ib holds for
  // any positive population
  double ia0 = std::max(1.0, std::round(0.01 * n));
  double ib0 = std::min(std::round(0.005 * n), ia0 - 1.0);
  if (ib0 < 0.0) ib0 = 0.0;
  if (ia0 > n) ia0 = n;
  sc.initial = {n - ia0 - ib0, ia0, ib0, 0.0};

  validate_scenario(sc).require();
  return sc;
}

// ---------------------------------------------------------------------------
// JSON serialization
// ---------------------------------------------------------------------------

inline nlohmann::ordered_json scenario_to_json(const Scenario& sc) {
  nlohmann::ordered_json j;
  j["label"] = sc.label;
  j["mode"] = to_string(sc.mode);
  j["params"] = {{"b1", sc.params.b1}, {"b2", sc.params.b2}, {"o", sc.params.o},
                 {"w1", sc.params.w1}, {"w2", sc.params.w2}, {"w3", sc.params.w3},
                 {"r1", sc.params.r1}, {"r2", sc.params.r2}, {"n", sc.params.n}};
  j["initial"] = {{"s", sc.initial.s}, {"ia", sc.initial.ia}, {"ib", sc.initial.ib},
                  {"r", sc.initial.r}};
  j["debunk_delay"] = sc.debunk_delay;
  j["allow_equal_seeds"] = sc.allow_equal_seeds;
  j["controls"] = {{"dt", sc.controls.dt},
                   {"t_end", sc.controls.t_end},
                   {"output_every", sc.controls.output_every},
                   {"method", to_string(sc.controls.method)},
                   {"clamp_negatives", sc.controls.clamp_negatives}};
  return j;
}

namespace detail {

inline double json_number(const nlohmann::json& obj, const std::string& scope,
                          const char* key, std::optional<double> fallback = std::nullopt) {
  if (!obj.contains(key)) {
    if (fallback) return *fallback;
    throw ValidationError(scope + "." + key + ": required field is missing");
  }
  const auto& v = obj.at(key);
  if (!v.is_number()) throw ValidationError(scope + "." + key + ": must be a number");
  return v.get<double>();
}

inline void reject_unknown_keys(const nlohmann::json& obj, const std::string& scope,
                                std::initializer_list<const char*> known) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    const bool ok = std::any_of(known.begin(), known.end(),
                                [&](const char* k) { return it.key() == k; });
    if (!ok) throw ValidationError(scope + "." + it.key() + ": unknown field");
  }
}

}  // namespace detail

/// Parse a scenario document, filling documented defaults for omitted fields
/// (mode=conserving, debunk_delay=0, allow_equal_seeds=false, controls as in
/// IntegrationControls). Throws ValidationError naming the offending field.
inline Scenario scenario_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("scenario: document must be a JSON object");
  detail::reject_unknown_keys(j, "scenario",
                              {"label", "mode", "params", "initial", "debunk_delay",
                               "allow_equal_seeds", "controls"});

  Scenario sc;
  if (j.contains("label")) {
    if (!j.at("label").is_string()) throw ValidationError("scenario.label: must be a string");
    sc.label = j.at("label").get<std::string>();
  }
  if (j.contains("mode")) {
    const auto m = j.at("mode").is_string() ? j.at("mode").get<std::string>() : std::string();
    if (m == "literal") sc.mode = RhsMode::Literal;
    else if (m == "conserving") sc.mode = RhsMode::Conserving;
    else throw ValidationError("scenario.mode: must be \"literal\" or \"conserving\"");
  }

  if (!j.contains("params")) throw ValidationError("scenario.params: required field is missing");
  const auto& jp = j.at("params");
  detail::reject_unknown_keys(jp, "params", {"b1", "b2", "o", "w1", "w2", "w3", "r1", "r2", "n"});
  sc.params.b1 = detail::json_number(jp, "params", "b1");
  sc.params.b2 = detail::json_number(jp, "params", "b2");
  sc.params.o = detail::json_number(jp, "params", "o");
  sc.params.w1 = detail::json_number(jp, "params", "w1");
  sc.params.w2 = detail::json_number(jp, "params", "w2");
  sc.params.w3 = detail::json_number(jp, "params", "w3");
  sc.params.r1 = detail::json_number(jp, "params", "r1");
  sc.params.r2 = detail::json_number(jp, "params", "r2");
  sc.params.n = detail::json_number(jp, "params", "n");

  if (!j.contains("initial")) throw ValidationError("scenario.initial: required field is missing");
  const auto& ji = j.at("initial");
  detail::reject_unknown_keys(ji, "initial", {"s", "ia", "ib", "r"});
  sc.initial.s = detail::json_number(ji, "initial", "s");
  sc.initial.ia = detail::json_number(ji, "initial", "ia");
  sc.initial.ib = detail::json_number(ji, "initial", "ib");
  sc.initial.r = detail::json_number(ji, "initial", "r", 0.0);

  sc.debunk_delay = j.contains("debunk_delay")
                        ? detail::json_number(j, "scenario", "debunk_delay")
                        : 0.0;
  if (j.contains("allow_equal_seeds")) {
    if (!j.at("allow_equal_seeds").is_boolean())
      throw ValidationError("scenario.allow_equal_seeds: must be a boolean");
    sc.allow_equal_seeds = j.at("allow_equal_seeds").get<bool>();
  }

  if (j.contains("controls")) {
    const auto& jc = j.at("controls");
    detail::reject_unknown_keys(jc, "controls",
                                {"dt", "t_end", "output_every", "method", "clamp_negatives"});
    sc.controls.dt = detail::json_number(jc, "controls", "dt", sc.controls.dt);
    sc.controls.t_end = detail::json_number(jc, "controls", "t_end", sc.controls.t_end);
    sc.controls.output_every =
        detail::json_number(jc, "controls", "output_every", sc.controls.output_every);
    if (jc.contains("method")) {
      const auto m =
          jc.at("method").is_string() ? jc.at("method").get<std::string>() : std::string();
      if (m == "rk4") sc.controls.method = Method::RK4;
      else if (m == "euler") sc.controls.method = Method::Euler;
      else throw ValidationError("controls.method: must be \"rk4\" or \"euler\"");
    }
    if (jc.contains("clamp_negatives")) {
      if (!jc.at("clamp_negatives").is_boolean())
        throw ValidationError("controls.clamp_negatives: must be a boolean");
      sc.controls.clamp_negatives = jc.at("clamp_negatives").get<bool>();
    }
  }

  validate_scenario(sc).require();
  return sc;
}

/// Load and fully validate a scenario document from disk.
inline Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open scenario file: " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError("scenario parse error in " + path.string() + ": " + e.what());
  }
  return scenario_from_json(j);
}

/// Write the normalized form (all defaults explicit) of a scenario.
inline void save_scenario(const Scenario& sc, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write scenario file: " + path.string());
  out << scenario_to_json(sc).dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// Scenario execution
// ---------------------------------------------------------------------------

namespace detail {

inline StateVec hold_refuter_seed(const StateVec& x) {
  return {x.s + x.ib, x.ia, 0.0, x.r};
}

inline StateVec inject_refuters(const StateVec& x, double seed_count) {
  const double moved = std::min(seed_count, x.s);
  return {x.s - moved, x.ia, x.ib + moved, x.r};
}

}  // namespace detail

/// Run the deterministic (ODE) simulation of a scenario, including the
/// delayed refutation launch. Output grid and Trajectory semantics follow
/// integrate().
inline Trajectory run_scenario(const Scenario& sc) {
  validate_scenario(sc).require();
  const IntegrationControls& c = sc.controls;
  const bool delayed = sc.debunk_delay > 0.0;

  if (!delayed) return integrate(sc.initial, sc.params, sc.mode, c);

  const StateVec held = detail::hold_refuter_seed(sc.initial);
  if (sc.debunk_delay >= c.t_end) return integrate(held, sc.params, sc.mode, c);

  IntegrationControls c1 = c;
  c1.t_end = sc.debunk_delay;
  Trajectory phase1 = integrate(held, sc.params, sc.mode, c1);

  const StateVec at_launch = detail::inject_refuters(phase1.states.back(), sc.initial.ib);

  IntegrationControls c2 = c;
  c2.t_end = c.t_end - sc.debunk_delay;
  Trajectory phase2;
  try {
    phase2 = integrate(at_launch, sc.params, sc.mode, c2);
  } catch (const DivergenceError& e) {
    throw DivergenceError(e.what(), e.time + sc.debunk_delay);
  }

  // stitch: phase1 without its final (pre-injection) point, then phase2.
  // Times are rebuilt as k * output_every so the grid is bit-identical to a
  // single-phase run on the same cadence.
  Trajectory traj;
  traj.mode = sc.mode;
  traj.params = sc.params;
  const std::size_t offset = phase1.times.size() - 1;
  const std::size_t total = offset + phase2.times.size();
  traj.times.reserve(total);
  traj.states.reserve(total);
  for (std::size_t i = 0; i < offset; ++i) {
    traj.times.push_back(phase1.times[i]);
    traj.states.push_back(phase1.states[i]);
  }
  for (std::size_t i = 0; i < phase2.times.size(); ++i) {
    traj.times.push_back(static_cast<double>(offset + i) * c.output_every);
    traj.states.push_back(phase2.states[i]);
  }
  return traj;
}

/// Run one stochastic sample path of a scenario (conserving mode only; the
/// seeds and n must be integer counts).
inline StochasticRun run_scenario_stochastic(const Scenario& sc, std::uint64_t seed) {
  ValidationResult res = validate_scenario(sc);
  if (sc.mode != RhsMode::Conserving)
    res.violations.push_back({"mode", "stochastic simulation requires conserving mode"});
  if (res.ok()) res.merge(detail::validate_counts(sc.initial, sc.params));
  res.require();

  const std::vector<double> grid =
      detail::output_grid(sc.controls.output_every, sc.controls.t_end);

  StochasticRun run;
  run.seed = seed;
  run.trajectory.mode = RhsMode::Conserving;
  run.trajectory.params = sc.params;
  run.trajectory.times = grid;
  run.trajectory.states.reserve(grid.size());

  const bool delayed = sc.debunk_delay > 0.0;
  const StateVec start = delayed ? detail::hold_refuter_seed(sc.initial) : sc.initial;
  detail::GillespieEngine engine(start, sc.params, seed);
  std::size_t cursor = 0;
  if (delayed && sc.debunk_delay < sc.controls.t_end) {
    engine.run_to(sc.debunk_delay, grid, cursor, run.trajectory.states, false);
    engine.inject_refuters(static_cast<std::int64_t>(std::llround(sc.initial.ib)));
  }
  engine.run_to(grid.back(), grid, cursor, run.trajectory.states, true);
  run.event_count = engine.event_count();
  run.channel_counts = engine.channel_counts();
  return run;
}

/// Run an ensemble of independent sample paths in parallel. Run i uses
/// mix_seed(base_seed, i); the result is deterministic for a given base seed
/// regardless of scheduling.
inline std::vector<StochasticRun> run_scenario_ensemble(const Scenario& sc, std::size_t runs,
                                                        std::uint64_t base_seed) {
  if (runs == 0) throw ValidationError("runs: must be >= 1");
  // validate once up front so worker threads cannot race on the first throw
  ValidationResult res = validate_scenario(sc);
  if (sc.mode != RhsMode::Conserving)
    res.violations.push_back({"mode", "stochastic simulation requires conserving mode"});
  if (res.ok()) res.merge(detail::validate_counts(sc.initial, sc.params));
  res.require();

  std::vector<StochasticRun> out(runs);
  detail::parallel_for_index(runs, [&](std::size_t i) {
    out[i] = run_scenario_stochastic(sc, mix_seed(base_seed, i));
  });
  return out;
}

}  // namespace rumorsim

#endif  // RUMORSIM_SCENARIO_HPP
