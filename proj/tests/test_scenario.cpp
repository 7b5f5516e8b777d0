#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include <unistd.h>

#include "rumorsim/scenario.hpp"

using namespace rumorsim;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const char* name) {
  static int counter = 0;
  return fs::temp_directory_path() /
         (std::string("rumorsim_scenario_") + std::to_string(::getpid()) + "_" +
          std::to_string(counter++) + "_" + name);
}

}  // namespace

TEST_CASE("every preset expands to a valid scenario") {
  for (PresetId id : kAllPresets) {
    const Scenario sc = expand_preset(id, 10000.0);
    REQUIRE(validate_scenario(sc).ok());
    REQUIRE(sc.mode == RhsMode::Conserving);
    REQUIRE(sc.initial.ia > sc.initial.ib);
    REQUIRE(sc.initial.sum() == Catch::Approx(10000.0));
    REQUIRE(sc.label == preset_name(id));
    REQUIRE(sc.controls.dt == 0.01);
    REQUIRE(sc.controls.t_end == 100.0);
  }
}

TEST_CASE("contact presets pin every contact weight") {
  const Scenario weak = expand_preset(PresetId::WeakContact, 10000.0);
  REQUIRE(weak.params.w1 == 4.0);
  REQUIRE(weak.params.w2 == 4.0);
  REQUIRE(weak.params.w3 == 4.0);

  const Scenario strong = expand_preset(PresetId::StrongContact, 10000.0);
  REQUIRE(strong.params.w1 == 8.0);
  REQUIRE(strong.params.w2 == 8.0);
  REQUIRE(strong.params.w3 == 8.0);

  // the two presets differ only in the contact weights
  REQUIRE(weak.params.b1 == strong.params.b1);
  REQUIRE(weak.params.b2 == strong.params.b2);
  REQUIRE(weak.params.o == strong.params.o);
  REQUIRE(weak.debunk_delay == strong.debunk_delay);
}

TEST_CASE("quality presets swap b1 and b2 and nothing else") {
  const Scenario low = expand_preset(PresetId::LowQuality, 10000.0);
  const Scenario high = expand_preset(PresetId::HighQuality, 10000.0);
  REQUIRE(low.params.b1 > low.params.b2);
  REQUIRE(high.params.b1 < high.params.b2);
  REQUIRE(low.params.b1 == high.params.b2);
  REQUIRE(low.params.b2 == high.params.b1);
  REQUIRE(low.params.o == high.params.o);
  REQUIRE(low.params.w1 == high.params.w1);
  REQUIRE(low.initial == high.initial);
  REQUIRE(low.debunk_delay == high.debunk_delay);
}

TEST_CASE("preset seeds scale with the population and stay ordered") {
  const Scenario sc = expand_preset(PresetId::HighQuality, 10000.0);
  REQUIRE(sc.initial.ia == 100.0);
  REQUIRE(sc.initial.ib == 50.0);
  REQUIRE(sc.initial.r == 0.0);

  // tiny populations still expand to something valid
  for (double n : {1.0, 7.0, 50.0, 199.0}) {
    const Scenario tiny = expand_preset(PresetId::WeakContact, n);
    REQUIRE(validate_scenario(tiny).ok());
  }
  REQUIRE_THROWS_AS(expand_preset(PresetId::WeakContact, 0.0), ValidationError);
}

TEST_CASE("preset names round-trip") {
  for (PresetId id : kAllPresets) {
    REQUIRE(preset_from_name(preset_name(id)) == id);
  }
  REQUIRE_FALSE(preset_from_name("no-such-preset").has_value());
}

TEST_CASE("the seed rule requires more rumor spreaders than refuters") {
  Scenario sc = expand_preset(PresetId::HighQuality, 10000.0);
  sc.initial = {9980.0, 10.0, 10.0, 0.0};
  auto res = validate_scenario(sc);
  REQUIRE_FALSE(res.ok());
  REQUIRE(res.describe().find("ia > ib") != std::string::npos);

  sc.allow_equal_seeds = true;
  REQUIRE(validate_scenario(sc).ok());

  // even the relaxed rule rejects ia < ib
  sc.initial = {9980.0, 5.0, 15.0, 0.0};
  REQUIRE_FALSE(validate_scenario(sc).ok());
}

TEST_CASE("scenario validation covers sums and the launch delay") {
  Scenario sc = expand_preset(PresetId::HighQuality, 10000.0);

  sc.initial.s += 5.0;  // breaks the sum
  REQUIRE_FALSE(validate_scenario(sc).ok());

  sc = expand_preset(PresetId::HighQuality, 10000.0);
  sc.debunk_delay = -1.0;
  REQUIRE_FALSE(validate_scenario(sc).ok());

  sc.debunk_delay = 0.37;  // off the output grid
  REQUIRE_FALSE(validate_scenario(sc).ok());

  sc.debunk_delay = 1000.0;  // beyond the horizon: fine, the launch never happens
  REQUIRE(validate_scenario(sc).ok());
}

TEST_CASE("JSON round trip preserves the scenario exactly") {
  for (PresetId id : kAllPresets) {
    const Scenario sc = expand_preset(id, 10000.0);
    const Scenario back = scenario_from_json(scenario_to_json(sc));
    REQUIRE(scenario_to_json(back) == scenario_to_json(sc));
  }
}

TEST_CASE("save and load a scenario file") {
  const fs::path path = temp_file("roundtrip.json");
  const Scenario sc = expand_preset(PresetId::StrongContact, 10000.0);
  save_scenario(sc, path);
  const Scenario back = load_scenario(path);
  REQUIRE(scenario_to_json(back) == scenario_to_json(sc));
  fs::remove(path);
}

TEST_CASE("a minimal document gets the documented defaults") {
  const auto j = nlohmann::json::parse(R"({
    "params": {"b1": 0.3, "b2": 0.5, "o": 0.2, "w1": 4, "w2": 4, "w3": 4,
               "r1": 0.1, "r2": 0.1, "n": 10000},
    "initial": {"s": 9850, "ia": 100, "ib": 50}
  })");
  const Scenario sc = scenario_from_json(j);
  REQUIRE(sc.mode == RhsMode::Conserving);
  REQUIRE(sc.debunk_delay == 0.0);
  REQUIRE(sc.allow_equal_seeds == false);
  REQUIRE(sc.initial.r == 0.0);
  REQUIRE(sc.controls.dt == 0.01);
  REQUIRE(sc.controls.t_end == 100.0);
  REQUIRE(sc.controls.output_every == 0.5);
  REQUIRE(sc.controls.method == Method::RK4);
  REQUIRE(sc.controls.clamp_negatives == true);
}

TEST_CASE("documents violating the seed rule are rejected with the rule cited") {
  const auto j = nlohmann::json::parse(R"({
    "params": {"b1": 0.3, "b2": 0.5, "o": 0.2, "w1": 4, "w2": 4, "w3": 4,
               "r1": 0.1, "r2": 0.1, "n": 10000},
    "initial": {"s": 9980, "ia": 10, "ib": 10}
  })");
  try {
    scenario_from_json(j);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    REQUIRE(std::string(e.what()).find("ia > ib") != std::string::npos);
  }
}

TEST_CASE("document errors name the offending field") {
  using nlohmann::json;
  // missing params.n
  auto j = json::parse(R"({"params": {"b1":0.3,"b2":0.5,"o":0.2,"w1":4,"w2":4,"w3":4,
                          "r1":0.1,"r2":0.1}, "initial": {"s":9850,"ia":100,"ib":50}})");
  REQUIRE_THROWS_WITH(scenario_from_json(j), Catch::Matchers::ContainsSubstring("params.n"));

  // wrong type
  j = json::parse(R"({"params": {"b1":"x","b2":0.5,"o":0.2,"w1":4,"w2":4,"w3":4,
                     "r1":0.1,"r2":0.1,"n":10000}, "initial": {"s":9850,"ia":100,"ib":50}})");
  REQUIRE_THROWS_WITH(scenario_from_json(j), Catch::Matchers::ContainsSubstring("params.b1"));

  // unknown key
  j = json::parse(R"({"params": {"b1":0.3,"b2":0.5,"o":0.2,"w1":4,"w2":4,"w3":4,
                     "r1":0.1,"r2":0.1,"n":10000}, "initial": {"s":9850,"ia":100,"ib":50},
                     "debunk_dealy": 5})");
  REQUIRE_THROWS_WITH(scenario_from_json(j), Catch::Matchers::ContainsSubstring("debunk_dealy"));
}

TEST_CASE("parse failures surface the position") {
  const fs::path path = temp_file("broken.json");
  {
    std::ofstream out(path);
    out << "{ not json";
  }
  REQUIRE_THROWS_WITH(load_scenario(path), Catch::Matchers::ContainsSubstring("parse error"));
  fs::remove(path);
  REQUIRE_THROWS_AS(load_scenario(temp_file("missing.json")), ValidationError);
}

TEST_CASE("the refuter seed is held back until the launch time") {
  const Scenario sc = expand_preset(PresetId::HighQuality, 10000.0);  // delay = 1
  const Trajectory traj = run_scenario(sc);
  const double h = sc.controls.output_every;
  const auto launch_idx = static_cast<std::size_t>(std::llround(sc.debunk_delay / h));

  for (std::size_t i = 0; i < launch_idx; ++i) REQUIRE(traj.states[i].ib == 0.0);
  REQUIRE(traj.states[launch_idx].ib == 50.0);  // injected, sampled before further flow
  REQUIRE(traj.times[launch_idx] == Catch::Approx(sc.debunk_delay));
  REQUIRE(traj.states[launch_idx].sum() == Catch::Approx(10000.0).margin(1e-5));

  // before the launch S carries the held-back seed
  REQUIRE(traj.states[0].s == sc.initial.s + sc.initial.ib);
  REQUIRE(traj.states[0].ia == sc.initial.ia);

  // the full grid is still uniform
  REQUIRE(traj.times.size() == 1001);
  for (std::size_t i = 0; i + 1 < traj.times.size(); ++i)
    REQUIRE(traj.times[i + 1] - traj.times[i] == Catch::Approx(h).margin(1e-9));
}

TEST_CASE("a launch delay beyond the horizon disables the refuters entirely") {
  Scenario sc = expand_preset(PresetId::HighQuality, 10000.0);
  sc.debunk_delay = 1000.0;
  const Trajectory traj = run_scenario(sc);
  for (const StateVec& x : traj.states) REQUIRE(x.ib == 0.0);
}

TEST_CASE("zero delay starts both seeds immediately") {
  Scenario sc = expand_preset(PresetId::HighQuality, 10000.0);
  sc.debunk_delay = 0.0;
  const Trajectory traj = run_scenario(sc);
  REQUIRE(traj.states[0].ib == 50.0);
  REQUIRE(traj.states[0].s == sc.initial.s);
}

TEST_CASE("stochastic runs honor the launch delay and stay integral") {
  const Scenario sc = expand_preset(PresetId::HighQuality, 10000.0);
  const StochasticRun run = run_scenario_stochastic(sc, 2024);
  const double h = sc.controls.output_every;
  const auto launch_idx = static_cast<std::size_t>(std::llround(sc.debunk_delay / h));
  for (std::size_t i = 0; i < launch_idx; ++i) REQUIRE(run.trajectory.states[i].ib == 0.0);
  REQUIRE(run.trajectory.states[launch_idx].ib == 50.0);
  for (const StateVec& x : run.trajectory.states) REQUIRE(x.sum() == 10000.0);
}

TEST_CASE("stochastic runs require conserving mode and integer counts") {
  Scenario sc = expand_preset(PresetId::HighQuality, 10000.0);
  sc.mode = RhsMode::Literal;
  REQUIRE_THROWS_WITH(run_scenario_stochastic(sc, 1),
                      Catch::Matchers::ContainsSubstring("conserving"));

  Scenario frac = expand_preset(PresetId::HighQuality, 10000.0);
  frac.params.n = 10000.5;
  frac.initial.s += 0.5;
  REQUIRE_THROWS_AS(run_scenario_stochastic(frac, 1), ValidationError);
}

TEST_CASE("ensembles are reproducible from the base seed") {
  Scenario sc = expand_preset(PresetId::HighQuality, 1000.0);
  const auto a = run_scenario_ensemble(sc, 8, 99);
  const auto b = run_scenario_ensemble(sc, 8, 99);
  REQUIRE(a.size() == 8);
  for (std::size_t i = 0; i < a.size(); ++i) {
    REQUIRE(a[i].seed == b[i].seed);
    REQUIRE(a[i].trajectory.states == b[i].trajectory.states);
  }
  REQUIRE_THROWS_AS(run_scenario_ensemble(sc, 0, 99), ValidationError);
}
