#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "rumorsim/integrator.hpp"
#include "rumorsim/scenario.hpp"

using namespace rumorsim;

namespace {

ModelParams low_quality_params() {
  ModelParams p;
  p.b1 = 0.6;
  p.b2 = 0.3;
  p.o = 0.3;
  p.w1 = 4.0;
  p.w2 = 4.0;
  p.w3 = 4.0;
  p.r1 = 0.1;
  p.r2 = 0.1;
  p.n = 10000.0;
  return p;
}

double state_norm(const StateVec& x) {
  return std::sqrt(x.s * x.s + x.ia * x.ia + x.ib * x.ib + x.r * x.r);
}

// Independent RK4 for the reduced three-compartment single-information
// system, written against its own derivative code.
struct Sir3 {
  double s, ia, r;
};

Sir3 rk4_sir_step(const Sir3& x, double b, double w, double rr, double n, double dt) {
  auto deriv = [&](const Sir3& y) {
    const double infect = b * (w / n) * y.ia * y.s;
    return Sir3{-infect, infect - rr * y.ia, rr * y.ia};
  };
  auto add = [](const Sir3& a, double k, const Sir3& b2) {
    return Sir3{a.s + k * b2.s, a.ia + k * b2.ia, a.r + k * b2.r};
  };
  const Sir3 k1 = deriv(x);
  const Sir3 k2 = deriv(add(x, dt / 2.0, k1));
  const Sir3 k3 = deriv(add(x, dt / 2.0, k2));
  const Sir3 k4 = deriv(add(x, dt, k3));
  Sir3 out = x;
  out.s += dt / 6.0 * (k1.s + 2.0 * k2.s + 2.0 * k3.s + k4.s);
  out.ia += dt / 6.0 * (k1.ia + 2.0 * k2.ia + 2.0 * k3.ia + k4.ia);
  out.r += dt / 6.0 * (k1.r + 2.0 * k2.r + 2.0 * k3.r + k4.r);
  return out;
}

}  // namespace

TEST_CASE("all-susceptible initial state is a fixed point") {
  ModelParams p = low_quality_params();
  StateVec x0{p.n, 0.0, 0.0, 0.0};
  IntegrationControls c{0.5, 100.0, 0.5, Method::RK4, true};
  for (RhsMode mode : {RhsMode::Literal, RhsMode::Conserving}) {
    const Trajectory traj = integrate(x0, p, mode, c);
    REQUIRE(traj.times.size() == 201);
    for (const StateVec& x : traj.states) REQUIRE(x == x0);
  }
}

TEST_CASE("Euler step equals x + dt * rhs(x) exactly") {
  ModelParams p = low_quality_params();
  StateVec x{9000.0, 700.0, 200.0, 100.0};
  const double dt = 0.25;
  for (RhsMode mode : {RhsMode::Literal, RhsMode::Conserving}) {
    const StateVec expected = x + dt * rhs(x, p, mode);
    REQUIRE(step(x, p, mode, dt, Method::Euler) == expected);
  }
}

TEST_CASE("one-step consistency: (step(x) - x)/dt approaches rhs(x)") {
  ModelParams p = low_quality_params();
  StateVec x{9000.0, 700.0, 200.0, 100.0};
  const double dt = 1e-6;
  for (Method method : {Method::RK4, Method::Euler}) {
    const StateVec moved = step(x, p, RhsMode::Conserving, dt, method);
    const StateVec rate = (1.0 / dt) * (moved - x);
    const StateVec exact = rhs(x, p, RhsMode::Conserving);
    REQUIRE(state_norm(rate - exact) <= 1e-3 * state_norm(exact));
  }
}

TEST_CASE("RK4 matches exponential decay to fifth order on the pure-fade system") {
  ModelParams p;
  p.b1 = 0.0;
  p.b2 = 0.0;
  p.o = 0.0;
  p.w1 = 4.0;
  p.w2 = 4.0;
  p.w3 = 4.0;
  p.r1 = 0.5;
  p.r2 = 0.25;
  p.n = 10000.0;
  StateVec x{4000.0, 3000.0, 2000.0, 1000.0};

  const double dt = 0.1;
  const StateVec moved = step(x, p, RhsMode::Conserving, dt, Method::RK4);

  const double z1 = -p.r1 * dt;
  const double z2 = -p.r2 * dt;
  REQUIRE(std::abs(moved.ia - x.ia * std::exp(z1)) <= std::pow(std::abs(z1), 5) / 50.0 * x.ia);
  REQUIRE(std::abs(moved.ib - x.ib * std::exp(z2)) <= std::pow(std::abs(z2), 5) / 50.0 * x.ib);
  // and agrees with the degree-4 amplification polynomial almost exactly
  REQUIRE(moved.ia ==
          Catch::Approx(x.ia * oracles::rk4_decay_factor(z1)).epsilon(1e-14));

  // halving the step shrinks the exp mismatch about 32x
  const StateVec half = step(x, p, RhsMode::Conserving, dt / 2.0, Method::RK4);
  const double e_full = std::abs(moved.ia - x.ia * std::exp(z1));
  const double e_half = std::abs(half.ia - x.ia * std::exp(z1 / 2.0));
  REQUIRE(e_full / e_half == Catch::Approx(32.0).margin(8.0));
}

TEST_CASE("integrate validates controls") {
  ModelParams p = low_quality_params();
  StateVec x0{p.n - 150.0, 100.0, 50.0, 0.0};

  IntegrationControls bad{0.0, 100.0, 0.5, Method::RK4, true};
  REQUIRE_THROWS_AS(integrate(x0, p, RhsMode::Conserving, bad), ValidationError);

  bad = {0.1, 0.05, 0.1, Method::RK4, true};  // t_end < dt
  REQUIRE_THROWS_AS(integrate(x0, p, RhsMode::Conserving, bad), ValidationError);

  bad = {0.1, 10.0, 0.25, Method::RK4, true};  // cadence not a multiple of dt
  REQUIRE_THROWS_AS(integrate(x0, p, RhsMode::Conserving, bad), ValidationError);

  const IntegrationControls good{0.1, 10.0, 0.3, Method::RK4, true};
  REQUIRE(validate_controls(good).ok());
}

TEST_CASE("trajectory grid starts at zero and is uniform") {
  ModelParams p = low_quality_params();
  StateVec x0{p.n - 150.0, 100.0, 50.0, 0.0};
  const Trajectory traj =
      integrate(x0, p, RhsMode::Conserving, {0.01, 10.0, 0.5, Method::RK4, true});
  REQUIRE(traj.times.size() == 21);
  REQUIRE(traj.times.front() == 0.0);
  for (std::size_t i = 0; i + 1 < traj.times.size(); ++i)
    REQUIRE(traj.times[i + 1] - traj.times[i] == Catch::Approx(0.5).margin(1e-12));

  // a horizon that is not a grid multiple truncates to the last grid point
  const Trajectory trunc =
      integrate(x0, p, RhsMode::Conserving, {0.01, 10.3, 0.5, Method::RK4, true});
  REQUIRE(trunc.times.size() == 21);
  REQUIRE(trunc.times.back() == Catch::Approx(10.0));
}

TEST_CASE("integration is deterministic bit for bit") {
  ModelParams p = low_quality_params();
  StateVec x0{p.n - 150.0, 100.0, 50.0, 0.0};
  const IntegrationControls c{0.01, 50.0, 0.5, Method::RK4, true};
  const Trajectory a = integrate(x0, p, RhsMode::Conserving, c);
  const Trajectory b = integrate(x0, p, RhsMode::Conserving, c);
  REQUIRE(a.times == b.times);
  REQUIRE(a.states == b.states);
}

TEST_CASE("conserving RK4 holds the population to 1e-9 n") {
  ModelParams p = low_quality_params();
  StateVec x0{p.n - 150.0, 100.0, 50.0, 0.0};
  const Trajectory traj =
      integrate(x0, p, RhsMode::Conserving, {0.01, 100.0, 0.5, Method::RK4, true});
  for (const StateVec& x : traj.states) REQUIRE(std::abs(x.sum() - p.n) <= 1e-9 * p.n);
}

TEST_CASE("R never decreases along a trajectory") {
  ModelParams p = low_quality_params();
  StateVec x0{p.n - 150.0, 100.0, 50.0, 0.0};
  for (RhsMode mode : {RhsMode::Literal, RhsMode::Conserving}) {
    const Trajectory traj = integrate(x0, p, mode, {0.01, 100.0, 0.5, Method::RK4, true});
    for (std::size_t i = 0; i + 1 < traj.states.size(); ++i)
      REQUIRE(traj.states[i + 1].r >= traj.states[i].r);
  }
}

TEST_CASE("empty compartments stay empty for all time") {
  ModelParams p = low_quality_params();
  StateVec no_rumor{p.n - 50.0, 0.0, 50.0, 0.0};
  for (RhsMode mode : {RhsMode::Literal, RhsMode::Conserving}) {
    const Trajectory traj = integrate(no_rumor, p, mode, {0.01, 50.0, 0.5, Method::RK4, true});
    for (const StateVec& x : traj.states) REQUIRE(x.ia == 0.0);
  }
}

TEST_CASE("clamped runs never emit negative components") {
  for (PresetId id : kAllPresets) {
    Scenario sc = expand_preset(id, 10000.0);
    const Trajectory traj = run_scenario(sc);
    for (const StateVec& x : traj.states) {
      REQUIRE(x.s >= 0.0);
      REQUIRE(x.ia >= 0.0);
      REQUIRE(x.ib >= 0.0);
      REQUIRE(x.r >= 0.0);
    }
  }
}

TEST_CASE("without clamping the worst excursion on the presets stays above -1e-6 n") {
  double most_negative = 0.0;
  for (PresetId id : kAllPresets) {
    Scenario sc = expand_preset(id, 10000.0);
    sc.controls.clamp_negatives = false;
    sc.controls.dt = 0.01;
    const Trajectory traj = run_scenario(sc);
    for (const StateVec& x : traj.states)
      for (double v : {x.s, x.ia, x.ib, x.r}) most_negative = std::min(most_negative, v);
  }
  INFO("most negative emitted component across presets: " << most_negative);
  REQUIRE(most_negative > -1e-6 * 10000.0);
}

TEST_CASE("divergence raises an error carrying the failing time") {
  ModelParams p;
  p.b1 = 1.0;
  p.b2 = 0.0;
  p.o = 0.0;
  p.w1 = 1e308;
  p.w2 = 0.0;
  p.w3 = 0.0;
  p.r1 = 0.0;
  p.r2 = 0.0;
  p.n = 2.0;
  StateVec x0{1.0, 1.0, 0.0, 0.0};
  const IntegrationControls c{1.0, 10.0, 1.0, Method::Euler, false};
  try {
    integrate(x0, p, RhsMode::Conserving, c);
    FAIL("expected DivergenceError");
  } catch (const DivergenceError& e) {
    REQUIRE(e.time > 0.0);
    REQUIRE(e.time <= 10.0);
  }
  REQUIRE_THROWS_AS(step(StateVec{1e308, 1e308, 0.0, 0.0}, p, RhsMode::Conserving, 1.0,
                         Method::Euler),
                    DivergenceError);
}

TEST_CASE("with the refuters empty the system reduces to the single-information model") {
  // b1=0.5, w1=4, r1=0.1, no refuters; o deliberately nonzero
  ModelParams p;
  p.b1 = 0.5;
  p.b2 = 0.7;
  p.o = 0.3;
  p.w1 = 4.0;
  p.w2 = 4.0;
  p.w3 = 4.0;
  p.r1 = 0.1;
  p.r2 = 0.1;
  p.n = 10000.0;
  StateVec x0{9900.0, 100.0, 0.0, 0.0};
  const double dt = 0.01;
  const double out_every = 0.5;
  const double t_end = 60.0;
  const Trajectory traj =
      integrate(x0, p, RhsMode::Conserving, {dt, t_end, out_every, Method::RK4, true});

  SECTION("code-path equivalence against an independent reduced RK4") {
    Sir3 y{9900.0, 100.0, 0.0};
    std::size_t idx = 0;
    REQUIRE(traj.states[idx].ia == Catch::Approx(y.ia).margin(1e-9 * p.n));
    for (std::size_t k = 1; k < traj.times.size(); ++k) {
      for (int i = 0; i < 50; ++i) y = rk4_sir_step(y, p.b1, p.w1, p.r1, p.n, dt);
      REQUIRE(traj.states[k].s == Catch::Approx(y.s).margin(1e-9 * p.n));
      REQUIRE(traj.states[k].ia == Catch::Approx(y.ia).margin(1e-9 * p.n));
      REQUIRE(traj.states[k].r == Catch::Approx(y.r).margin(1e-9 * p.n));
      REQUIRE(traj.states[k].ib == 0.0);
    }
  }

  SECTION("agreement with the brute-force fine-step Euler oracle") {
    const auto oracle = oracles::euler_sir(p.b1, p.w1, p.r1, p.n, 9900.0, 100.0, 1e-5,
                                           out_every, t_end);
    REQUIRE(oracle.size() == traj.times.size());
    double worst = 0.0;
    for (std::size_t k = 0; k < oracle.size(); ++k) {
      worst = std::max(worst, std::abs(traj.states[k].s - oracle[k].s));
      worst = std::max(worst, std::abs(traj.states[k].ia - oracle[k].ia));
      worst = std::max(worst, std::abs(traj.states[k].r - oracle[k].r));
    }
    INFO("max |RK4 - Euler oracle| = " << worst << " counts");
    // the mismatch is dominated by the first-order oracle's own O(dt) error,
    // measured at 7.2e-6 * n for this configuration
    REQUIRE(worst <= 2e-5 * p.n);
  }
}

TEST_CASE("RK4 converges at fourth order") {
  ModelParams p = low_quality_params();
  StateVec x0{p.n - 150.0, 100.0, 50.0, 0.0};
  const double t_end = 30.0;
  const double out_every = 0.4;

  auto max_error = [&](const Trajectory& a, const Trajectory& ref) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.states.size(); ++i) {
      const StateVec d = a.states[i] - ref.states[i];
      for (double v : {d.s, d.ia, d.ib, d.r}) worst = std::max(worst, std::abs(v));
    }
    return worst;
  };

  const Trajectory ref =
      integrate(x0, p, RhsMode::Conserving, {1e-4, t_end, out_every, Method::RK4, true});
  const Trajectory coarse =
      integrate(x0, p, RhsMode::Conserving, {0.2, t_end, out_every, Method::RK4, true});
  const Trajectory fine =
      integrate(x0, p, RhsMode::Conserving, {0.1, t_end, out_every, Method::RK4, true});

  const double ratio = max_error(coarse, ref) / max_error(fine, ref);
  INFO("error ratio per step halving: " << ratio);
  REQUIRE(ratio >= 12.0);
  REQUIRE(ratio <= 20.0);
}
