#ifndef RUMORSIM_INTEGRATOR_HPP
#define RUMORSIM_INTEGRATOR_HPP

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "rumorsim/model.hpp"

namespace rumorsim {

/// Raised when time stepping produces a non-finite state.
class DivergenceError : public std::runtime_error {
public:
  DivergenceError(const std::string& what, double t) : std::runtime_error(what), time(t) {}
  double time;  ///< simulation time (days) of the failing step
};

enum class Method { RK4, Euler };

inline const char* to_string(Method m) { return m == Method::RK4 ? "rk4" : "euler"; }

struct IntegrationControls {
  double dt = 0.01;           ///< step size, days
  double t_end = 100.0;       ///< horizon, days
  double output_every = 0.5;  ///< output cadence, days; integer multiple of dt
  Method method = Method::RK4;
  bool clamp_negatives = true;  ///< zero tiny negative excursions after each full step

  bool operator==(const IntegrationControls&) const = default;
};

inline ValidationResult validate_controls(const IntegrationControls& c) {
  ValidationResult res;
  if (!(c.dt > 0.0) || !std::isfinite(c.dt))
    res.violations.push_back({"dt", "must be finite and > 0"});
  if (!(c.t_end >= c.dt) || !std::isfinite(c.t_end))
    res.violations.push_back({"t_end", "must be finite and >= dt"});
  if (!(c.output_every >= c.dt) || !std::isfinite(c.output_every)) {
    res.violations.push_back({"output_every", "must be finite and >= dt"});
  } else {
    const double k = std::round(c.output_every / c.dt);
    if (!(k >= 1.0) || std::abs(c.output_every - k * c.dt) > 1e-9)
      res.violations.push_back({"output_every", "must be an integer multiple of dt"});
  }
  return res;
}

/// Time series of states on a uniform output grid starting at t = 0.
struct Trajectory {
  std::vector<double> times;
  std::vector<StateVec> states;
  RhsMode mode = RhsMode::Conserving;
  ModelParams params;
};

namespace detail {

inline StateVec step_unchecked(const StateVec& x, const ModelParams& p, RhsMode mode,
                               double dt, Method method) {
  if (method == Method::Euler) {
    return x + dt * rhs_unchecked(x, p, mode);
  }
  // classical 4th-order Runge-Kutta
  const StateVec k1 = rhs_unchecked(x, p, mode);
  const StateVec k2 = rhs_unchecked(x + (dt / 2.0) * k1, p, mode);
  const StateVec k3 = rhs_unchecked(x + (dt / 2.0) * k2, p, mode);
  const StateVec k4 = rhs_unchecked(x + dt * k3, p, mode);
  return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace detail

/// One integration step. Pure and deterministic.
inline StateVec step(const StateVec& state, const ModelParams& params, RhsMode mode,
                     double dt, Method method) {
  ValidationResult res = validate_params(params);
  res.merge(validate_state(state));
  if (!(dt > 0.0) || !std::isfinite(dt)) res.violations.push_back({"dt", "must be finite and > 0"});
  res.require();
  const StateVec out = detail::step_unchecked(state, params, mode, dt, method);
  if (!out.finite()) throw DivergenceError("step produced a non-finite state", dt);
  return out;
}

/// Advance `initial` over [0, t_end], emitting a state every `output_every`
/// days. The emitted grid is k * output_every for k = 0 .. floor(t_end /
/// output_every); a horizon that is not a multiple of the cadence is truncated
/// to the last grid point. Deterministic: identical inputs give bit-identical
/// trajectories.
inline Trajectory integrate(const StateVec& initial, const ModelParams& params, RhsMode mode,
                            const IntegrationControls& controls) {
  ValidationResult res = validate_params(params);
  res.merge(validate_state(initial));
  res.merge(validate_controls(controls));
  res.require();

  const auto steps_per_output =
      static_cast<std::size_t>(std::round(controls.output_every / controls.dt));
  const auto n_outputs =
      static_cast<std::size_t>(std::floor(controls.t_end / controls.output_every + 1e-9));

  Trajectory traj;
  traj.mode = mode;
  traj.params = params;
  traj.times.reserve(n_outputs + 1);
  traj.states.reserve(n_outputs + 1);
  traj.times.push_back(0.0);
  traj.states.push_back(initial);

  StateVec x = initial;
  for (std::size_t out = 1; out <= n_outputs; ++out) {
    for (std::size_t sub = 0; sub < steps_per_output; ++sub) {
      x = detail::step_unchecked(x, params, mode, controls.dt, controls.method);
      if (!x.finite()) {
        const double t_fail =
            static_cast<double>((out - 1) * steps_per_output + sub + 1) * controls.dt;
        throw DivergenceError("integration diverged", t_fail);
      }
      if (controls.clamp_negatives) x = x.clamped_nonnegative();
    }
    traj.times.push_back(static_cast<double>(out) * controls.output_every);
    traj.states.push_back(x);
  }
  return traj;
}

}  // namespace rumorsim

#endif  // RUMORSIM_INTEGRATOR_HPP
