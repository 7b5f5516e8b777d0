#ifndef RUMORSIM_GILLESPIE_HPP
#define RUMORSIM_GILLESPIE_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "rumorsim/integrator.hpp"
#include "rumorsim/model.hpp"

namespace rumorsim {

/// Per-channel transition rates of the conserving dynamics on n discrete
/// individuals, events per day. The discrete simulator implements only the
/// conserving reading: the literal equations destroy mass and admit no
/// consistent individual-level transition scheme.
struct EventRates {
  double rumor_adoption = 0.0;   ///< S -> I_A, rate b1*w1*ia*s/n
  double debunk_adoption = 0.0;  ///< S -> I_B, rate b2*w2*ib*s/n
  double replacement = 0.0;      ///< I_A -> I_B, rate o*w3*ia*ib/n
  double rumor_fade = 0.0;       ///< I_A -> R, rate r1*ia
  double debunk_fade = 0.0;      ///< I_B -> R, rate r2*ib

  double total() const {
    return rumor_adoption + debunk_adoption + replacement + rumor_fade + debunk_fade;
  }
};

inline EventRates event_rates(const StateVec& x, const ModelParams& p) {
  return {p.b1 * p.w1 * x.ia * x.s / p.n,
          p.b2 * p.w2 * x.ib * x.s / p.n,
          p.o * p.w3 * x.ia * x.ib / p.n,
          p.r1 * x.ia,
          p.r2 * x.ib};
}

/// Output grid and horizon for a stochastic run.
struct StochasticControls {
  double output_every = 0.5;  ///< sample-and-hold cadence, days
  double t_end = 100.0;       ///< horizon, days
};

inline ValidationResult validate_stochastic_controls(const StochasticControls& c) {
  ValidationResult res;
  if (!(c.output_every > 0.0) || !std::isfinite(c.output_every))
    res.violations.push_back({"output_every", "must be finite and > 0"});
  if (!(c.t_end >= c.output_every) || !std::isfinite(c.t_end))
    res.violations.push_back({"t_end", "must be finite and >= output_every"});
  return res;
}

/// One exact sample path plus its bookkeeping.
struct StochasticRun {
  std::uint64_t seed = 0;
  Trajectory trajectory;           ///< integer counts sampled on the output grid
  std::uint64_t event_count = 0;   ///< total transitions fired
  std::array<std::uint64_t, 5> channel_counts{};  ///< same order as EventRates fields
};

/// Deterministic seed split for run `index` of an ensemble (splitmix64 mix).
inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t index) {
  std::uint64_t z = base + 0x9E3779B97F4A7C15ull * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

namespace detail {

// Direct-method Gillespie over the five channels, with sample-and-hold
// emission onto a fixed output grid. Waiting times and channel picks are
// derived from raw mt19937_64 draws so runs reproduce bit-identically for a
// given seed on any platform.
class GillespieEngine {
public:
  GillespieEngine(const StateVec& initial_counts, const ModelParams& params, std::uint64_t seed)
      : params_(params), rng_(seed) {
    s_ = static_cast<std::int64_t>(std::llround(initial_counts.s));
    ia_ = static_cast<std::int64_t>(std::llround(initial_counts.ia));
    ib_ = static_cast<std::int64_t>(std::llround(initial_counts.ib));
    r_ = static_cast<std::int64_t>(std::llround(initial_counts.r));
  }

  StateVec state() const {
    return {static_cast<double>(s_), static_cast<double>(ia_), static_cast<double>(ib_),
            static_cast<double>(r_)};
  }

  double time() const { return t_; }
  std::uint64_t event_count() const { return events_; }
  const std::array<std::uint64_t, 5>& channel_counts() const { return channels_; }

  /// Move `amount` individuals from S to I_B (capped by the S occupancy).
  void inject_refuters(std::int64_t amount) {
    const std::int64_t moved = std::min(amount, s_);
    s_ -= moved;
    ib_ += moved;
  }

  /// Advance the chain to t_limit. Every grid time in [grid[cursor], t_limit]
  /// (strictly below t_limit when inclusive_limit is false) gets the held
  /// state appended to `out` and advances `cursor`.
  void run_to(double t_limit, std::span<const double> grid, std::size_t& cursor,
              std::vector<StateVec>& out, bool inclusive_limit) {
    auto within_limit = [&](double g) { return inclusive_limit ? g <= t_limit : g < t_limit; };
    for (;;) {
      const EventRates rates = event_rates(state(), params_);
      const double total = rates.total();
      if (!(total > 0.0)) {
        // absorbing state: hold to the end of this segment
        while (cursor < grid.size() && within_limit(grid[cursor])) {
          out.push_back(state());
          ++cursor;
        }
        t_ = t_limit;
        return;
      }
      const double wait = -std::log1p(-uniform()) / total;
      const double t_next = t_ + wait;
      if (t_next > t_limit) {
        while (cursor < grid.size() && within_limit(grid[cursor])) {
          out.push_back(state());
          ++cursor;
        }
        // truncation is statistically exact: the exponential clock is memoryless
        t_ = t_limit;
        return;
      }
      while (cursor < grid.size() && grid[cursor] < t_next && within_limit(grid[cursor])) {
        out.push_back(state());
        ++cursor;
      }
      fire(rates, uniform() * total);
      t_ = t_next;
      ++events_;
    }
  }

private:
  double uniform() {  // in [0, 1), 53-bit resolution
    return static_cast<double>(rng_() >> 11) * 0x1.0p-53;
  }

  void fire(const EventRates& rates, double pick) {
    // walk the channels; rounding slack in the subtraction chain falls
    // through to the last channel with a positive rate, never to a zero one
    const double rate[5] = {rates.rumor_adoption, rates.debunk_adoption, rates.replacement,
                            rates.rumor_fade, rates.debunk_fade};
    int chosen = -1;
    for (int i = 0; i < 5; ++i) {
      if (rate[i] <= 0.0) continue;
      chosen = i;
      if (pick < rate[i]) break;
      pick -= rate[i];
    }
    switch (chosen) {  // total() > 0 guarantees chosen is set
      case 0: --s_; ++ia_; break;
      case 1: --s_; ++ib_; break;
      case 2: --ia_; ++ib_; break;
      case 3: --ia_; ++r_; break;
      case 4: --ib_; ++r_; break;
    }
    ++channels_[static_cast<std::size_t>(chosen)];
  }

  ModelParams params_;
  std::mt19937_64 rng_;
  std::int64_t s_ = 0, ia_ = 0, ib_ = 0, r_ = 0;
  double t_ = 0.0;
  std::uint64_t events_ = 0;
  std::array<std::uint64_t, 5> channels_{};
};

inline ValidationResult validate_counts(const StateVec& x, const ModelParams& p) {
  ValidationResult res;
  auto integral = [&](const char* name, double v) {
    if (!(v >= 0.0) || !std::isfinite(v) || std::round(v) != v)
      res.violations.push_back({name, "must be a non-negative integer count"});
  };
  integral("s", x.s);
  integral("ia", x.ia);
  integral("ib", x.ib);
  integral("r", x.r);
  if (std::round(p.n) != p.n)
    res.violations.push_back({"n", "must be an integer for stochastic runs"});
  if (res.ok() && x.s + x.ia + x.ib + x.r != p.n)
    res.violations.push_back({"initial", "counts must sum exactly to n"});
  return res;
}

inline std::vector<double> output_grid(double output_every, double t_end) {
  const auto n_outputs = static_cast<std::size_t>(std::floor(t_end / output_every + 1e-9));
  std::vector<double> grid(n_outputs + 1);
  for (std::size_t k = 0; k <= n_outputs; ++k) grid[k] = static_cast<double>(k) * output_every;
  return grid;
}

}  // namespace detail

/// Exact continuous-time Markov sample path of the conserving dynamics.
/// `initial` must hold non-negative integer counts summing exactly to n.
inline StochasticRun gillespie_run(const StateVec& initial, const ModelParams& params,
                                   const StochasticControls& controls, std::uint64_t seed) {
  ValidationResult res = validate_params(params);
  res.merge(validate_stochastic_controls(controls));
  if (res.ok()) res.merge(detail::validate_counts(initial, params));
  res.require();

  const std::vector<double> grid = detail::output_grid(controls.output_every, controls.t_end);

  StochasticRun run;
  run.seed = seed;
  run.trajectory.mode = RhsMode::Conserving;
  run.trajectory.params = params;
  run.trajectory.times = grid;
  run.trajectory.states.reserve(grid.size());

  detail::GillespieEngine engine(initial, params, seed);
  std::size_t cursor = 0;
  engine.run_to(grid.back(), grid, cursor, run.trajectory.states, true);
  run.event_count = engine.event_count();
  run.channel_counts = engine.channel_counts();
  return run;
}

/// Pointwise ensemble mean and standard deviation per compartment.
struct EnsembleStats {
  std::vector<double> times;
  std::vector<StateVec> mean;
  std::vector<StateVec> sd;  ///< sample sd (n-1 denominator); 0 for a single run
  std::size_t runs = 0;
};

/// Pointwise sample mean/sd over runs sharing one output grid and parameters.
inline EnsembleStats ensemble_stats(std::span<const StochasticRun> runs) {
  if (runs.empty()) throw ValidationError("ensemble_stats: no runs given");
  const Trajectory& first = runs.front().trajectory;
  for (const StochasticRun& r : runs) {
    if (r.trajectory.times != first.times)
      throw ValidationError("ensemble_stats: runs do not share an output grid");
    if (!(r.trajectory.params == first.params))
      throw ValidationError("ensemble_stats: runs do not share parameters");
  }

  const std::size_t points = first.times.size();
  const auto count = static_cast<double>(runs.size());
  EnsembleStats stats;
  stats.times = first.times;
  stats.mean.resize(points);
  stats.sd.resize(points);
  stats.runs = runs.size();

  for (std::size_t i = 0; i < points; ++i) {
    StateVec m{};
    for (const StochasticRun& r : runs) m = m + r.trajectory.states[i];
    m = (1.0 / count) * m;
    stats.mean[i] = m;
    StateVec ss{};
    if (runs.size() > 1) {
      for (const StochasticRun& r : runs) {
        const StateVec d = r.trajectory.states[i] - m;
        ss = ss + StateVec{d.s * d.s, d.ia * d.ia, d.ib * d.ib, d.r * d.r};
      }
      ss = (1.0 / (count - 1.0)) * ss;
      ss = {std::sqrt(ss.s), std::sqrt(ss.ia), std::sqrt(ss.ib), std::sqrt(ss.r)};
    }
    stats.sd[i] = ss;
  }
  return stats;
}

}  // namespace rumorsim

#endif  // RUMORSIM_GILLESPIE_HPP
