#ifndef RUMORSIM_ANALYSIS_HPP
#define RUMORSIM_ANALYSIS_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rumorsim/detail/parallel.hpp"
#include "rumorsim/integrator.hpp"
#include "rumorsim/scenario.hpp"

namespace rumorsim {

/// Fraction of n that I_A must reach for the rumor to count as "ongoing" when
/// measuring its duration.
inline constexpr double kDefaultThresholdFrac = 0.005;

/// Outcome metrics of one run.
struct SimMetrics {
  double peak_ia = 0.0;       ///< max of I_A over the trajectory, counts
  double peak_time = 0.0;     ///< timestamp of peak_ia, days (earliest on ties)
  double duration = 0.0;      ///< longest contiguous interval with I_A >= threshold, days
  double spread_scale = 0.0;  ///< cumulative rumor adoptions, integral of b1*(w1/n)*ia*s dt
  double final_r = 0.0;       ///< R at the horizon, counts
};

inline constexpr std::array<const char*, 5> kMetricNames = {
    "peak_ia", "peak_time", "duration", "spread_scale", "final_r"};

inline double metric_by_index(const SimMetrics& m, std::size_t i) {
  switch (i) {
    case 0: return m.peak_ia;
    case 1: return m.peak_time;
    case 2: return m.duration;
    case 3: return m.spread_scale;
    default: return m.final_r;
  }
}

/// Extract the outcome metrics from a trajectory. spread_scale uses the
/// trapezoid rule on the output grid; the duration interval boundaries are
/// located by linear interpolation between the bracketing samples, which keeps
/// the metric stable under grid refinement.
inline SimMetrics compute_metrics(const Trajectory& traj, double threshold_frac) {
  ValidationResult res;
  if (traj.times.empty()) res.violations.push_back({"trajectory", "must be non-empty"});
  if (!(threshold_frac > 0.0 && threshold_frac < 1.0))
    res.violations.push_back({"threshold_frac", "must be in (0, 1)"});
  res.require();

  const auto& t = traj.times;
  const auto& x = traj.states;
  const std::size_t count = t.size();

  SimMetrics m;
  m.final_r = x.back().r;

  // peak: earliest sampled argmax
  m.peak_ia = x[0].ia;
  m.peak_time = t[0];
  for (std::size_t i = 1; i < count; ++i) {
    if (x[i].ia > m.peak_ia) {
      m.peak_ia = x[i].ia;
      m.peak_time = t[i];
    }
  }

  // cumulative rumor adoptions by trapezoid on the output grid
  const ModelParams& p = traj.params;
  auto inflow = [&](const StateVec& s) { return p.b1 * (p.w1 / p.n) * s.ia * s.s; };
  for (std::size_t i = 0; i + 1 < count; ++i)
    m.spread_scale += 0.5 * (inflow(x[i]) + inflow(x[i + 1])) * (t[i + 1] - t[i]);

  // longest contiguous interval with ia >= threshold
  const double threshold = threshold_frac * p.n;
  auto cross_time = [&](std::size_t lo, std::size_t hi) {
    // ia crosses the threshold between samples lo and hi (one side strictly
    // below, the other at or above), so the denominator cannot vanish
    return t[lo] + (threshold - x[lo].ia) / (x[hi].ia - x[lo].ia) * (t[hi] - t[lo]);
  };
  double longest = 0.0;
  std::size_t i = 0;
  while (i < count) {
    if (x[i].ia >= threshold) {
      const double start = (i == 0) ? t[0] : cross_time(i - 1, i);
      std::size_t j = i;
      while (j + 1 < count && x[j + 1].ia >= threshold) ++j;
      const double stop = (j + 1 == count) ? t[j] : cross_time(j + 1, j);
      longest = std::max(longest, stop - start);
      i = j + 1;
    } else {
      ++i;
    }
  }
  m.duration = longest;
  return m;
}

// ---------------------------------------------------------------------------
// Direction classification
// ---------------------------------------------------------------------------

enum class Direction { Increasing, Decreasing, NonMonotone };

inline const char* to_string(Direction d) {
  switch (d) {
    case Direction::Increasing: return "increasing";
    case Direction::Decreasing: return "decreasing";
    default: return "non-monotone";
  }
}

/// Monotonicity of a metric series up to a relative tolerance: increasing if
/// every consecutive delta >= -eps * max|value|, decreasing symmetrically,
/// otherwise non-monotone. Fewer than two values is the degenerate case.
inline Direction classify_direction(std::span<const double> values, double eps = 1e-6) {
  if (values.size() < 2) return Direction::NonMonotone;
  double scale = 0.0;
  for (double v : values) scale = std::max(scale, std::abs(v));
  const double slack = eps * scale;
  bool increasing = true, decreasing = true;
  for (std::size_t i = 0; i + 1 < values.size(); ++i) {
    const double delta = values[i + 1] - values[i];
    if (delta < -slack) increasing = false;
    if (delta > slack) decreasing = false;
  }
  if (increasing) return Direction::Increasing;
  if (decreasing) return Direction::Decreasing;
  return Direction::NonMonotone;
}

/// Mean |delta| over the first half of the grid divided by the mean |delta|
/// over the second half. > 1 means the metric moves mostly at low parameter
/// values. NaN when the grid is too short for both halves.
inline double early_late_ratio(std::span<const double> values) {
  if (values.size() < 3) return std::numeric_limits<double>::quiet_NaN();
  const std::size_t mid = values.size() / 2;  // deltas [0, mid) vs [mid, end)
  double front = 0.0, back = 0.0;
  std::size_t front_n = 0, back_n = 0;
  for (std::size_t i = 0; i + 1 < values.size(); ++i) {
    const double d = std::abs(values[i + 1] - values[i]);
    if (i < mid) {
      front += d;
      ++front_n;
    } else {
      back += d;
      ++back_n;
    }
  }
  front /= static_cast<double>(front_n);
  back /= static_cast<double>(back_n);
  if (back == 0.0) return front == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
  return front / back;
}

inline const char* pacing_label(double ratio) {
  if (std::isnan(ratio)) return "n/a";
  if (ratio > 2.0) return "front-loaded";
  if (ratio < 0.5) return "back-loaded";
  return "balanced";
}

struct MetricTrend {
  std::string metric;
  Direction direction = Direction::NonMonotone;
  double early_late_ratio = std::numeric_limits<double>::quiet_NaN();
};

/// One-at-a-time sensitivity sweep over a single parameter.
struct SweepReport {
  std::string parameter;
  std::vector<double> grid;
  std::vector<SimMetrics> metrics;
  std::vector<MetricTrend> directions;  ///< one entry per kMetricNames
};

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

inline constexpr std::array<const char*, 6> kSweepableParams = {"b1", "b2", "o",
                                                                "w1", "w2", "w3"};

inline bool set_model_param(ModelParams& p, std::string_view name, double value) {
  if (name == "b1") p.b1 = value;
  else if (name == "b2") p.b2 = value;
  else if (name == "o") p.o = value;
  else if (name == "w1") p.w1 = value;
  else if (name == "w2") p.w2 = value;
  else if (name == "w3") p.w3 = value;
  else return false;
  return true;
}

/// Default grid per parameter family: fractions sweep 0..1 in steps of 0.1,
/// contact weights sweep the integers 0..16.
inline std::vector<double> default_sweep_grid(std::string_view parameter) {
  std::vector<double> grid;
  if (parameter == "b1" || parameter == "b2" || parameter == "o") {
    for (int i = 0; i <= 10; ++i) grid.push_back(static_cast<double>(i) / 10.0);
  } else {
    for (int i = 0; i <= 16; ++i) grid.push_back(static_cast<double>(i));
  }
  return grid;
}

/// Run one deterministic simulation per grid value of `parameter`, holding
/// everything else at the base scenario, and classify each metric's direction
/// of change. The fade rates r1, r2 and the population n are fixed by the
/// model and cannot be swept. Grid points run in parallel.
inline SweepReport sweep(const Scenario& base, std::string_view parameter,
                         std::span<const double> grid,
                         double threshold_frac = kDefaultThresholdFrac) {
  if (parameter == "r1" || parameter == "r2" || parameter == "n")
    throw ValidationError("fixed parameter: " + std::string(parameter) + " cannot be swept");
  {
    const bool known = std::any_of(kSweepableParams.begin(), kSweepableParams.end(),
                                   [&](const char* p) { return parameter == p; });
    if (!known)
      throw ValidationError("unknown sweep parameter: " + std::string(parameter) +
                            " (expected one of b1, b2, o, w1, w2, w3)");
  }
  ValidationResult res;
  if (grid.empty()) res.violations.push_back({"grid", "must be non-empty"});
  for (std::size_t i = 0; i + 1 < grid.size(); ++i)
    if (!(grid[i] < grid[i + 1])) {
      res.violations.push_back({"grid", "values must be strictly increasing"});
      break;
    }
  res.require();
  validate_scenario(base).require();

  // every substituted parameter set must validate before any run starts
  std::vector<Scenario> points;
  points.reserve(grid.size());
  for (double value : grid) {
    Scenario sc = base;
    set_model_param(sc.params, parameter, value);
    ValidationResult point = validate_scenario(sc);
    if (!point.ok())
      throw ValidationError("grid value " + std::to_string(value) + " for " +
                            std::string(parameter) + ": " + point.describe());
    points.push_back(std::move(sc));
  }

  SweepReport report;
  report.parameter = std::string(parameter);
  report.grid.assign(grid.begin(), grid.end());
  report.metrics.resize(points.size());
  detail::parallel_for_index(points.size(), [&](std::size_t i) {
    report.metrics[i] = compute_metrics(run_scenario(points[i]), threshold_frac);
  });

  for (std::size_t k = 0; k < kMetricNames.size(); ++k) {
    std::vector<double> series(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) series[i] = metric_by_index(report.metrics[i], k);
    report.directions.push_back(
        {kMetricNames[k], classify_direction(series), early_late_ratio(series)});
  }
  return report;
}

}  // namespace rumorsim

#endif  // RUMORSIM_ANALYSIS_HPP
