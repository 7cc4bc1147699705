#pragma once

// Response metrics and robustness sweeps for shaped commands.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "jointshape/error.hpp"
#include "jointshape/oscillator.hpp"
#include "jointshape/shaping.hpp"

namespace jointshape {

inline constexpr double kDefaultSettlingBandPercent = 2.0;
/// Residual vibration is observed for this many damped periods after the
/// command completes.
inline constexpr double kResidualWindowPeriods = 5.0;

struct ResponseMetrics {
  double max_overshoot_percent = 0.0;
  double residual_amplitude = 0.0;     // rad
  std::optional<double> settling_time;  // s, empty when the trace never settles
  double time_penalty = 0.0;           // s

  friend bool operator==(const ResponseMetrics&, const ResponseMetrics&) = default;
};

/// Metrics of a response moving from its first sample towards `target`.
///
/// Overshoot is measured past the target in the direction of travel, as a
/// percentage of the move distance. The residual amplitude is the largest
/// |θ − target| at or after `command_end_time`. Settling is the first time
/// after which the response stays within the band, and is never reported
/// before the command completes.
inline ResponseMetrics compute_metrics(const Trace& trace, double target, double command_end_time,
                                       double band_percent = kDefaultSettlingBandPercent,
                                       double time_penalty = 0.0) {
  validate(trace);
  if (trace.samples.empty() || trace.end_time() < command_end_time - kBreakpointMergeTolerance) {
    throw Error(ErrorKind::InsufficientTrace, "analysis",
                "trace ends at " + std::to_string(trace.end_time()) + " s, before the command completes at " +
                    std::to_string(command_end_time) + " s");
  }
  if (!std::isfinite(band_percent) || band_percent < 0.0) {
    throw Error(ErrorKind::InvalidTrace, "analysis", "settling band must be non-negative");
  }

  const double move = target - trace.samples.front();
  const double direction = move >= 0.0 ? 1.0 : -1.0;

  ResponseMetrics m;
  m.time_penalty = time_penalty;

  if (move != 0.0) {
    double worst = 0.0;
    for (double theta : trace.samples) worst = std::max(worst, direction * (theta - target));
    m.max_overshoot_percent = 100.0 * worst / std::abs(move);
  }

  for (std::size_t i = 0; i < trace.size(); ++i) {
    if (trace.time_at(i) >= command_end_time - kBreakpointMergeTolerance) {
      m.residual_amplitude = std::max(m.residual_amplitude, std::abs(trace.samples[i] - target));
    }
  }

  const double band = band_percent / 100.0 * (move != 0.0 ? std::abs(move) : std::abs(target));
  std::optional<std::size_t> last_outside;
  for (std::size_t i = trace.size(); i-- > 0;) {
    if (std::abs(trace.samples[i] - target) > band) {
      last_outside = i;
      break;
    }
  }
  if (!last_outside) {
    m.settling_time = std::max(trace.start_time, command_end_time);
  } else if (*last_outside + 1 < trace.size()) {
    m.settling_time = std::max(trace.time_at(*last_outside + 1), command_end_time);
  }
  return m;
}

inline double residual_percent(const ResponseMetrics& metrics, double move_distance) {
  return 100.0 * metrics.residual_amplitude / std::abs(move_distance);
}

/// Simulation length for residual measurements: the command plus five damped
/// periods.
inline double residual_window_duration(const OscillatorModel& model, double command_end_time) {
  return command_end_time + kResidualWindowPeriods * model.damped_period();
}

struct ShapedComparison {
  ResponseMetrics unshaped;
  ResponseMetrics shaped;
};

/// Simulates the raw and the shaped command on the same model. Both commands
/// are sampled at `dt` so that an identity shaper reproduces the unshaped run.
inline ShapedComparison compare_shaped_unshaped(const OscillatorModel& model, const ImpulseShaper& shaper,
                                                const Command& command, double dt = kDefaultDt) {
  const double target = command_final_value(command);
  const double unshaped_end = command_end_time(command);
  const double penalty = time_penalty(shaper);
  const double duration = residual_window_duration(model, unshaped_end + penalty);

  const auto raw = shape_command(ImpulseShaper::identity(), command, dt);
  const auto shaped = shape_command(shaper, command, dt);

  ShapedComparison out;
  out.unshaped = compute_metrics(simulate(model, raw, dt, duration), target, unshaped_end);
  out.shaped = compute_metrics(simulate(model, shaped, dt, duration), target, unshaped_end + penalty,
                               kDefaultSettlingBandPercent, penalty);
  return out;
}

// ---------------------------------------------------------------------------
// Robustness sweeps
// ---------------------------------------------------------------------------

enum class SweepParameter { NaturalFrequency, DampingRatio };

struct SensitivityPoint {
  double ratio = 1.0;                      // actual / nominal
  std::optional<double> residual_percent;  // % of move distance
  std::string error;                       // set when the perturbed point failed
};

struct SensitivityCurve {
  std::vector<SensitivityPoint> points;
};

/// Inclusive grid lo, lo + step, ..., hi.
inline std::vector<double> ratio_grid(double lo, double hi, double step) {
  if (!(lo > 0.0) || !(hi >= lo) || !(step > 0.0)) {
    throw Error(ErrorKind::InvalidModel, "analysis", "ratio grid needs 0 < lo <= hi and step > 0");
  }
  std::vector<double> out;
  const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9));
  for (std::size_t i = 0; i <= n; ++i) {
    // Snap to 1e-12 so that nominal ratios such as 1.0 land exactly.
    out.push_back(std::round((lo + step * static_cast<double>(i)) * 1e12) / 1e12);
  }
  return out;
}

/// Residual vibration of the shaped command on perturbed copies of the
/// nominal model. Failing points are recorded in the curve.
inline SensitivityCurve robustness_sweep(const ImpulseShaper& shaper, const OscillatorModel& nominal,
                                         SweepParameter parameter, std::span<const double> ratios,
                                         const Command& command, double dt = kDefaultDt) {
  for (std::size_t i = 1; i < ratios.size(); ++i) {
    if (!(ratios[i] > ratios[i - 1])) {
      throw Error(ErrorKind::InvalidModel, "analysis", "sweep ratios must be strictly increasing");
    }
  }
  const double target = command_final_value(command);
  const double move = target - command_initial_value(command);
  if (move == 0.0) {
    throw Error(ErrorKind::InvalidCommand, "analysis", "sweep command must move");
  }
  const double end = command_end_time(command) + time_penalty(shaper);
  const auto shaped = shape_command(shaper, command, dt);

  SensitivityCurve curve;
  curve.points.reserve(ratios.size());
  for (double r : ratios) {
    SensitivityPoint point;
    point.ratio = r;
    try {
      const auto model =
          parameter == SweepParameter::NaturalFrequency
              ? OscillatorModel::create(nominal.natural_frequency() * r, nominal.damping_ratio())
              : OscillatorModel::create(nominal.natural_frequency(), nominal.damping_ratio() * r);
      const auto trace = simulate(model, shaped, dt, residual_window_duration(model, end));
      point.residual_percent = residual_percent(compute_metrics(trace, target, end), move);
    } catch (const Error& e) {
      point.error = std::string(to_string(e.kind())) + ": " + e.what();
    }
    curve.points.push_back(std::move(point));
  }
  return curve;
}

}  // namespace jointshape
