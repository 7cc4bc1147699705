#pragma once

// Impulse shapers (ZV, ZVD), command convolution and servo segment tables.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "jointshape/error.hpp"
#include "jointshape/oscillator.hpp"

namespace jointshape {

/// Tolerance on Σ A_i = 1.
inline constexpr double kAmplitudeSumTolerance = 1e-12;
/// Breakpoints closer than this are treated as one.
inline constexpr double kBreakpointMergeTolerance = 1e-9;

struct Impulse {
  double amplitude = 0.0;
  double time = 0.0;  // s

  friend bool operator==(const Impulse&, const Impulse&) = default;
};

/// Ordered positive impulses, unit total amplitude, first impulse at t = 0.
class ImpulseShaper {
 public:
  static ImpulseShaper create(std::vector<Impulse> impulses) {
    auto fail = [](const std::string& msg) { throw Error(ErrorKind::InvalidShaper, "shaping", msg); };
    if (impulses.empty()) fail("shaper needs at least one impulse");
    double sum = 0.0;
    for (std::size_t i = 0; i < impulses.size(); ++i) {
      const auto& imp = impulses[i];
      if (!std::isfinite(imp.amplitude) || imp.amplitude <= 0.0) {
        fail("impulse " + std::to_string(i) + " amplitude must be positive");
      }
      if (!std::isfinite(imp.time)) fail("impulse " + std::to_string(i) + " time must be finite");
      if (i > 0 && !(imp.time > impulses[i - 1].time)) fail("impulse times must be strictly increasing");
      sum += imp.amplitude;
    }
    if (impulses.front().time != 0.0) fail("first impulse must be at t = 0");
    if (std::abs(sum - 1.0) > kAmplitudeSumTolerance) {
      fail("impulse amplitudes sum to " + std::to_string(sum) + ", expected 1");
    }
    return ImpulseShaper(std::move(impulses));
  }

  /// Rescales the amplitudes to unit sum before validating.
  static ImpulseShaper normalized(std::vector<Impulse> impulses) {
    double sum = 0.0;
    for (const auto& imp : impulses) sum += imp.amplitude;
    if (sum > 0.0 && std::isfinite(sum)) {
      for (auto& imp : impulses) imp.amplitude /= sum;
    }
    return create(std::move(impulses));
  }

  static ImpulseShaper identity() { return ImpulseShaper({Impulse{1.0, 0.0}}); }

  const std::vector<Impulse>& impulses() const noexcept { return impulses_; }
  std::size_t size() const noexcept { return impulses_.size(); }
  double duration() const noexcept { return impulses_.back().time; }

  friend bool operator==(const ImpulseShaper&, const ImpulseShaper&) = default;

 private:
  explicit ImpulseShaper(std::vector<Impulse> impulses) : impulses_(std::move(impulses)) {}

  std::vector<Impulse> impulses_;
};

/// Which model frequency sets the impulse spacing π/ω.
enum class FrequencyChoice { Damped, Natural };

namespace detail {

inline double design_frequency(const OscillatorModel& model, FrequencyChoice choice) {
  return choice == FrequencyChoice::Damped ? model.damped_frequency() : model.natural_frequency();
}

// k = exp(−ζπ/√(1−ζ²)), the per-half-cycle amplitude decay.
inline double half_cycle_decay(const OscillatorModel& model) {
  const double zeta = model.damping_ratio();
  return std::exp(-zeta * std::numbers::pi / std::sqrt(1.0 - zeta * zeta));
}

}  // namespace detail

/// Zero-vibration-derivative shaper: amplitudes [1, 2k, k²]/(1+k)² at
/// t = [0, π/ω, 2π/ω].
inline ImpulseShaper design_zvd(const OscillatorModel& model, FrequencyChoice choice = FrequencyChoice::Damped) {
  const double k = detail::half_cycle_decay(model);
  const double half_period = std::numbers::pi / detail::design_frequency(model, choice);
  const double norm = (1.0 + k) * (1.0 + k);
  return ImpulseShaper::create({
      {1.0 / norm, 0.0},
      {2.0 * k / norm, half_period},
      {k * k / norm, 2.0 * half_period},
  });
}

/// Two-impulse zero-vibration shaper: amplitudes [1, k]/(1+k) at t = [0, π/ω].
inline ImpulseShaper design_zv(const OscillatorModel& model, FrequencyChoice choice = FrequencyChoice::Damped) {
  const double k = detail::half_cycle_decay(model);
  const double half_period = std::numbers::pi / detail::design_frequency(model, choice);
  return ImpulseShaper::create({
      {1.0 / (1.0 + k), 0.0},
      {k / (1.0 + k), half_period},
  });
}

/// Lag of the shaped command's completion behind the unshaped command.
inline double time_penalty(const ImpulseShaper& shaper) { return shaper.duration(); }

/// output(t) = Σ A_i · input(t − t_i) on the input's grid, extended to cover
/// the input duration plus the shaper duration.
inline SampledCommand shape_sampled(const ImpulseShaper& shaper, const SampledCommand& input) {
  validate(Command{input});
  const double extra = std::ceil(shaper.duration() / input.dt - kBreakpointMergeTolerance);
  const std::size_t count = input.samples.size() + static_cast<std::size_t>(std::max(0.0, extra));

  SampledCommand out;
  out.dt = input.dt;
  out.samples.resize(count, 0.0);
  for (std::size_t j = 0; j < count; ++j) {
    const double t = input.time_at(j);
    double acc = 0.0;
    for (const auto& imp : shaper.impulses()) acc += imp.amplitude * sampled_value(input, t - imp.time);
    out.samples[j] = acc;
  }
  return out;
}

/// Samples an analytic or sampled command at `dt` until it has settled, then
/// convolves it with the shaper.
inline SampledCommand shape_command(const ImpulseShaper& shaper, const Command& command, double dt) {
  validate(command);
  if (const auto* sampled = std::get_if<SampledCommand>(&command); sampled && sampled->dt == dt) {
    return shape_sampled(shaper, *sampled);
  }
  const double end = std::max(command_end_time(command), dt);
  const double steps = std::ceil(end / dt - kBreakpointMergeTolerance) + 1.0;
  return shape_sampled(shaper, sample(command, dt, steps * dt));
}

// ---------------------------------------------------------------------------
// Segment tables
// ---------------------------------------------------------------------------

struct Segment {
  double start_time = 0.0;      // s
  double start_position = 0.0;  // rad
  double end_position = 0.0;    // rad
  double velocity = 0.0;        // rad/s, signed

  double duration() const noexcept {
    return velocity == 0.0 ? 0.0 : std::abs((end_position - start_position) / velocity);
  }
  double end_time() const noexcept { return start_time + duration(); }

  friend bool operator==(const Segment&, const Segment&) = default;
};

/// Constant-velocity moves a position servo can execute one after another.
/// Between the end of one segment and the start of the next the servo holds.
struct SegmentedProfile {
  std::vector<Segment> segments;

  double final_position() const noexcept { return segments.empty() ? 0.0 : segments.back().end_position; }
  double end_time() const noexcept { return segments.empty() ? 0.0 : segments.back().end_time(); }

  friend bool operator==(const SegmentedProfile&, const SegmentedProfile&) = default;
};

inline void validate(const SegmentedProfile& profile, double tolerance = 1e-9) {
  auto fail = [](const std::string& msg) { throw Error(ErrorKind::InvalidCommand, "shaping", msg); };
  for (std::size_t i = 0; i < profile.segments.size(); ++i) {
    const auto& s = profile.segments[i];
    if (!std::isfinite(s.start_time) || !std::isfinite(s.start_position) || !std::isfinite(s.end_position) ||
        !std::isfinite(s.velocity)) {
      fail("segment " + std::to_string(i + 1) + " has a non-finite field");
    }
    if (i > 0) {
      const auto& prev = profile.segments[i - 1];
      if (!(s.start_time > prev.start_time)) fail("segment start times must be strictly increasing");
      if (std::abs(s.start_position - prev.end_position) > tolerance) {
        fail("segment " + std::to_string(i + 1) + " does not start where segment " + std::to_string(i) + " ends");
      }
    }
    const double travel = s.end_position - s.start_position;
    if ((travel > 0.0 && s.velocity <= 0.0) || (travel < 0.0 && s.velocity >= 0.0)) {
      fail("segment " + std::to_string(i + 1) + " velocity sign does not match its travel");
    }
  }
}

/// Exact piecewise-linear form of a shaped ramp.
///
/// Each impulse i contributes a copy of the ramp delayed by t_i and scaled by
/// A_i, so the velocity only changes at t_i and t_i + duration. On each
/// interval between those breakpoints the velocity is the ramp speed times
/// the total amplitude of the copies still moving. Idle intervals are
/// dropped and adjacent intervals with equal velocity are merged.
inline SegmentedProfile segment_ramp(const ImpulseShaper& shaper, const Ramp& ramp) {
  validate(Command{ramp});
  SegmentedProfile profile;
  if (ramp.target == 0.0) return profile;

  const double move = ramp.duration();
  const double direction = ramp.target > 0.0 ? 1.0 : -1.0;

  std::vector<double> breakpoints;
  breakpoints.reserve(2 * shaper.size());
  for (const auto& imp : shaper.impulses()) {
    breakpoints.push_back(imp.time);
    breakpoints.push_back(imp.time + move);
  }
  std::sort(breakpoints.begin(), breakpoints.end());
  std::vector<double> merged;
  for (double t : breakpoints) {
    if (merged.empty() || t - merged.back() > kBreakpointMergeTolerance) merged.push_back(t);
  }

  double position = 0.0;
  double previous_end = -1.0;
  for (std::size_t j = 0; j + 1 < merged.size(); ++j) {
    const double begin = merged[j];
    const double end = merged[j + 1];
    const double mid = 0.5 * (begin + end);
    double active = 0.0;
    for (const auto& imp : shaper.impulses()) {
      if (imp.time <= mid && mid < imp.time + move) active += imp.amplitude;
    }
    if (active == 0.0) continue;

    const double velocity = direction * ramp.speed * active;
    const double next_position = position + velocity * (end - begin);
    auto& segs = profile.segments;
    if (!segs.empty() && previous_end == begin &&
        std::abs(segs.back().velocity - velocity) <= 1e-12 * std::abs(velocity)) {
      segs.back().end_position = next_position;
    } else {
      segs.push_back(Segment{begin, position, next_position, velocity});
    }
    position = next_position;
    previous_end = end;
  }
  profile.segments.back().end_position = ramp.target;
  return profile;
}

/// Position of the profile at time t (origin before the first segment).
inline double profile_position(const SegmentedProfile& profile, double t) {
  double position = 0.0;
  for (const auto& s : profile.segments) {
    if (t < s.start_time) break;
    const double travelled = s.velocity * (t - s.start_time);
    const double span = s.end_position - s.start_position;
    position = std::abs(travelled) >= std::abs(span) ? s.end_position : s.start_position + travelled;
  }
  return position;
}

inline double max_abs_velocity(const SegmentedProfile& profile) {
  double v = 0.0;
  for (const auto& s : profile.segments) v = std::max(v, std::abs(s.velocity));
  return v;
}

/// Rounds a profile to servo-table precision: times and angles to 0.01,
/// velocities to 0.001.
inline SegmentedProfile round_for_table(const SegmentedProfile& profile) {
  // Divide by the integer scale so that results print as short decimals.
  auto round_to = [](double x, double scale) {
    const double r = std::round(x * scale) / scale;
    return r == 0.0 ? 0.0 : r;
  };
  SegmentedProfile out = profile;
  for (auto& s : out.segments) {
    s.start_time = round_to(s.start_time, 100.0);
    s.start_position = round_to(s.start_position, 100.0);
    s.end_position = round_to(s.end_position, 100.0);
    s.velocity = round_to(s.velocity, 1000.0);
  }
  return out;
}

}  // namespace jointshape
