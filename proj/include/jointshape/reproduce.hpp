#pragma once

// Reference anchors for the shoulder-joint shaper design. Each anchor is
// recomputed from scratch and compared with its reference value.

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "jointshape/analysis.hpp"
#include "jointshape/oscillator.hpp"
#include "jointshape/shaping.hpp"
#include "jointshape/sysid.hpp"

namespace jointshape::reproduce {

enum class Comparison { AbsoluteWithin, RelativeWithin, AtMost, GreaterThan };

struct Anchor {
  std::string name;
  double expected = 0.0;
  double computed = 0.0;
  double tolerance = 0.0;
  Comparison comparison = Comparison::AbsoluteWithin;

  bool passed() const {
    switch (comparison) {
      case Comparison::AbsoluteWithin: return std::abs(computed - expected) <= tolerance;
      case Comparison::RelativeWithin: return std::abs(computed - expected) <= tolerance * std::abs(expected);
      case Comparison::AtMost: return computed <= expected;
      case Comparison::GreaterThan: return computed > expected;
    }
    return false;
  }
};

struct Report {
  std::vector<Anchor> anchors;

  bool all_passed() const {
    for (const auto& a : anchors) {
      if (!a.passed()) return false;
    }
    return true;
  }
};

// Design point of the shoulder-joint shaper.
inline constexpr double kDesignNaturalFrequency = 9.62;
inline constexpr double kDesignDampingRatio = 0.1;
// Identified free and forced responses.
inline constexpr double kFreeNaturalFrequency = 7.82;
inline constexpr double kFreeDampingRatio = 0.098;
inline constexpr double kFreeDampedFrequency = 7.78;
inline constexpr double kForcedNaturalFrequency = 9.62;
inline constexpr double kForcedDampingRatio = 0.094;
inline constexpr double kForcedDampedFrequency = 9.58;
// Unshaped servo move.
inline constexpr double kRampTarget = 1.34;
inline constexpr double kRampSpeed = 3.45;

inline constexpr double kShaperAmplitudes[] = {0.3344, 0.4877, 0.1778};
inline constexpr double kShaperTimes[] = {0.0, 0.3266, 0.6531};
inline constexpr double kSegmentDelays[] = {0.0, 0.32, 0.4, 0.62, 0.73};
inline constexpr double kSegmentEndAngles[] = {0.37, 0.57, 0.96, 1.15, 1.34};
inline constexpr double kSegmentVelocities[] = {1.154, 2.84, 1.68, 2.3, 0.62};

inline ImpulseShaper design_shaper() {
  return design_zvd(OscillatorModel::create(kDesignNaturalFrequency, kDesignDampingRatio), FrequencyChoice::Natural);
}

/// Free response released from θ0 = 1 rad, sampled at 1 ms for 5 s.
inline Trace synthetic_free_trace(const OscillatorModel& model, double theta0 = 1.0, double dt = kDefaultDt,
                                  double duration = 5.0) {
  Trace t;
  t.dt = dt;
  const auto n = static_cast<std::size_t>(std::llround(duration / dt));
  for (std::size_t i = 0; i <= n; ++i) t.samples.push_back(closed_form_free_response(model, theta0, dt * i));
  return t;
}

/// Step response from rest to `target`, the forced case oscillating about the target.
inline Trace synthetic_step_trace(const OscillatorModel& model, double target = 1.0, double dt = kDefaultDt,
                                  double duration = 5.0) {
  Trace t;
  t.dt = dt;
  const auto n = static_cast<std::size_t>(std::llround(duration / dt));
  for (std::size_t i = 0; i <= n; ++i) {
    t.samples.push_back(target - closed_form_free_response(model, target, dt * i));
  }
  return t;
}

inline Report run() {
  Report report;
  auto add = [&](std::string name, double expected, double computed, double tol, Comparison cmp) {
    report.anchors.push_back(Anchor{std::move(name), expected, computed, tol, cmp});
  };

  const auto shaper = design_shaper();
  for (std::size_t i = 0; i < 3; ++i) {
    add("zvd.amplitude[" + std::to_string(i + 1) + "]", kShaperAmplitudes[i], shaper.impulses()[i].amplitude, 1e-3,
        Comparison::AbsoluteWithin);
  }
  for (std::size_t i = 0; i < 3; ++i) {
    add("zvd.time_s[" + std::to_string(i + 1) + "]", kShaperTimes[i], shaper.impulses()[i].time, 1e-3,
        Comparison::AbsoluteWithin);
  }

  const auto free = identify_trace(
      synthetic_free_trace(OscillatorModel::create(kFreeNaturalFrequency, kFreeDampingRatio)), 0.0);
  add("identify.free.omega_d", kFreeDampedFrequency, free.damped_frequency, 0.01, Comparison::RelativeWithin);
  add("identify.free.zeta", kFreeDampingRatio, free.damping_ratio, 0.05, Comparison::RelativeWithin);
  add("identify.free.omega_n", kFreeNaturalFrequency, free.natural_frequency, 0.01, Comparison::RelativeWithin);

  const auto forced = identify_trace(
      synthetic_step_trace(OscillatorModel::create(kForcedNaturalFrequency, kForcedDampingRatio)), 1.0);
  add("identify.forced.omega_d", kForcedDampedFrequency, forced.damped_frequency, 0.01, Comparison::RelativeWithin);
  add("identify.forced.zeta", kForcedDampingRatio, forced.damping_ratio, 0.05, Comparison::RelativeWithin);
  add("identify.forced.omega_n", kForcedNaturalFrequency, forced.natural_frequency, 0.01,
      Comparison::RelativeWithin);

  const Ramp ramp{kRampTarget, kRampSpeed};
  const auto unshaped = segment_ramp(ImpulseShaper::identity(), ramp);
  add("segments.unshaped.count", 1, static_cast<double>(unshaped.segments.size()), 0, Comparison::AbsoluteWithin);
  add("segments.unshaped.velocity", kRampSpeed, unshaped.segments.front().velocity, 0.02,
      Comparison::AbsoluteWithin);
  add("segments.unshaped.theta_f", kRampTarget, unshaped.segments.front().end_position, 0.02,
      Comparison::AbsoluteWithin);

  const auto profile = segment_ramp(shaper, ramp);
  add("segments.shaped.count", 5, static_cast<double>(profile.segments.size()), 0, Comparison::AbsoluteWithin);
  for (std::size_t i = 0; i < 5 && i < profile.segments.size(); ++i) {
    const auto& s = profile.segments[i];
    const auto idx = "[" + std::to_string(i + 1) + "]";
    add("segments.shaped.delay_s" + idx, kSegmentDelays[i], s.start_time, 0.01, Comparison::AbsoluteWithin);
    add("segments.shaped.theta_f" + idx, kSegmentEndAngles[i], s.end_position, 0.02, Comparison::AbsoluteWithin);
    add("segments.shaped.velocity" + idx, kSegmentVelocities[i], s.velocity, 0.02, Comparison::AbsoluteWithin);
  }

  const auto cmp = compare_shaped_unshaped(OscillatorModel::create(kDesignNaturalFrequency, kDesignDampingRatio),
                                           shaper, ramp);
  add("residual.shaped_percent", 0.1, residual_percent(cmp.shaped, kRampTarget), 0, Comparison::AtMost);
  add("residual.unshaped_percent", 10.0, residual_percent(cmp.unshaped, kRampTarget), 0, Comparison::GreaterThan);

  add("time_penalty_s", 0.6531, time_penalty(shaper), 5e-5, Comparison::AbsoluteWithin);
  return report;
}

inline std::string to_text(const Report& report) {
  auto fmt = [](double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return std::string(buf);
  };
  auto rule = [](Comparison c) -> std::string {
    switch (c) {
      case Comparison::AbsoluteWithin: return "abs<=";
      case Comparison::RelativeWithin: return "rel<=";
      case Comparison::AtMost: return "at-most";
      case Comparison::GreaterThan: return "greater-than";
    }
    return "?";
  };
  std::string out = "status  anchor                          expected    computed    tolerance\n";
  std::size_t failed = 0;
  for (const auto& a : report.anchors) {
    char line[256];
    std::snprintf(line, sizeof(line), "%-6s  %-30s  %-10s  %-10s  %s %s\n", a.passed() ? "PASS" : "FAIL",
                  a.name.c_str(), fmt(a.expected).c_str(), fmt(a.computed).c_str(), rule(a.comparison).c_str(),
                  a.comparison == Comparison::AtMost || a.comparison == Comparison::GreaterThan
                      ? "-"
                      : fmt(a.tolerance).c_str());
    out += line;
    if (!a.passed()) ++failed;
  }
  out += std::to_string(report.anchors.size() - failed) + "/" + std::to_string(report.anchors.size()) +
         " anchors passed\n";
  return out;
}

}  // namespace jointshape::reproduce
