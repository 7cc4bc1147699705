#pragma once

// Elastic-joint models and the second-order response simulator.
//
//   J·θ'' + B·θ' + K·θ = τ(t)            (physical joint)
//   θ'' + 2ζωn·θ' + ωn²·θ = ωn²·u(t)     (normalized, u is a position command)

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "jointshape/error.hpp"

namespace jointshape {

inline constexpr double kDefaultDt = 1e-3;
/// Largest ωn·dt accepted by the integrator.
inline constexpr double kMaxStepRatio = 0.5;

struct PhysicalJointModel {
  double inertia = 0.0;    // kg·m²
  double stiffness = 0.0;  // N·m/rad
  double damping = 0.0;    // N·m·s/rad
};

/// Normalized underdamped oscillator (ωn > 0, 0 ≤ ζ < 1). Construct with
/// create(); the constructor is private so every instance is valid.
class OscillatorModel {
 public:
  static OscillatorModel create(double natural_frequency, double damping_ratio) {
    if (!std::isfinite(natural_frequency) || natural_frequency <= 0.0) {
      throw Error(ErrorKind::InvalidModel, "oscillator",
                  "natural frequency must be positive, got " + std::to_string(natural_frequency));
    }
    if (!std::isfinite(damping_ratio) || damping_ratio < 0.0) {
      throw Error(ErrorKind::InvalidModel, "oscillator",
                  "damping ratio must be non-negative, got " + std::to_string(damping_ratio));
    }
    if (damping_ratio >= 1.0) {
      throw Error(ErrorKind::OverdampedUnsupported, "oscillator",
                  "damping ratio " + std::to_string(damping_ratio) + " is not underdamped");
    }
    return OscillatorModel(natural_frequency, damping_ratio);
  }

  double natural_frequency() const noexcept { return natural_frequency_; }
  double damping_ratio() const noexcept { return damping_ratio_; }
  double damped_frequency() const noexcept {
    return natural_frequency_ * std::sqrt(1.0 - damping_ratio_ * damping_ratio_);
  }
  double damped_period() const noexcept { return 2.0 * std::numbers::pi / damped_frequency(); }

  friend bool operator==(const OscillatorModel&, const OscillatorModel&) = default;

 private:
  OscillatorModel(double wn, double zeta) : natural_frequency_(wn), damping_ratio_(zeta) {}

  double natural_frequency_;
  double damping_ratio_;
};

inline OscillatorModel normalize(const PhysicalJointModel& model) {
  if (!std::isfinite(model.inertia) || model.inertia <= 0.0) {
    throw Error(ErrorKind::InvalidModel, "oscillator", "inertia must be positive");
  }
  if (!std::isfinite(model.stiffness) || model.stiffness <= 0.0) {
    throw Error(ErrorKind::InvalidModel, "oscillator", "stiffness must be positive");
  }
  if (!std::isfinite(model.damping) || model.damping < 0.0) {
    throw Error(ErrorKind::InvalidModel, "oscillator", "damping must be non-negative");
  }
  const double wn = std::sqrt(model.stiffness / model.inertia);
  const double zeta = model.damping / (2.0 * std::sqrt(model.stiffness * model.inertia));
  return OscillatorModel::create(wn, zeta);
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

/// Position command sampled every `dt` seconds starting at t = 0. Before the
/// first sample the first value holds; after the last sample the last value
/// holds; in between values are linearly interpolated.
struct SampledCommand {
  std::vector<double> samples;
  double dt = kDefaultDt;

  double duration() const noexcept {
    return samples.empty() ? 0.0 : dt * static_cast<double>(samples.size() - 1);
  }
  double time_at(std::size_t i) const noexcept { return dt * static_cast<double>(i); }
};

/// Constant-speed move from 0 to `target`, starting at t = 0.
struct Ramp {
  double target = 0.0;
  double speed = 0.0;

  double duration() const noexcept { return target == 0.0 ? 0.0 : std::abs(target) / speed; }
};

/// Jump from 0 to `target` immediately after t = 0 (u(0) = 0, u(t > 0) = target).
struct Step {
  double target = 0.0;
};

struct Constant {
  double value = 0.0;
};

using Command = std::variant<SampledCommand, Ramp, Step, Constant>;

inline void validate(const Command& command) {
  auto fail = [](const std::string& msg) { throw Error(ErrorKind::InvalidCommand, "oscillator", msg); };
  std::visit(
      [&](const auto& c) {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, SampledCommand>) {
          if (!std::isfinite(c.dt) || c.dt <= 0.0) fail("command sample interval must be positive");
          if (c.samples.size() < 2) fail("sampled command needs at least 2 samples");
          for (double v : c.samples) {
            if (!std::isfinite(v)) fail("sampled command contains a non-finite value");
          }
        } else if constexpr (std::is_same_v<T, Ramp>) {
          if (!std::isfinite(c.target)) fail("ramp target must be finite");
          if (c.target != 0.0 && (!std::isfinite(c.speed) || c.speed <= 0.0)) {
            fail("ramp speed must be positive for a non-zero target");
          }
        } else if constexpr (std::is_same_v<T, Step>) {
          if (!std::isfinite(c.target)) fail("step target must be finite");
        } else {
          if (!std::isfinite(c.value)) fail("constant value must be finite");
        }
      },
      command);
}

inline double sampled_value(const SampledCommand& c, double t) {
  if (t <= 0.0) return c.samples.front();
  const double pos = t / c.dt;
  const auto last = c.samples.size() - 1;
  if (pos >= static_cast<double>(last)) return c.samples.back();
  const auto i = static_cast<std::size_t>(pos);
  const double frac = pos - static_cast<double>(i);
  if (frac == 0.0) return c.samples[i];
  return c.samples[i] + frac * (c.samples[i + 1] - c.samples[i]);
}

/// u(t) of any command variant.
inline double command_value(const Command& command, double t) {
  return std::visit(
      [t](const auto& c) -> double {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, SampledCommand>) {
          return sampled_value(c, t);
        } else if constexpr (std::is_same_v<T, Ramp>) {
          if (t <= 0.0 || c.target == 0.0) return 0.0;
          const double travel = c.speed * t;
          if (travel >= std::abs(c.target)) return c.target;
          return std::copysign(travel, c.target);
        } else if constexpr (std::is_same_v<T, Step>) {
          return t > 0.0 ? c.target : 0.0;
        } else {
          return c.value;
        }
      },
      command);
}

/// Time after which the command no longer changes.
inline double command_end_time(const Command& command) {
  return std::visit(
      [](const auto& c) -> double {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, SampledCommand>) {
          const double last = c.samples.back();
          for (std::size_t i = c.samples.size() - 1; i-- > 0;) {
            if (c.samples[i] != last) return c.time_at(i + 1);
          }
          return 0.0;
        } else if constexpr (std::is_same_v<T, Ramp>) {
          return c.duration();
        } else {
          return 0.0;
        }
      },
      command);
}

inline double command_initial_value(const Command& command) { return command_value(command, 0.0); }

inline double command_final_value(const Command& command) {
  return std::visit(
      [](const auto& c) -> double {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, SampledCommand>) {
          return c.samples.back();
        } else if constexpr (std::is_same_v<T, Ramp> || std::is_same_v<T, Step>) {
          return c.target;
        } else {
          return c.value;
        }
      },
      command);
}

/// Samples any command on a uniform grid t = 0, dt, ..., n·dt with
/// n = round(duration / dt).
inline SampledCommand sample(const Command& command, double dt, double duration) {
  validate(command);
  if (!std::isfinite(dt) || dt <= 0.0) {
    throw Error(ErrorKind::InvalidCommand, "oscillator", "sampling interval must be positive");
  }
  if (!std::isfinite(duration) || duration < dt) {
    throw Error(ErrorKind::InvalidCommand, "oscillator", "sampling duration must be at least one interval");
  }
  const auto steps = static_cast<std::size_t>(std::llround(duration / dt));
  SampledCommand out;
  out.dt = dt;
  out.samples.reserve(steps + 1);
  for (std::size_t i = 0; i <= steps; ++i) {
    out.samples.push_back(command_value(command, dt * static_cast<double>(i)));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Traces and simulation
// ---------------------------------------------------------------------------

/// Uniformly sampled angular position θ(start_time + i·dt).
struct Trace {
  std::vector<double> samples;
  double dt = kDefaultDt;
  double start_time = 0.0;

  std::size_t size() const noexcept { return samples.size(); }
  double time_at(std::size_t i) const noexcept { return start_time + dt * static_cast<double>(i); }
  double end_time() const noexcept {
    return samples.empty() ? start_time : time_at(samples.size() - 1);
  }
};

inline void validate(const Trace& trace) {
  if (!std::isfinite(trace.dt) || trace.dt <= 0.0) {
    throw Error(ErrorKind::InvalidTrace, "oscillator", "trace sample interval must be positive");
  }
  if (!std::isfinite(trace.start_time)) {
    throw Error(ErrorKind::InvalidTrace, "oscillator", "trace start time must be finite");
  }
  for (std::size_t i = 0; i < trace.samples.size(); ++i) {
    if (!std::isfinite(trace.samples[i])) {
      throw Error(ErrorKind::InvalidTrace, "oscillator",
                  "trace sample " + std::to_string(i) + " is not finite");
    }
  }
}

struct InitialState {
  double position = 0.0;  // rad
  double velocity = 0.0;  // rad/s
};

/// Integrates θ'' + 2ζωn·θ' + ωn²·θ = ωn²·u(t) with classical fixed-step RK4
/// and returns θ at t = 0, dt, ..., n·dt where n = round(duration / dt).
inline Trace simulate(const OscillatorModel& model, const Command& input, double dt, double duration,
                      InitialState initial = {}) {
  validate(input);
  if (!std::isfinite(dt) || dt <= 0.0) {
    throw Error(ErrorKind::StepSize, "oscillator", "time step must be positive");
  }
  const double wn = model.natural_frequency();
  if (wn * dt > kMaxStepRatio) {
    throw Error(ErrorKind::StepSize, "oscillator",
                "time step " + std::to_string(dt) + " s is too large for ωn = " + std::to_string(wn) +
                    " rad/s (ωn·dt must not exceed 0.5)");
  }
  if (!std::isfinite(duration) || duration < dt) {
    throw Error(ErrorKind::StepSize, "oscillator", "duration must be at least one time step");
  }
  if (!std::isfinite(initial.position) || !std::isfinite(initial.velocity)) {
    throw Error(ErrorKind::InvalidModel, "oscillator", "initial conditions must be finite");
  }

  const double wn2 = wn * wn;
  const double two_zeta_wn = 2.0 * model.damping_ratio() * wn;
  auto accel = [&](double x, double v, double u) { return wn2 * (u - x) - two_zeta_wn * v; };

  const auto steps = static_cast<std::size_t>(std::llround(duration / dt));
  Trace trace;
  trace.dt = dt;
  trace.samples.reserve(steps + 1);

  double x = initial.position;
  double v = initial.velocity;
  trace.samples.push_back(x);
  for (std::size_t i = 0; i < steps; ++i) {
    const double t = dt * static_cast<double>(i);
    const double u0 = command_value(input, t);
    const double um = command_value(input, t + 0.5 * dt);
    const double u1 = command_value(input, t + dt);

    const double k1x = v;
    const double k1v = accel(x, v, u0);
    const double k2x = v + 0.5 * dt * k1v;
    const double k2v = accel(x + 0.5 * dt * k1x, k2x, um);
    const double k3x = v + 0.5 * dt * k2v;
    const double k3v = accel(x + 0.5 * dt * k2x, k3x, um);
    const double k4x = v + dt * k3v;
    const double k4v = accel(x + dt * k3x, k4x, u1);

    x += dt / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
    v += dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    trace.samples.push_back(x);
  }
  return trace;
}

/// Unforced response from rest at displacement θ0:
/// θ0·e^(−ζωn t)·(cos ωd t + ζ/√(1−ζ²)·sin ωd t).
inline double closed_form_free_response(const OscillatorModel& model, double theta0, double t) {
  const double zeta = model.damping_ratio();
  const double wd = model.damped_frequency();
  const double envelope = std::exp(-zeta * model.natural_frequency() * t);
  const double sin_gain = zeta / std::sqrt(1.0 - zeta * zeta);
  return theta0 * envelope * (std::cos(wd * t) + sin_gain * std::sin(wd * t));
}

}  // namespace jointshape
