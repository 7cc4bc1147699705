#pragma once

// Parameter identification from recorded oscillation traces using the
// logarithmic decrement of the first two peaks.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "jointshape/error.hpp"
#include "jointshape/oscillator.hpp"

namespace jointshape {

/// Minimum peak height above the baseline, as a fraction of the largest
/// deviation from the baseline anywhere in the trace.
inline constexpr double kPeakProminenceFraction = 0.02;
/// Fraction of samples at the end of a trace averaged to estimate the baseline.
inline constexpr double kBaselineTailFraction = 0.10;
/// Relative slack before x1 ≥ x0 is reported as a non-decaying oscillation.
inline constexpr double kDecayTolerance = 1e-6;

struct Peak {
  double time = 0.0;   // s
  double value = 0.0;  // rad, relative to baseline
};

struct PeakList {
  std::vector<Peak> peaks;
  double baseline = 0.0;
};

struct IdentifiedParams {
  double damped_frequency = 0.0;   // rad/s
  double damping_ratio = 0.0;
  double natural_frequency = 0.0;  // rad/s
  double period = 0.0;             // s

  OscillatorModel model() const { return OscillatorModel::create(natural_frequency, damping_ratio); }
};

/// Mean of the last 10% of samples (at least one sample).
inline double estimate_baseline(const Trace& trace) {
  if (trace.samples.empty()) {
    throw Error(ErrorKind::InvalidTrace, "sysid", "cannot estimate the baseline of an empty trace");
  }
  const auto n = trace.samples.size();
  const auto tail = std::max<std::size_t>(1, static_cast<std::size_t>(kBaselineTailFraction * static_cast<double>(n)));
  double sum = 0.0;
  for (std::size_t i = n - tail; i < n; ++i) sum += trace.samples[i];
  return sum / static_cast<double>(tail);
}

namespace detail {

struct Vertex {
  double offset;  // samples, relative to the window centre
  double value;
};

// Least-squares parabola through y[center-half .. center+half]. With half = 1
// this is the exact three-point interpolating parabola.
inline std::optional<Vertex> fit_parabola(std::span<const double> y, std::size_t center, std::size_t half) {
  double s0 = 0, s1 = 0, s2 = 0, s3 = 0, s4 = 0, r0 = 0, r1 = 0, r2 = 0;
  for (std::size_t i = center - half; i <= center + half; ++i) {
    const double x = static_cast<double>(i) - static_cast<double>(center);
    const double x2 = x * x;
    s0 += 1.0;
    s1 += x;
    s2 += x2;
    s3 += x2 * x;
    s4 += x2 * x2;
    r0 += y[i];
    r1 += x * y[i];
    r2 += x2 * y[i];
  }
  // Normal equations for y ≈ a + b·x + c·x², solved by Cramer's rule.
  const double det = s0 * (s2 * s4 - s3 * s3) - s1 * (s1 * s4 - s3 * s2) + s2 * (s1 * s3 - s2 * s2);
  if (det == 0.0) return std::nullopt;
  const double a = (r0 * (s2 * s4 - s3 * s3) - s1 * (r1 * s4 - s3 * r2) + s2 * (r1 * s3 - s2 * r2)) / det;
  const double b = (s0 * (r1 * s4 - r2 * s3) - r0 * (s1 * s4 - s3 * s2) + s2 * (s1 * r2 - r1 * s2)) / det;
  const double c = (s0 * (s2 * r2 - s3 * r1) - s1 * (s1 * r2 - r1 * s2) + r0 * (s1 * s3 - s2 * s2)) / det;
  if (!(c < 0.0)) return std::nullopt;
  const double offset = -b / (2.0 * c);
  return Vertex{offset, a + b * offset + c * offset * offset};
}

// Refines the sub-sample location of the maximum near `index`. The fit
// window grows with the lobe width so that sample noise averages out; the
// window is re-centred on the vertex until it stops moving.
inline Peak refine_peak(std::span<const double> dev, std::size_t index, std::size_t lobe_begin,
                        std::size_t lobe_end, double start_time, double dt) {
  const std::size_t width = lobe_end - lobe_begin;
  std::size_t half = std::max<std::size_t>(1, width / 8);
  half = std::min({half, index, dev.size() - 1 - index});

  Peak raw{start_time + dt * static_cast<double>(index), dev[index]};
  if (half == 0) return raw;

  std::size_t center = index;
  Peak best = raw;
  for (int iter = 0; iter < 4; ++iter) {
    const auto vertex = fit_parabola(dev, center, half);
    if (!vertex || std::abs(vertex->offset) > static_cast<double>(half)) return best;
    const double pos = static_cast<double>(center) + vertex->offset;
    best = Peak{start_time + dt * pos, vertex->value};
    const auto next = static_cast<std::size_t>(std::llround(pos));
    if (next == center || next < half || next + half >= dev.size()) break;
    center = next;
  }
  return best;
}

}  // namespace detail

/// Finds the oscillation maxima of θ − baseline.
///
/// A lobe opens when the deviation rises above the prominence threshold and
/// closes when it falls back through the baseline. Each complete lobe yields
/// one peak at its highest sample, refined to sub-sample accuracy by a
/// parabolic fit. Lobes cut off by either end of the trace are ignored.
inline PeakList detect_peaks(const Trace& trace, std::optional<double> baseline = std::nullopt) {
  validate(trace);
  if (trace.samples.size() < 3) {
    throw Error(ErrorKind::InsufficientOscillation, "sysid", "trace has fewer than 3 samples");
  }
  PeakList out;
  out.baseline = baseline.value_or(estimate_baseline(trace));

  std::vector<double> dev(trace.samples.size());
  double max_abs = 0.0;
  for (std::size_t i = 0; i < dev.size(); ++i) {
    dev[i] = trace.samples[i] - out.baseline;
    max_abs = std::max(max_abs, std::abs(dev[i]));
  }
  const double threshold = kPeakProminenceFraction * max_abs;

  if (max_abs > 0.0) {
    bool in_lobe = dev[0] > threshold;
    bool truncated = in_lobe;
    std::size_t lobe_begin = 0;
    std::size_t best = 0;
    for (std::size_t i = 1; i < dev.size(); ++i) {
      if (!in_lobe) {
        if (dev[i] > threshold) {
          in_lobe = true;
          truncated = false;
          lobe_begin = i;
          best = i;
        }
        continue;
      }
      if (dev[i] > dev[best]) best = i;
      if (dev[i] <= 0.0) {
        const bool interior = best > 0 && best + 1 < dev.size() && dev[best] > dev[best - 1] &&
                              dev[best] > dev[best + 1];
        if (!truncated && interior) {
          out.peaks.push_back(detail::refine_peak(dev, best, lobe_begin, i, trace.start_time, trace.dt));
        }
        in_lobe = false;
      }
    }
    // A lobe still open at the end of the trace is dropped: it may not have peaked yet.
  }

  if (out.peaks.size() < 2) {
    throw Error(ErrorKind::InsufficientOscillation, "sysid",
                "found " + std::to_string(out.peaks.size()) + " qualifying peak(s), need at least 2");
  }
  return out;
}

/// Applies the logarithmic decrement to the first two peaks:
/// T = t1 − t0, ωd = 2π/T, ζ = ln(x0/x1)/(2π), ωn = ωd/√(1−ζ²).
inline IdentifiedParams identify(const PeakList& peak_list) {
  const auto& peaks = peak_list.peaks;
  if (peaks.size() < 2) {
    throw Error(ErrorKind::InsufficientOscillation, "sysid", "identification needs at least 2 peaks");
  }
  const Peak& p0 = peaks[0];
  const Peak& p1 = peaks[1];
  if (!(p0.value > 0.0) || !(p1.value > 0.0)) {
    throw Error(ErrorKind::InvalidPeak, "sysid", "peak values must be positive relative to the baseline");
  }
  const double period = p1.time - p0.time;
  if (!(period > 0.0)) {
    throw Error(ErrorKind::InvalidPeak, "sysid", "peak times must be strictly increasing");
  }

  double zeta = 0.0;
  if (p1.value >= p0.value) {
    if (p1.value - p0.value > kDecayTolerance * p0.value) {
      throw Error(ErrorKind::NonDecaying, "sysid",
                  "second peak (" + std::to_string(p1.value) + ") exceeds the first (" +
                      std::to_string(p0.value) + ")");
    }
  } else {
    zeta = std::log(p0.value / p1.value) / (2.0 * std::numbers::pi);
  }
  if (zeta >= 1.0) {
    throw Error(ErrorKind::OverdampedUnsupported, "sysid", "identified damping ratio is not underdamped");
  }

  IdentifiedParams out;
  out.period = period;
  out.damped_frequency = 2.0 * std::numbers::pi / period;
  out.damping_ratio = zeta;
  out.natural_frequency = out.damped_frequency / std::sqrt(1.0 - zeta * zeta);
  return out;
}

inline IdentifiedParams identify_trace(const Trace& trace, std::optional<double> baseline = std::nullopt) {
  return identify(detect_peaks(trace, baseline));
}

/// Identifies each trace separately, then averages ωd and ζ; ωn and T are
/// derived from the averages.
inline IdentifiedParams identify_averaged(std::span<const Trace> traces,
                                          std::optional<double> baseline = std::nullopt) {
  if (traces.empty()) {
    throw Error(ErrorKind::InsufficientOscillation, "sysid", "no traces supplied");
  }
  double wd_sum = 0.0;
  double zeta_sum = 0.0;
  for (std::size_t i = 0; i < traces.size(); ++i) {
    try {
      const auto params = identify_trace(traces[i], baseline);
      wd_sum += params.damped_frequency;
      zeta_sum += params.damping_ratio;
    } catch (const Error& e) {
      throw Error(e.kind(), e.module(), "trace " + std::to_string(i) + ": " + e.what());
    }
  }
  const auto n = static_cast<double>(traces.size());
  IdentifiedParams out;
  out.damped_frequency = wd_sum / n;
  out.damping_ratio = zeta_sum / n;
  out.natural_frequency = out.damped_frequency / std::sqrt(1.0 - out.damping_ratio * out.damping_ratio);
  out.period = 2.0 * std::numbers::pi / out.damped_frequency;
  return out;
}

}  // namespace jointshape
