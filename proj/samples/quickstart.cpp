// Identify a joint from a free-vibration trace, design a ZVD shaper for it,
// and compile a shaped ramp into servo segments.

#include <cstdio>

#include "jointshape/jointshape.hpp"

using namespace jointshape;

int main() {
  // Stand-in for a recorded release-from-displacement trace.
  const auto joint = OscillatorModel::create(9.62, 0.1);
  const auto recorded = simulate(joint, Constant{0.0}, 1e-3, 4.0, InitialState{0.3, 0.0});

  const auto params = identify_trace(recorded, 0.0);
  std::printf("identified: wd=%.3f rad/s  zeta=%.4f  wn=%.3f rad/s\n", params.damped_frequency,
              params.damping_ratio, params.natural_frequency);

  const auto shaper = design_zvd(params.model());
  for (const auto& imp : shaper.impulses()) std::printf("impulse A=%.4f t=%.4f s\n", imp.amplitude, imp.time);

  const Ramp move{1.34, 3.45};
  const auto profile = segment_ramp(shaper, move);
  for (const auto& s : profile.segments) {
    std::printf("segment t=%.3f s  %.3f -> %.3f rad  v=%.3f rad/s\n", s.start_time, s.start_position,
                s.end_position, s.velocity);
  }

  const auto cmp = compare_shaped_unshaped(joint, shaper, move);
  std::printf("residual: unshaped %.2f%%  shaped %.4f%% of the move\n", residual_percent(cmp.unshaped, move.target),
              residual_percent(cmp.shaped, move.target));
}
