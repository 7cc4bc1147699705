#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "jointshape/oscillator.hpp"
#include "oracle.hpp"

using namespace jointshape;

namespace {

// Local maxima of a sampled signal, excluding the end points.
std::vector<double> local_maxima(const std::vector<double>& y) {
  std::vector<double> out;
  for (std::size_t i = 1; i + 1 < y.size(); ++i) {
    if (y[i] > y[i - 1] && y[i] >= y[i + 1]) out.push_back(y[i]);
  }
  return out;
}

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected jointshape::Error";
  return ErrorKind::Io;
}

}  // namespace

TEST(Normalize, UnitModel) {
  const auto m = normalize({1.0, 1.0, 0.0});
  EXPECT_DOUBLE_EQ(m.natural_frequency(), 1.0);
  EXPECT_DOUBLE_EQ(m.damping_ratio(), 0.0);
}

TEST(Normalize, LightlyDamped) {
  const auto m = normalize({2.0, 8.0, 0.8});
  EXPECT_DOUBLE_EQ(m.natural_frequency(), 2.0);
  EXPECT_NEAR(m.damping_ratio(), 0.1, 1e-15);
}

TEST(Normalize, OverdampedRejected) {
  EXPECT_EQ(kind_of([] { normalize({1.0, 1.0, 2.5}); }), ErrorKind::OverdampedUnsupported);
}

TEST(Normalize, NonPositiveInertiaOrStiffness) {
  EXPECT_EQ(kind_of([] { normalize({0.0, 1.0, 0.1}); }), ErrorKind::InvalidModel);
  EXPECT_EQ(kind_of([] { normalize({1.0, -1.0, 0.1}); }), ErrorKind::InvalidModel);
  EXPECT_EQ(kind_of([] { normalize({1.0, 1.0, -0.1}); }), ErrorKind::InvalidModel);
}

TEST(Normalize, ScaleConsistent) {
  oracle::Rng rng(7);
  for (int i = 0; i < 200; ++i) {
    const double j = rng.uniform(0.01, 5.0);
    const double k = rng.uniform(0.1, 500.0);
    const double zeta = rng.uniform(0.0, 0.95);
    const PhysicalJointModel base{j, k, zeta * 2.0 * std::sqrt(k * j)};
    const double alpha = rng.uniform(1e-3, 1e3);
    const auto a = normalize(base);
    const auto b = normalize({alpha * base.inertia, alpha * base.stiffness, alpha * base.damping});
    EXPECT_NEAR(a.natural_frequency(), b.natural_frequency(), 1e-12 * a.natural_frequency());
    EXPECT_NEAR(a.damping_ratio(), b.damping_ratio(), 1e-12);
  }
}

TEST(OscillatorModel, DampedFrequencyBounds) {
  const auto m = OscillatorModel::create(7.82, 0.098);
  EXPECT_GT(m.damped_frequency(), 0.0);
  EXPECT_LE(m.damped_frequency(), m.natural_frequency());
  EXPECT_NEAR(m.damped_frequency(), 7.7823577629404831, 1e-12);
  EXPECT_EQ(OscillatorModel::create(3.0, 0.0).damped_frequency(), 3.0);
}

TEST(OscillatorModel, RejectsInvalid) {
  EXPECT_EQ(kind_of([] { OscillatorModel::create(0.0, 0.1); }), ErrorKind::InvalidModel);
  EXPECT_EQ(kind_of([] { OscillatorModel::create(1.0, -0.1); }), ErrorKind::InvalidModel);
  EXPECT_EQ(kind_of([] { OscillatorModel::create(1.0, 1.0); }), ErrorKind::OverdampedUnsupported);
  EXPECT_EQ(kind_of([] { OscillatorModel::create(NAN, 0.1); }), ErrorKind::InvalidModel);
}

TEST(ClosedFormFreeResponse, QuarterAndFullPeriod) {
  const auto m = OscillatorModel::create(1.0, 0.0);
  EXPECT_NEAR(closed_form_free_response(m, 1.0, std::numbers::pi / 2), 0.0, 1e-12);
  EXPECT_NEAR(closed_form_free_response(m, 1.0, 2 * std::numbers::pi), 1.0, 1e-12);
}

TEST(ClosedFormFreeResponse, OneDampedPeriodEnvelope) {
  const auto m = OscillatorModel::create(7.82, 0.098);
  // exp(−2πζ/√(1−ζ²)), evaluated with 30-digit arithmetic.
  EXPECT_NEAR(closed_form_free_response(m, 1.0, m.damped_period()), 0.538627806801977, 1e-12);
}

TEST(Commands, Evaluation) {
  EXPECT_EQ(command_value(Ramp{1.34, 3.45}, -0.1), 0.0);
  EXPECT_NEAR(command_value(Ramp{1.34, 3.45}, 0.1), 0.345, 1e-15);
  EXPECT_EQ(command_value(Ramp{1.34, 3.45}, 1.0), 1.34);
  EXPECT_NEAR(command_value(Ramp{-1.0, 2.0}, 0.25), -0.5, 1e-15);
  EXPECT_EQ(command_value(Step{2.0}, 0.0), 0.0);
  EXPECT_EQ(command_value(Step{2.0}, 1e-9), 2.0);
  EXPECT_EQ(command_value(Constant{0.7}, -3.0), 0.7);

  const SampledCommand s{{0.0, 1.0, 3.0}, 0.5};
  EXPECT_EQ(command_value(s, -1.0), 0.0);
  EXPECT_DOUBLE_EQ(command_value(s, 0.25), 0.5);
  EXPECT_DOUBLE_EQ(command_value(s, 0.75), 2.0);
  EXPECT_EQ(command_value(s, 10.0), 3.0);
}

TEST(Commands, EndTimeAndFinalValue) {
  EXPECT_NEAR(command_end_time(Ramp{1.34, 3.45}), 1.34 / 3.45, 1e-15);
  EXPECT_EQ(command_end_time(Step{1.0}), 0.0);
  EXPECT_EQ(command_end_time(SampledCommand{{0, 1, 2, 2, 2}, 0.1}), 0.2);
  EXPECT_EQ(command_final_value(SampledCommand{{0, 1, 2, 2, 2}, 0.1}), 2.0);
  EXPECT_EQ(command_final_value(Ramp{-1.0, 1.0}), -1.0);
}

TEST(Commands, Validation) {
  EXPECT_EQ(kind_of([] { validate(Command{Ramp{1.0, 0.0}}); }), ErrorKind::InvalidCommand);
  EXPECT_NO_THROW(validate(Command{Ramp{0.0, 0.0}}));
  EXPECT_EQ(kind_of([] { validate(Command{SampledCommand{{1.0}, 0.1}}); }), ErrorKind::InvalidCommand);
  EXPECT_EQ(kind_of([] { validate(Command{SampledCommand{{1.0, 2.0}, 0.0}}); }), ErrorKind::InvalidCommand);
}

TEST(Simulate, FreeResponsePeakRatio) {
  const auto m = OscillatorModel::create(7.82, 0.098);
  const auto trace = simulate(m, Constant{0.0}, 1e-3, 3.0, {0.3, 0.0});
  const auto peaks = local_maxima(trace.samples);
  ASSERT_GE(peaks.size(), 2u);
  // Successive peaks of the damped response decay by exp(2πζ/√(1−ζ²)).
  EXPECT_NEAR(peaks[0] / peaks[1], 1.8565695780493625, 2e-3);
}

TEST(Simulate, StepOvershootPeak) {
  const auto m = OscillatorModel::create(9.62, 0.1);
  const auto trace = simulate(m, Step{1.0}, 1e-3, 2.0);
  const double peak = *std::max_element(trace.samples.begin(), trace.samples.end());
  EXPECT_NEAR(peak, 1.7292476142876709, 1e-4);
}

TEST(Simulate, EquilibriumStaysPut) {
  const auto m = OscillatorModel::create(9.62, 0.1);
  const auto trace = simulate(m, Constant{0.42}, 1e-3, 1.0, {0.42, 0.0});
  for (double x : trace.samples) EXPECT_EQ(x, 0.42);
}

TEST(Simulate, GridAndStartTime) {
  const auto m = OscillatorModel::create(5.0, 0.1);
  const auto trace = simulate(m, Step{1.0}, 0.01, 1.0);
  EXPECT_EQ(trace.size(), 101u);
  EXPECT_EQ(trace.samples.front(), 0.0);
  EXPECT_EQ(trace.start_time, 0.0);
  EXPECT_DOUBLE_EQ(trace.end_time(), 1.0);
}

TEST(Simulate, StepSizeGuard) {
  const auto m = OscillatorModel::create(10.0, 0.1);
  EXPECT_EQ(kind_of([&] { simulate(m, Step{1.0}, 0.051, 1.0); }), ErrorKind::StepSize);
  EXPECT_NO_THROW(simulate(m, Step{1.0}, 0.05, 1.0));
  EXPECT_EQ(kind_of([&] { simulate(m, Step{1.0}, 0.0, 1.0); }), ErrorKind::StepSize);
  EXPECT_EQ(kind_of([&] { simulate(m, Step{1.0}, 0.01, 0.005); }), ErrorKind::StepSize);
}

TEST(SimulateProperty, MatchesClosedFormFreeResponse) {
  oracle::Rng rng(11);
  for (int i = 0; i < 40; ++i) {
    const double wn = rng.uniform(0.5, 60.0);
    const double zeta = rng.uniform(0.0, 0.9);
    const double theta0 = rng.uniform(-2.0, 2.0);
    const auto m = OscillatorModel::create(wn, zeta);
    for (double dt : {0.1 / wn, 1e-3}) {
      if (wn * dt > 0.1) continue;
      const auto trace = simulate(m, Constant{0.0}, dt, 5.0 * m.damped_period(), {theta0, 0.0});
      double worst = 0.0;
      for (std::size_t j = 0; j < trace.size(); ++j) {
        const double ref = static_cast<double>(oracle::free_response(wn, zeta, theta0, trace.time_at(j)));
        worst = std::max(worst, std::abs(trace.samples[j] - ref));
      }
      EXPECT_LE(worst, 1e-4 * std::abs(theta0)) << "wn=" << wn << " zeta=" << zeta << " dt=" << dt;
    }
  }
}

TEST(SimulateProperty, StepSettlesToTarget) {
  oracle::Rng rng(12);
  for (int i = 0; i < 20; ++i) {
    const double wn = rng.uniform(1.0, 40.0);
    const double zeta = rng.uniform(0.02, 0.9);
    const double c = rng.uniform(-3.0, 3.0);
    const auto m = OscillatorModel::create(wn, zeta);
    const auto trace = simulate(m, Step{c}, 1e-3, 10.0 / (zeta * wn));
    EXPECT_LE(std::abs(trace.samples.back() - c), 1e-3 * std::abs(c));
  }
}

TEST(SimulateProperty, PeakMagnitudesDecrease) {
  oracle::Rng rng(13);
  for (int i = 0; i < 20; ++i) {
    const double wn = rng.uniform(1.0, 40.0);
    const double zeta = rng.uniform(0.01, 0.5);
    const auto m = OscillatorModel::create(wn, zeta);
    const auto trace = simulate(m, Constant{0.0}, 1e-3, 6.0 * m.damped_period(), {1.0, 0.0});
    std::vector<double> mag(trace.samples.size());
    for (std::size_t j = 0; j < mag.size(); ++j) mag[j] = std::abs(trace.samples[j]);
    const auto peaks = local_maxima(mag);
    ASSERT_GE(peaks.size(), 4u);
    for (std::size_t j = 1; j < peaks.size(); ++j) EXPECT_LT(peaks[j], peaks[j - 1]);
  }
}

TEST(SimulateProperty, UndampedAmplitudeConserved) {
  for (double wn : {1.0, 7.82, 9.62, 30.0}) {
    const auto m = OscillatorModel::create(wn, 0.0);
    const auto trace = simulate(m, Constant{0.0}, 1e-3, 10.0 * m.damped_period(), {0.5, 0.0});
    const auto peaks = local_maxima(trace.samples);
    ASSERT_GE(peaks.size(), 9u);
    for (double p : peaks) EXPECT_LE(std::abs(p - 0.5), 1e-3 * 0.5) << "wn=" << wn;
  }
}

TEST(SimulateProperty, SampledCommandMatchesAnalytic) {
  // A ramp sampled on the integration grid with its corner on a grid point
  // is reproduced exactly by linear interpolation.
  const auto m = OscillatorModel::create(9.62, 0.1);
  const Ramp ramp{1.0, 2.0};
  const auto sampled = sample(ramp, 1e-3, 1.0);
  const auto a = simulate(m, ramp, 1e-3, 2.0);
  const auto b = simulate(m, sampled, 1e-3, 2.0);
  for (std::size_t j = 0; j < a.size(); ++j) EXPECT_NEAR(a.samples[j], b.samples[j], 1e-12);
}
