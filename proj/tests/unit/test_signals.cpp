#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "flexpos/signals.hpp"

using namespace flexpos;
using namespace flexpos::signals;

// --- staircase ------------------------------------------------------------------

TEST(Staircase, ValueAtThreeSeconds) {
  const auto s = staircase(Pose6::unit(Axis::x, 0.0105), 2.0, 5, 1e4);
  EXPECT_NEAR(s.series[30000][Axis::x], 0.021, 1e-15);
}

TEST(Staircase, ZeroStepsIsConstantZero) {
  const auto s = staircase(Pose6::constant(1.0), 2.0, 0, 1e4);
  ASSERT_EQ(s.dwells.size(), 1u);
  for (const auto& p : s.series.samples) EXPECT_EQ(p, Pose6::zero());
}

TEST(Staircase, RightContinuousAtBoundaries) {
  const auto s = staircase(Pose6::unit(Axis::z, 1.0), 1.0, 3, 100.0);
  EXPECT_EQ(s.series[99][Axis::z], 1.0);
  EXPECT_EQ(s.series[100][Axis::z], 2.0);
  EXPECT_EQ(s.series[200][Axis::z], 3.0);
  EXPECT_EQ(s.series[300][Axis::z], 2.0);
}

TEST(Staircase, AscendsThenDescends) {
  const auto s = staircase(Pose6::unit(Axis::y, 0.5), 0.1, 4, 1000.0);
  std::vector<int> levels;
  for (const auto& d : s.dwells) levels.push_back(d.level);
  EXPECT_EQ(levels, (std::vector<int>{1, 2, 3, 4, 3, 2, 1, 0}));
  EXPECT_EQ(s.series.size(), 8u * 100u);
  const auto up = staircase(Pose6::unit(Axis::y, 0.5), 0.1, 4, 1000.0, true);
  EXPECT_EQ(up.dwells.size(), 4u);
}

TEST(Staircase, BoundedByStepsTimesHeight) {
  const auto s = staircase(Pose6::constant(0.7), 0.5, 6, 200.0);
  for (const auto& p : s.series.samples) EXPECT_LE(p.vec().cwiseAbs().maxCoeff(), 6 * 0.7 + 1e-12);
}

TEST(Staircase, RejectsTooFewSamplesPerPeriod) {
  EXPECT_THROW(staircase(Pose6::constant(1.0), 0.001, 2, 1000.0), ValidationError);
  EXPECT_THROW(staircase(Pose6::constant(1.0), -1.0, 2, 1000.0), ValidationError);
}

// --- circle ---------------------------------------------------------------------

TEST(Circle, StartsOnFirstAxis) {
  const auto s = circle(Axis::x, Axis::z, 5.0, 1.0, 1.0, 1000.0);
  EXPECT_EQ(s[0][Axis::x], 5.0);
  EXPECT_EQ(s[0][Axis::z], 0.0);
  EXPECT_EQ(s[0][Axis::y], 0.0);
}

TEST(Circle, QuarterPeriod) {
  const double f = 2.0;
  const auto s = circle(Axis::x, Axis::y, 3.0, f, 1.0, 1000.0);
  const std::size_t i = 125;  // t = 1/(4f)
  EXPECT_NEAR(s[i][Axis::x], 0.0, 1e-12 * 3.0);
  EXPECT_NEAR(s[i][Axis::y], 3.0, 1e-12 * 3.0);
}

TEST(Circle, PathCloses) {
  const double f = 0.7, rate = 1000.0, R = 4.0;
  const auto s = circle(Axis::x, Axis::y, R, f, 2.0, rate);
  const std::size_t n = static_cast<std::size_t>(std::llround(rate / f));
  const double arc = 2.0 * std::numbers::pi * R * f / rate;
  EXPECT_LE((s[n] - s[0]).norm(), arc);
}

TEST(Circle, RadiusIsConstant) {
  const auto s = circle(Axis::y, Axis::z, 2.0, 3.0, 1.0, 500.0);
  for (const auto& p : s.samples) EXPECT_NEAR(std::hypot(p[Axis::y], p[Axis::z]), 2.0, 1e-12);
}

TEST(Circle, Preconditions) {
  EXPECT_THROW(circle(Axis::x, Axis::y, 1.0, 200.0, 1.0, 1000.0), ValidationError);
  EXPECT_THROW(circle(Axis::x, Axis::x, 1.0, 1.0, 1.0, 1000.0), ValidationError);
}

// --- rose -----------------------------------------------------------------------

TEST(Rose, StartsAtOrigin) {
  const auto s = rose(Axis::x, Axis::y, std::nullopt, 5.0, 4, 1.0, 1.0, 1000.0);
  EXPECT_EQ(s[0], Pose6::zero());
}

TEST(Rose, MaxRadiusEqualsAmplitude) {
  const auto s = rose(Axis::x, Axis::y, std::nullopt, 5.0, 4, 1.0, 1.0, 1e5);
  double rmax = 0.0;
  for (const auto& p : s.samples) rmax = std::max(rmax, std::hypot(p[Axis::x], p[Axis::y]));
  EXPECT_NEAR(rmax, 5.0, 1e-8);
  EXPECT_LE(rmax, 5.0 + 1e-12);
}

TEST(Rose, EvenKTracesTwoKPetals) {
  const auto s = rose(Axis::x, Axis::y, std::nullopt, 1.0, 4, 1.0, 1.0, 1e4);
  std::vector<double> r;
  for (const auto& p : s.samples) r.push_back(std::hypot(p[Axis::x], p[Axis::y]));
  int maxima = 0;
  for (std::size_t i = 1; i + 1 < r.size(); ++i)
    if (r[i] > r[i - 1] && r[i] >= r[i + 1]) ++maxima;
  EXPECT_EQ(maxima, 8);
}

TEST(Rose, ThirdAxisCarriesSine) {
  const auto s = rose(Axis::x, Axis::y, Axis::rz, 2.0, 3, 0.5, 2.0, 1000.0, 7.0);
  for (std::size_t i = 0; i < s.size(); i += 97)
    EXPECT_NEAR(s[i][Axis::rz], 7.0 * std::sin(2.0 * std::numbers::pi * 0.5 * s.time(i)), 1e-12);
}

TEST(Rose, Preconditions) {
  EXPECT_THROW(rose(Axis::x, Axis::y, std::nullopt, 1.0, 1, 1.0, 1.0, 1000.0), ValidationError);
  EXPECT_THROW(rose(Axis::x, Axis::y, Axis::x, 1.0, 3, 1.0, 1.0, 1000.0), ValidationError);
}

// --- sine / chirp -----------------------------------------------------------------

TEST(Sine, BoundedAndPhased) {
  const Pose6 amp(1, 2, 3, 0, 0, 10);
  const auto s = sine(amp, 5.0, 1.0, 1000.0);
  for (const auto& p : s.samples)
    for (std::size_t k = 0; k < 6; ++k) EXPECT_LE(std::abs(p[k]), amp[k] + 1e-12);
  EXPECT_NEAR(s[50][Axis::rz], 10.0, 1e-9);  // quarter period of 5 Hz
}

TEST(Chirp, StartsAtZero) { EXPECT_EQ(chirp_samples(2.0, 10.0, 100.0, 1.0, 1000.0)[0], 0.0); }

TEST(Chirp, InstantaneousFrequencyAtMidpoint) {
  EXPECT_DOUBLE_EQ(chirp_frequency(10.0, 400.0, 20.0, 10.0), 205.0);
  // Numerical derivative of the phase.
  const double h = 1e-6;
  const double w = (chirp_phase(10.0, 400.0, 20.0, 10.0 + h) - chirp_phase(10.0, 400.0, 20.0, 10.0 - h)) / (2 * h);
  EXPECT_NEAR(w / (2.0 * std::numbers::pi), 205.0, 1e-4);
}

TEST(Chirp, DegeneratesToSine) {
  const auto c = chirp_samples(1.5, 7.0, 7.0, 1.0, 1000.0);
  for (std::size_t i = 0; i < c.size(); ++i)
    EXPECT_NEAR(c[i], 1.5 * std::sin(2.0 * std::numbers::pi * 7.0 * static_cast<double>(i) / 1000.0), 1e-12);
}

TEST(Chirp, TailIsZero) {
  const auto c = chirp_samples(1.0, 10.0, 20.0, 1.0, 1000.0, 0.5);
  ASSERT_EQ(c.size(), 1500u);
  for (std::size_t i = 1000; i < 1500; ++i) EXPECT_EQ(c[i], 0.0);
}

TEST(Chirp, Preconditions) {
  EXPECT_THROW(chirp_samples(1.0, 0.0, 10.0, 1.0, 1000.0), ValidationError);
  EXPECT_THROW(chirp_samples(1.0, 20.0, 10.0, 1.0, 1000.0), ValidationError);
  EXPECT_THROW(chirp_samples(1.0, 10.0, 300.0, 1.0, 1000.0), ValidationError);
}

TEST(Chirp, MultiAxis) {
  const std::array<Axis, 2> axes{Axis::x, Axis::rz};
  const auto s = chirp(axes, 1.0, 10.0, 50.0, 0.5, 1000.0);
  for (const auto& p : s.samples) {
    EXPECT_EQ(p[Axis::x], p[Axis::rz]);
    EXPECT_EQ(p[Axis::y], 0.0);
  }
}

// --- properties -----------------------------------------------------------------------

TEST(Properties, RateDoublingMatchesEveryOtherSample) {
  const auto a = circle(Axis::x, Axis::y, 3.0, 1.3, 2.0, 500.0);
  const auto b = circle(Axis::x, Axis::y, 3.0, 1.3, 2.0, 1000.0);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_LE((a[i] - b[2 * i]).norm(), 1e-12 * 3.0);
  const auto ca = chirp_samples(1.0, 5.0, 60.0, 1.0, 500.0);
  const auto cb = chirp_samples(1.0, 5.0, 60.0, 1.0, 1000.0);
  for (std::size_t i = 0; i < ca.size(); ++i) EXPECT_NEAR(ca[i], cb[2 * i], 1e-12);
}

TEST(Properties, LengthIsDurationTimesRate) {
  EXPECT_EQ(sine(Pose6::constant(1.0), 1.0, 2.5, 1000.0).size(), 2500u);
  EXPECT_EQ(constant(Pose6::zero(), 0.3, 1e4).size(), 3000u);
}

// --- waveform spec ----------------------------------------------------------------------

TEST(WaveformSpec, KindNamesRoundTrip) {
  for (Kind k : {Kind::staircase, Kind::circle, Kind::rose, Kind::sine, Kind::chirp, Kind::constant})
    EXPECT_EQ(kind_from_name(kind_name(k)), k);
  EXPECT_THROW(kind_from_name("spiral"), ValidationError);
}

TEST(WaveformSpec, DefaultGeneratesCircle) {
  const auto s = generate(WaveformSpec{}, 1e4);
  EXPECT_EQ(s.size(), 40000u);
  EXPECT_EQ(s[0][Axis::x], 10.0);
}

TEST(WaveformSpec, ChirpRequiresIncreasingBand) {
  WaveformSpec w;
  w.kind = Kind::chirp;
  w.f1_hz = w.f0_hz;
  EXPECT_THROW(w.validate(), ValidationError);
}

TEST(WaveformSpec, MasksUnlistedAxes) {
  WaveformSpec w;
  w.kind = Kind::sine;
  w.axes = {Axis::z};
  const auto s = generate(w, 1000.0);
  for (const auto& p : s.samples) {
    EXPECT_EQ(p[Axis::x], 0.0);
    EXPECT_LE(std::abs(p[Axis::z]), 10.0);
  }
}
