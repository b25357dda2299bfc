#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "flexpos/analysis.hpp"
#include "flexpos/config.hpp"
#include "flexpos/control.hpp"
#include "flexpos/kinematics.hpp"
#include "flexpos/signals.hpp"

// End-to-end pipelines shared by the CLI and the acceptance suite. Each takes
// a validated Config and is deterministic in Config::seed.
namespace flexpos::experiments {

// ---------------------------------------------------------------------------
// Tracking simulation
// ---------------------------------------------------------------------------

struct SimulateResult {
  PoseSeries reference;
  control::RunRecord record;
  analysis::TrackingReport tracking;
};

inline SimulateResult simulate(const Config& c, const PoseSeries& reference) {
  SimulateResult r;
  r.reference = reference;
  r.record = control::closed_loop_run(c.plant_config(), c.gains, c.loop, reference, c.seed);
  r.tracking = analysis::tracking_errors(reference, r.record.measured);
  return r;
}

inline SimulateResult simulate(const Config& c) {
  return simulate(c, signals::generate(c.reference, c.loop.control_rate_hz));
}

// ---------------------------------------------------------------------------
// Resolution staircase
// ---------------------------------------------------------------------------

// Smallest steps resolved on the real stage: nm for x, y, z (given in µm
// here) and µrad for rx, ry, rz.
inline Pose6 published_resolution_steps() { return Pose6(0.0105, 0.0105, 0.015, 1.8, 1.3, 0.5); }

struct ResolutionSetup {
  Pose6 steps = published_resolution_steps();
  double period_s = 2.0;
  int n_steps = 3;
  double noise_scale = 1.0;  // multiplies the configured sensor noise
  std::vector<Axis> axes{kAllAxes.begin(), kAllAxes.end()};
};

struct AxisResolution {
  Axis axis = Axis::x;
  double step = 0.0;
  analysis::ResolutionReport report;
};

// One closed-loop staircase per axis; the check runs on the measured channel.
inline std::vector<AxisResolution> resolution_study(const Config& c, const ResolutionSetup& s) {
  Config run = c;
  run.sensor.noise_std *= s.noise_scale;
  std::vector<AxisResolution> out;
  for (Axis a : s.axes) {
    const auto st = signals::staircase(Pose6::unit(a, s.steps[a]), s.period_s, s.n_steps, run.loop.control_rate_hz);
    const auto rec = control::closed_loop_run(run.plant_config(), run.gains, run.loop, st.series, run.seed);
    const auto meas = rec.measured.channel(a);
    out.push_back({a, s.steps[a], analysis::resolution_check(meas, st.dwells, s.steps[a])});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Hysteresis: open loop against closed loop
// ---------------------------------------------------------------------------

struct HysteresisSetup {
  Axis axis = Axis::z;
  double amplitude = 40.0;  // µm or µrad
  double freq_hz = 0.5;
  int cycles = 3;
};

struct HysteresisResult {
  PoseSeries reference;
  control::RunRecord open;
  control::RunRecord closed;
  analysis::HysteresisMetric open_metric;
  analysis::HysteresisMetric closed_metric;

  double reduction() const {
    return closed_metric.width > 0.0 ? open_metric.width / closed_metric.width
                                     : std::numeric_limits<double>::infinity();
  }
};

// Response against reference on the driven axis. The open-loop command is the
// reference mapped through the nominal inverse, so its drive is an affine
// function of the voltage.
inline HysteresisResult hysteresis_study(const Config& c, const HysteresisSetup& s) {
  if (s.cycles < 2) throw ValidationError("hysteresis study needs at least 2 cycles");
  HysteresisResult r;
  r.reference = signals::sine(Pose6::unit(s.axis, s.amplitude), s.freq_hz, s.cycles / s.freq_hz, c.loop.control_rate_hz);
  const auto pc = c.plant_config();
  r.open = control::open_loop_run(pc, c.loop, r.reference, c.seed, pc.jacobian, c.gains.v_lo, c.gains.v_hi);
  r.closed = control::closed_loop_run(pc, c.gains, c.loop, r.reference, c.seed);
  const auto x = r.reference.channel(s.axis);
  r.open_metric = analysis::hysteresis_metrics(x, r.open.measured.channel(s.axis));
  r.closed_metric = analysis::hysteresis_metrics(x, r.closed.measured.channel(s.axis));
  return r;
}

// ---------------------------------------------------------------------------
// Tracking trends with amplitude and frequency
// ---------------------------------------------------------------------------

struct TrendSetup {
  Axis first = Axis::x;
  Axis second = Axis::y;
  double amplitude = 2.5;  // circle radius
  double base_freq_hz = 0.5;
  std::vector<double> freqs_hz{0.1, 0.5, 1.0};
  double min_cycles = 2.0;
  double min_duration_s = 4.0;
};

struct TrendPoint {
  double amplitude = 0.0;
  double freq_hz = 0.0;
  Vector6 rms = Vector6::Zero();
};

struct TrendResult {
  std::vector<Axis> driven;
  TrendPoint base;
  TrendPoint doubled;
  std::vector<TrendPoint> sweep;

  double amplitude_ratio(Axis a) const { return doubled.rms[static_cast<Eigen::Index>(index(a))] / base.rms[static_cast<Eigen::Index>(index(a))]; }

  bool monotonic_in_frequency(Axis a) const {
    for (std::size_t i = 1; i < sweep.size(); ++i)
      if (!(sweep[i].rms[static_cast<Eigen::Index>(index(a))] > sweep[i - 1].rms[static_cast<Eigen::Index>(index(a))]))
        return false;
    return true;
  }
};

inline TrendPoint trend_point(const Config& c, const TrendSetup& s, double amplitude, double freq) {
  const double duration = std::max(s.min_duration_s, s.min_cycles / freq);
  const auto ref = signals::circle(s.first, s.second, amplitude, freq, duration, c.loop.control_rate_hz);
  return {amplitude, freq, simulate(c, ref).tracking.rms};
}

inline TrendResult trend_study(const Config& c, const TrendSetup& s) {
  TrendResult r;
  r.driven = {s.first, s.second};
  r.base = trend_point(c, s, s.amplitude, s.base_freq_hz);
  r.doubled = trend_point(c, s, 2.0 * s.amplitude, s.base_freq_hz);
  for (double f : s.freqs_hz) r.sweep.push_back(trend_point(c, s, s.amplitude, f));
  return r;
}

// ---------------------------------------------------------------------------
// Frequency response
// ---------------------------------------------------------------------------

struct FreqSetup {
  std::vector<Axis> axes{kAllAxes.begin(), kAllAxes.end()};
  double f0_hz = 10.0;
  double f1_hz = 0.0;  // 0 picks 1.5x the highest configured mode, capped below rate/4
  double duration_s = 20.0;
  double tail_s = 1.0;
  Pose6 amplitude = Pose6(0.5, 0.5, 0.5, 10.0, 10.0, 10.0);
  analysis::FrequencyOptions options;
};

struct AxisFreqResponse {
  Axis axis = Axis::x;
  double f0_hz = 0.0;  // analysed band
  double f1_hz = 0.0;
  analysis::FreqResponse response;
};

inline double sweep_end(const Config& c, const FreqSetup& s) {
  if (s.f1_hz > 0.0) return s.f1_hz;
  return std::min(1.5 * c.modal.max_freq(), 0.24 * c.loop.control_rate_hz);
}

// Each axis is swept by its own chirp applied through feedforward, so the
// result is the stage's own response; the analysed band trims the sweep ends.
inline std::vector<AxisFreqResponse> freq_response_study(const Config& c, const FreqSetup& s) {
  const double f1 = sweep_end(c, s);
  const double rate = c.loop.control_rate_hz;
  const auto pc = c.plant_config();
  std::vector<AxisFreqResponse> out;
  for (Axis a : s.axes) {
    const std::array<Axis, 1> one{a};
    const auto ref = signals::chirp(one, s.amplitude[a], s.f0_hz, f1, s.duration_s, rate, s.tail_s);
    const auto rec = control::open_loop_run(pc, c.loop, ref, c.seed, pc.jacobian, c.gains.v_lo, c.gains.v_hi);
    AxisFreqResponse r;
    r.axis = a;
    r.f0_hz = 2.0 * s.f0_hz;
    r.f1_hz = 0.95 * f1;
    r.response = analysis::frequency_response(ref.channel(a), rec.measured.channel(a), rate, r.f0_hz, r.f1_hz, s.options);
    out.push_back(std::move(r));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Jacobian regression
// ---------------------------------------------------------------------------

struct FitSetup {
  std::size_t samples = 100;
  double noise_std = 0.1;  // µm / µrad added to every output channel
};

// Random inputs inside the configured box; outputs from the configured
// Jacobian plus Gaussian noise.
inline std::vector<kinematics::JacobianSample> synthetic_samples(const Config& c, const FitSetup& s) {
  std::mt19937_64 rng(c.seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<kinematics::JacobianSample> out;
  for (std::size_t n = 0; n < s.samples; ++n) {
    ActuatorVec6 u;
    for (std::size_t i = 0; i < 6; ++i) {
      std::uniform_real_distribution<double> d(c.input_box.lo[i], c.input_box.hi[i]);
      u[i] = c.input_box.lo[i] == c.input_box.hi[i] ? c.input_box.lo[i] : d(rng);
    }
    Pose6 y = kinematics::forward_map(c.jacobian, u);
    if (s.noise_std > 0.0)
      for (std::size_t k = 0; k < 6; ++k) y[k] += s.noise_std * noise(rng);
    out.push_back({u, y});
  }
  return out;
}

// CSV with a header and 12 columns per row: six inputs (µm) then the pose.
inline std::vector<kinematics::JacobianSample> read_samples_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open samples file '" + path + "'");
  std::string line;
  std::getline(in, line);  // header
  std::vector<kinematics::JacobianSample> out;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> v;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        v.push_back(std::stod(cell, &used));
      } catch (const std::exception&) {
        throw ValidationError("samples file row " + std::to_string(row) + ": '" + cell + "' is not a number");
      }
    }
    if (v.size() != 12)
      throw ValidationError("samples file row " + std::to_string(row) + ": expected 12 columns, got " + std::to_string(v.size()));
    kinematics::JacobianSample s;
    for (std::size_t i = 0; i < 6; ++i) {
      s.input[i] = v[i];
      s.output[i] = v[6 + i];
    }
    out.push_back(s);
  }
  return out;
}

}  // namespace flexpos::experiments
