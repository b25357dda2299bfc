#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "flexpos/errors.hpp"
#include "flexpos/types.hpp"

// Reference and excitation waveforms, sampled uniformly. Every generator is
// a pure function of its arguments.
namespace flexpos::signals {

inline std::size_t sample_count(double duration, double rate) {
  if (!(rate > 0.0)) throw ValidationError("signal: rate must be > 0");
  if (!(duration >= 0.0)) throw ValidationError("signal: duration must be >= 0");
  return static_cast<std::size_t>(std::llround(duration * rate));
}

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// ---------------------------------------------------------------------------
// Staircase
// ---------------------------------------------------------------------------

struct Dwell {
  std::size_t begin = 0;  // first sample
  std::size_t end = 0;    // one past the last sample
  int level = 0;          // multiple of the step height
};

struct Staircase {
  PoseSeries series;
  std::vector<Dwell> dwells;
};

// Rises by one step every period for n_steps steps, then (unless
// ascent_only) descends back to zero. Values are right-continuous at step
// boundaries: the boundary sample already carries the new level.
inline Staircase staircase(const Pose6& step_height, double period, int n_steps, double rate,
                           bool ascent_only = false) {
  if (!(period > 0.0)) throw ValidationError("staircase: period must be > 0");
  if (n_steps < 0) throw ValidationError("staircase: n_steps must be >= 0");
  if (period * rate < 2.0) throw ValidationError("staircase: need at least 2 samples per period");
  const std::size_t per = sample_count(period, rate);

  std::vector<int> levels;
  for (int k = 1; k <= n_steps; ++k) levels.push_back(k);
  if (!ascent_only)
    for (int k = n_steps - 1; k >= 0; --k) levels.push_back(k);
  if (levels.empty()) levels.push_back(0);

  Staircase out;
  out.series.rate_hz = rate;
  out.series.samples.reserve(per * levels.size());
  for (std::size_t d = 0; d < levels.size(); ++d) {
    out.dwells.push_back({d * per, (d + 1) * per, levels[d]});
    const Pose6 value = step_height * static_cast<double>(levels[d]);
    for (std::size_t i = 0; i < per; ++i) out.series.samples.push_back(value);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Periodic paths
// ---------------------------------------------------------------------------

inline void check_periodic(double freq, double rate, const char* what) {
  if (!(freq > 0.0)) throw ValidationError(std::string(what) + ": frequency must be > 0");
  if (!(freq < rate / 10.0)) throw ValidationError(std::string(what) + ": frequency must be < rate/10");
}

inline PoseSeries circle(Axis first, Axis second, double radius, double freq, double duration,
                         double rate) {
  check_periodic(freq, rate, "circle");
  if (first == second) throw ValidationError("circle: axes must differ");
  PoseSeries s;
  s.rate_hz = rate;
  const std::size_t n = sample_count(duration, rate);
  s.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double phase = kTwoPi * freq * s.time(i);
    s.samples[i][first] = radius * std::cos(phase);
    s.samples[i][second] = radius * std::sin(phase);
  }
  return s;
}

// Rhodonea r = A sin(k theta) with theta = 2 pi f t on the first two axes;
// an optional third axis carries A3 sin(2 pi f t).
inline PoseSeries rose(Axis first, Axis second, std::optional<Axis> third, double amplitude,
                       int petals, double freq, double duration, double rate,
                       double third_amplitude = 0.0) {
  check_periodic(freq, rate, "rose");
  if (petals < 2) throw ValidationError("rose: petal parameter k must be >= 2");
  if (first == second || (third && (*third == first || *third == second)))
    throw ValidationError("rose: axes must differ");
  PoseSeries s;
  s.rate_hz = rate;
  const std::size_t n = sample_count(duration, rate);
  s.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double theta = kTwoPi * freq * s.time(i);
    const double r = amplitude * std::sin(petals * theta);
    s.samples[i][first] = r * std::cos(theta);
    s.samples[i][second] = r * std::sin(theta);
    if (third) s.samples[i][*third] = third_amplitude * std::sin(theta);
  }
  return s;
}

// amplitude[k] sin(2 pi f t + phase) on every axis k.
inline PoseSeries sine(const Pose6& amplitude, double freq, double duration, double rate,
                       double phase = 0.0) {
  check_periodic(freq, rate, "sine");
  PoseSeries s;
  s.rate_hz = rate;
  const std::size_t n = sample_count(duration, rate);
  s.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) s.samples[i] = amplitude * std::sin(kTwoPi * freq * s.time(i) + phase);
  return s;
}

inline PoseSeries constant(const Pose6& value, double duration, double rate) {
  PoseSeries s;
  s.rate_hz = rate;
  s.samples.assign(sample_count(duration, rate), value);
  return s;
}

// ---------------------------------------------------------------------------
// Linear chirp
// ---------------------------------------------------------------------------

inline double chirp_phase(double f0, double f1, double T, double t) {
  return kTwoPi * (f0 * t + (f1 - f0) * t * t / (2.0 * T));
}

inline double chirp_frequency(double f0, double f1, double T, double t) {
  return f0 + (f1 - f0) * t / T;
}

inline void check_chirp(double f0, double f1, double T, double rate) {
  if (!(f0 > 0.0)) throw ValidationError("chirp: f0 must be > 0");
  if (!(f1 >= f0)) throw ValidationError("chirp: f1 must be >= f0");
  if (!(f1 < rate / 4.0)) throw ValidationError("chirp: f1 must be < rate/4");
  if (!(T > 0.0)) throw ValidationError("chirp: duration must be > 0");
}

// Scalar chirp over [0, T), followed by `tail` seconds of zeros.
inline std::vector<double> chirp_samples(double amplitude, double f0, double f1, double T, double rate,
                                         double tail = 0.0) {
  check_chirp(f0, f1, T, rate);
  const std::size_t n = sample_count(T, rate);
  std::vector<double> out(n + sample_count(tail, rate), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / rate;
    out[i] = amplitude * std::sin(chirp_phase(f0, f1, T, t));
  }
  return out;
}

inline PoseSeries chirp(std::span<const Axis> axes, double amplitude, double f0, double f1, double T,
                        double rate, double tail = 0.0) {
  const auto x = chirp_samples(amplitude, f0, f1, T, rate, tail);
  PoseSeries s;
  s.rate_hz = rate;
  s.samples.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    for (Axis a : axes) s.samples[i][a] = x[i];
  return s;
}

// ---------------------------------------------------------------------------
// Config-level description
// ---------------------------------------------------------------------------

enum class Kind { staircase, circle, rose, sine, chirp, constant };

inline const char* kind_name(Kind k) {
  switch (k) {
    case Kind::staircase: return "staircase";
    case Kind::circle: return "circle";
    case Kind::rose: return "rose";
    case Kind::sine: return "sine";
    case Kind::chirp: return "chirp";
    case Kind::constant: return "constant";
  }
  return "?";
}

inline Kind kind_from_name(const std::string& name) {
  for (Kind k : {Kind::staircase, Kind::circle, Kind::rose, Kind::sine, Kind::chirp, Kind::constant})
    if (name == kind_name(k)) return k;
  throw ValidationError("unknown waveform kind '" + name + "'");
}

// Defaults describe a 0.5 Hz XY circle of 10 µm radius; amplitudes of the
// published trajectories were not given, these sit well inside the workspace.
struct WaveformSpec {
  Kind kind = Kind::circle;
  std::vector<Axis> axes{Axis::x, Axis::y};
  Pose6 amplitude = Pose6::constant(10.0);  // per-axis amplitude / step height / constant value
  double freq_hz = 0.5;
  double duration_s = 4.0;
  int petals = 4;
  double third_amplitude = 0.0;
  double f0_hz = 10.0;
  double f1_hz = 400.0;
  double period_s = 2.0;
  int n_steps = 3;
  bool ascent_only = false;

  void validate() const {
    if (!(duration_s > 0.0) && kind != Kind::staircase) throw ValidationError("waveform: duration must be > 0");
    switch (kind) {
      case Kind::circle:
        if (axes.size() != 2) throw ValidationError("waveform: circle needs 2 axes");
        [[fallthrough]];
      case Kind::sine:
        if (!(freq_hz > 0.0)) throw ValidationError("waveform: frequency must be > 0");
        break;
      case Kind::rose:
        if (axes.size() != 2 && axes.size() != 3) throw ValidationError("waveform: rose needs 2 or 3 axes");
        if (!(freq_hz > 0.0)) throw ValidationError("waveform: frequency must be > 0");
        if (petals < 2) throw ValidationError("waveform: petals must be >= 2");
        break;
      case Kind::chirp:
        if (!(f0_hz > 0.0) || !(f1_hz > f0_hz)) throw ValidationError("waveform: chirp needs f1 > f0 > 0");
        break;
      case Kind::staircase:
        if (!(period_s > 0.0)) throw ValidationError("waveform: staircase period must be > 0");
        if (n_steps < 0) throw ValidationError("waveform: n_steps must be >= 0");
        break;
      case Kind::constant: break;
    }
  }

  // Amplitude vector restricted to the listed axes.
  Pose6 masked_amplitude() const {
    Pose6 out;
    for (Axis a : axes) out[a] = amplitude[a];
    return out;
  }
};

inline PoseSeries generate(const WaveformSpec& w, double rate) {
  w.validate();
  switch (w.kind) {
    case Kind::staircase:
      return staircase(w.masked_amplitude(), w.period_s, w.n_steps, rate, w.ascent_only).series;
    case Kind::circle:
      return circle(w.axes[0], w.axes[1], w.amplitude[w.axes[0]], w.freq_hz, w.duration_s, rate);
    case Kind::rose: {
      std::optional<Axis> third;
      if (w.axes.size() == 3) third = w.axes[2];
      return rose(w.axes[0], w.axes[1], third, w.amplitude[w.axes[0]], w.petals, w.freq_hz, w.duration_s,
                  rate, third ? w.amplitude[*third] : 0.0);
    }
    case Kind::sine: return sine(w.masked_amplitude(), w.freq_hz, w.duration_s, rate);
    case Kind::chirp: {
      PoseSeries s;
      s.rate_hz = rate;
      const auto x = chirp_samples(1.0, w.f0_hz, w.f1_hz, w.duration_s, rate);
      s.samples.resize(x.size());
      const Pose6 amp = w.masked_amplitude();
      for (std::size_t i = 0; i < x.size(); ++i) s.samples[i] = amp * x[i];
      return s;
    }
    case Kind::constant: return constant(w.masked_amplitude(), w.duration_s, rate);
  }
  throw ValidationError("unhandled waveform kind");
}

}  // namespace flexpos::signals
