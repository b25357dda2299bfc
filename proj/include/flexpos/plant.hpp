#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>

#include "flexpos/errors.hpp"
#include "flexpos/kinematics.hpp"
#include "flexpos/types.hpp"

// Simulated drive chain: voltage -> piezo stack (saturation + Bouc-Wen
// hysteresis) -> stage kinematics -> per-axis structural modes -> capacitive
// sensing with noise and ADC quantization.
namespace flexpos::plant {

// ---------------------------------------------------------------------------
// Actuator
// ---------------------------------------------------------------------------

struct ActuatorParams {
  double v_min = 0.0;     // V
  double v_max = 150.0;   // V
  double stroke = 38.5;   // µm at v_max
  // Bouc-Wen shape. Illustrative values giving a ~12% open-loop loop width
  // over the full voltage range; the stage itself has no published model.
  double bw_alpha = 0.6;
  double bw_beta = 0.04;   // 1/µm
  double bw_gamma = 0.02;  // 1/µm
  double bw_n = 1.0;

  void validate() const {
    if (!(v_min < v_max)) throw ValidationError("actuator: v_min must be < v_max");
    if (!(stroke > 0.0)) throw ValidationError("actuator: stroke must be > 0");
    if (!(bw_n >= 1.0)) throw ValidationError("actuator: bw_n must be >= 1");
    if (!(bw_beta + bw_gamma > 0.0)) throw ValidationError("actuator: bw_beta + bw_gamma must be > 0");
    if (!(bw_alpha > 0.0 && bw_alpha <= 1.0)) throw ValidationError("actuator: bw_alpha must be in (0, 1]");
  }

  double span() const noexcept { return v_max - v_min; }
  double gain() const noexcept { return stroke / span(); }  // µm per V

  double linear_displacement(double v) const noexcept { return stroke * (v - v_min) / span(); }

  // Upper bound on |h| from the fixed point of the rate law.
  double hysteresis_bound() const { return std::pow(1.0 / (bw_beta + bw_gamma), 1.0 / bw_n); }
};

struct ActuatorState {
  double d_lin = 0.0;  // nominal displacement at the last applied voltage, µm
  double h = 0.0;      // hysteretic internal state, µm
};

struct ActuatorOutput {
  double displacement = 0.0;  // µm
  bool saturated = false;     // command clamped to [v_min, v_max]
  bool bound_hit = false;     // |h| reached the rate-law bound this step
};

// Advances one actuator. The Bouc-Wen law is rate independent, so the
// explicit Euler step depends on dt only through the displacement increment.
inline ActuatorOutput actuator_step(const ActuatorParams& p, ActuatorState& s, double v, double dt) {
  if (!(dt > 0.0)) throw ValidationError("actuator_step: dt must be > 0");
  ActuatorOutput out;
  const double vc = std::clamp(v, p.v_min, p.v_max);
  out.saturated = vc != v;

  const double d_lin = p.linear_displacement(vc);
  const double dx = d_lin - s.d_lin;
  const double ah = std::abs(s.h);
  const double ah_n1 = p.bw_n == 1.0 ? 1.0 : std::pow(ah, p.bw_n - 1.0);
  s.h += dx - p.bw_beta * std::abs(dx) * ah_n1 * s.h - p.bw_gamma * dx * ah_n1 * ah;
  s.d_lin = d_lin;

  const double bound = p.hysteresis_bound();
  if (std::abs(s.h) >= bound) {
    s.h = std::clamp(s.h, -bound, bound);
    out.bound_hit = true;
  }
  out.displacement = p.bw_alpha * d_lin + (1.0 - p.bw_alpha) * s.h;
  return out;
}

// ---------------------------------------------------------------------------
// Structure
// ---------------------------------------------------------------------------

// Task-axis modal frequencies (x, y, z, rx, ry, rz order) and damping.
struct ModalParams {
  Vector6 freq_hz = Vector6::Zero();
  Vector6 damping = Vector6::Constant(0.1);

  void validate() const {
    for (Eigen::Index i = 0; i < 6; ++i) {
      if (!(freq_hz[i] > 0.0) || !std::isfinite(freq_hz[i]))
        throw ValidationError("modal: frequency must be > 0 on axis " + std::string(kAxisNames[static_cast<std::size_t>(i)]));
      if (!(damping[i] > 0.0 && damping[i] < 1.0))
        throw ValidationError("modal: damping must be in (0, 1) on axis " + std::string(kAxisNames[static_cast<std::size_t>(i)]));
    }
  }

  double max_freq() const { return freq_hz.maxCoeff(); }
};

// Mode order of the loaded stage is z, y, x, rz, ry, rx. Only the first
// frequency is known; the spacing of the others is a placeholder.
inline constexpr double kLoadedFirstMode = 137.41;    // Hz, 100 g payload
inline constexpr double kUnloadedFirstMode = 633.25;  // Hz, bare stage
inline constexpr std::array<double, 6> kModeSpacing{1.20, 1.15, 1.0, 2.0, 1.9, 1.6};  // x..rz

inline ModalParams modal_from_first_mode(double first_mode_hz, double damping) {
  ModalParams m;
  for (std::size_t i = 0; i < 6; ++i)
    m.freq_hz[static_cast<Eigen::Index>(i)] = first_mode_hz * kModeSpacing[i];
  m.damping.setConstant(damping);
  return m;
}

inline ModalParams loaded_modes(double damping = 0.02) { return modal_from_first_mode(kLoadedFirstMode, damping); }
inline ModalParams unloaded_modes(double damping = 0.1) { return modal_from_first_mode(kUnloadedFirstMode, damping); }

struct StructureState {
  Vector6 q = Vector6::Zero();   // modal positions = true pose, µm / µrad
  Vector6 qd = Vector6::Zero();  // velocities
};

inline void check_structure_dt(const ModalParams& modal, double dt) {
  if (!(dt > 0.0)) throw ValidationError("structure_step: dt must be > 0");
  if (dt > 0.1 / modal.max_freq()) {
    throw NumericalError("structure_step: dt " + std::to_string(dt) + " s exceeds stability limit " +
                         std::to_string(0.1 / modal.max_freq()) + " s");
  }
}

// Unit-DC-gain second-order filter per task axis driven by the static pose
// J*u; semi-implicit Euler.
inline Pose6 structure_step(const Jacobian6& J, const ModalParams& modal, StructureState& s,
                            const ActuatorVec6& u, double dt) {
  check_structure_dt(modal, dt);
  const Vector6 target = J.matrix() * u.vec();
  for (Eigen::Index k = 0; k < 6; ++k) {
    const double w = 2.0 * std::numbers::pi * modal.freq_hz[k];
    const double acc = w * w * (target[k] - s.q[k]) - 2.0 * modal.damping[k] * w * s.qd[k];
    s.qd[k] += acc * dt;
    s.q[k] += s.qd[k] * dt;
  }
  return Pose6(s.q);
}

// ---------------------------------------------------------------------------
// Sensor
// ---------------------------------------------------------------------------

struct SensorParams {
  // Translations in µm, rotations in µrad. Rotation channels are derived
  // from differential 50 µm probes over a 25 mm baseline: 2000 µrad full
  // scale, and 1 nm probe noise becomes sqrt(2) * 1 nm / 25 mm.
  Vector6 noise_std = (Vector6() << 0.001, 0.001, 0.001, 0.0566, 0.0566, 0.0566).finished();
  int adc_bits = 16;
  Vector6 range = (Vector6() << 100.0, 100.0, 100.0, 2000.0, 2000.0, 2000.0).finished();

  void validate() const {
    if (adc_bits < 8 || adc_bits > 24) throw ValidationError("sensor: adc_bits must be in [8, 24]");
    for (Eigen::Index i = 0; i < 6; ++i) {
      if (!(noise_std[i] >= 0.0)) throw ValidationError("sensor: noise_std must be >= 0");
      if (!(range[i] > 0.0)) throw ValidationError("sensor: range must be > 0");
    }
  }

  double step(std::size_t channel) const {
    return range[static_cast<Eigen::Index>(channel)] / std::ldexp(1.0, adc_bits);
  }
};

struct SensorReading {
  Pose6 pose;
  bool saturated = false;
};

// Quantize one channel onto a bipolar ADC grid centred on zero.
inline double quantize(double value, double step, int bits, bool& clipped) {
  const double half = std::ldexp(1.0, bits - 1);
  double code = std::nearbyint(value / step);
  if (code < -half) {
    code = -half;
    clipped = true;
  } else if (code > half - 1.0) {
    code = half - 1.0;
    clipped = true;
  }
  return code * step;
}

template <class Rng>
SensorReading sense(const SensorParams& p, const Pose6& true_pose, Rng& rng) {
  SensorReading r;
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t k = 0; k < 6; ++k) {
    double v = true_pose[k];
    const double sigma = p.noise_std[static_cast<Eigen::Index>(k)];
    if (sigma > 0.0) v += sigma * normal(rng);
    r.pose[k] = quantize(v, p.step(k), p.adc_bits, r.saturated);
  }
  return r;
}

// ---------------------------------------------------------------------------
// Full plant
// ---------------------------------------------------------------------------

struct PlantConfig {
  Jacobian6 jacobian = kinematics::nominal_jacobian();
  ActuatorParams actuator;
  ModalParams modal = unloaded_modes();
  SensorParams sensor;

  void validate() const {
    actuator.validate();
    modal.validate();
    sensor.validate();
  }
};

struct Telemetry {
  bool command_saturated = false;
  bool sensor_saturated = false;
  bool hysteresis_bound = false;
  double max_abs_h = 0.0;
};

struct PlantState {
  std::array<ActuatorState, 6> actuators{};
  StructureState structure;
  Pose6 true_pose;
  Pose6 measured;
  Pose6 sensor_zero;  // subtracted before quantization
  std::mt19937_64 rng;
};

// Single-owner simulation instance. Deterministic for a given seed.
class Plant {
 public:
  Plant(PlantConfig cfg, std::uint64_t seed) : cfg_(std::move(cfg)) {
    cfg_.validate();
    state_.rng.seed(seed);
  }

  const PlantConfig& config() const noexcept { return cfg_; }
  const PlantState& state() const noexcept { return state_; }
  const Telemetry& telemetry() const noexcept { return tel_; }

  // Puts every actuator at voltage v with a relaxed hysteresis state, the
  // structure at rest at the matching static pose, and zeroes the sensor there.
  void settle_at(double v) {
    const double vc = std::clamp(v, cfg_.actuator.v_min, cfg_.actuator.v_max);
    ActuatorVec6 d;
    for (std::size_t i = 0; i < 6; ++i) {
      state_.actuators[i].d_lin = cfg_.actuator.linear_displacement(vc);
      state_.actuators[i].h = 0.0;
      d[i] = cfg_.actuator.bw_alpha * state_.actuators[i].d_lin;
    }
    state_.structure.q = cfg_.jacobian.matrix() * d.vec();
    state_.structure.qd.setZero();
    state_.true_pose = Pose6(state_.structure.q);
    state_.sensor_zero = state_.true_pose;
  }

  // One integration step without sensing.
  const Pose6& advance(const VoltageVec6& v, double dt) {
    ActuatorVec6 d;
    tel_.command_saturated = false;
    tel_.hysteresis_bound = false;
    for (std::size_t i = 0; i < 6; ++i) {
      const auto o = actuator_step(cfg_.actuator, state_.actuators[i], v[i], dt);
      d[i] = o.displacement;
      tel_.command_saturated |= o.saturated;
      tel_.hysteresis_bound |= o.bound_hit;
      tel_.max_abs_h = std::max(tel_.max_abs_h, std::abs(state_.actuators[i].h));
    }
    state_.true_pose = structure_step(cfg_.jacobian, cfg_.modal, state_.structure, d, dt);
    return state_.true_pose;
  }

  const Pose6& sense() {
    const auto r = plant::sense(cfg_.sensor, state_.true_pose - state_.sensor_zero, state_.rng);
    state_.measured = r.pose;
    tel_.sensor_saturated = r.saturated;
    return state_.measured;
  }

  std::pair<Pose6, Pose6> step(const VoltageVec6& v, double dt) {
    advance(v, dt);
    sense();
    return {state_.true_pose, state_.measured};
  }

 private:
  PlantConfig cfg_;
  PlantState state_;
  Telemetry tel_;
};

/// Free-function form of one plant step: actuators, structure, then sensing.
inline std::pair<Pose6, Pose6> plant_step(Plant& plant, const VoltageVec6& v, double dt) {
  return plant.step(v, dt);
}

}  // namespace flexpos::plant
