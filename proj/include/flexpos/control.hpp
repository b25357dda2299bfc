#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "flexpos/errors.hpp"
#include "flexpos/kinematics.hpp"
#include "flexpos/plant.hpp"
#include "flexpos/types.hpp"
#include "flexpos/workspace.hpp"

namespace flexpos::control {

enum class AntiWindup { conditional, none };
enum class Mode { task, actuator };

// Discrete PID with one channel per axis. Gains act on errors in µm / µrad;
// the effort is in the same units as the error (kp dimensionless, ki in 1/s,
// kd in s). Voltage limits apply after the effort is mapped to actuators.
struct PidGains {
  Vector6 kp = Vector6::Constant(0.1);
  Vector6 ki = Vector6::Constant(300.0);
  Vector6 kd = Vector6::Zero();
  double v_lo = 0.0;    // V
  double v_hi = 150.0;  // V
  AntiWindup anti_windup = AntiWindup::conditional;
  double derivative_tau = 0.0;  // s; 0 disables the derivative filter

  void validate() const {
    if ((kp.array() < 0.0).any() || (ki.array() < 0.0).any() || (kd.array() < 0.0).any())
      throw ValidationError("pid: gains must be >= 0");
    if (!(v_lo < v_hi)) throw ValidationError("pid: output limits must be ordered");
    if (!(derivative_tau >= 0.0)) throw ValidationError("pid: derivative_tau must be >= 0");
  }
};

struct PidLimits {
  Vector6 lo = Vector6::Constant(-std::numeric_limits<double>::infinity());
  Vector6 hi = Vector6::Constant(std::numeric_limits<double>::infinity());
};

struct PidState {
  Vector6 integral = Vector6::Zero();
  Vector6 previous_integral = Vector6::Zero();
  Vector6 previous_error = Vector6::Zero();
  Vector6 derivative = Vector6::Zero();
  bool primed = false;  // previous_error valid
};

struct PidOutput {
  Vector6 effort = Vector6::Zero();
  std::array<bool, 6> saturated{};
};

// u = kp e + ki I + kd de/dt with I += e dt (backward Euler) and a backward
// difference for de/dt. With conditional anti-windup the integral update is
// dropped on any channel whose output saturates in the direction of its error.
inline PidOutput pid_step(const PidGains& g, PidState& s, const Vector6& e, double dt,
                          const PidLimits& limits = {}) {
  if (!(dt > 0.0)) throw ValidationError("pid_step: dt must be > 0");
  PidOutput out;
  s.previous_integral = s.integral;

  Vector6 raw_d = Vector6::Zero();
  if (s.primed) raw_d = (e - s.previous_error) / dt;
  if (g.derivative_tau > 0.0) {
    const double a = dt / (g.derivative_tau + dt);
    s.derivative += a * (raw_d - s.derivative);
  } else {
    s.derivative = raw_d;
  }
  s.previous_error = e;
  s.primed = true;

  for (Eigen::Index k = 0; k < 6; ++k) {
    const double candidate_i = s.integral[k] + e[k] * dt;
    double u = g.kp[k] * e[k] + g.ki[k] * candidate_i + g.kd[k] * s.derivative[k];
    const bool high = u > limits.hi[k];
    const bool low = u < limits.lo[k];
    const bool winding = (high && e[k] > 0.0) || (low && e[k] < 0.0);
    if (!(g.anti_windup == AntiWindup::conditional && winding)) s.integral[k] = candidate_i;
    if (high) u = limits.hi[k];
    if (low) u = limits.lo[k];
    out.effort[k] = u;
    out.saturated[static_cast<std::size_t>(k)] = high || low;
  }
  return out;
}

// Undo the integral update of the last pid_step. Used when saturation is
// only detected downstream of the controller (voltage clamping).
inline void hold_integral(PidState& s) { s.integral = s.previous_integral; }

// ---------------------------------------------------------------------------
// Closed loop
// ---------------------------------------------------------------------------

struct LoopConfig {
  double control_rate_hz = 10000.0;
  double sim_dt = 1e-5;              // plant integration step, s
  double operating_voltage = 75.0;   // V, bias about which effort is applied
  Mode mode = Mode::task;

  int substeps() const {
    const double ratio = 1.0 / (sim_dt * control_rate_hz);
    return static_cast<int>(std::llround(ratio));
  }

  void validate() const {
    if (!(control_rate_hz > 0.0) || !(sim_dt > 0.0)) throw ValidationError("loop: rates must be > 0");
    const double ratio = 1.0 / (sim_dt * control_rate_hz);
    if (ratio < 1.0 - 1e-9 || std::abs(ratio - std::round(ratio)) > 1e-6)
      throw ValidationError("loop: control period must be an integer multiple of sim_dt");
  }
};

struct RunRecord {
  PoseSeries reference;
  PoseSeries truth;     // relative to the sensor zero
  PoseSeries measured;
  PoseSeries error;     // reference - measured
  VoltageSeries voltage;
  std::vector<std::uint8_t> command_saturated;
  std::vector<std::uint8_t> sensor_saturated;
  std::vector<std::uint8_t> hysteresis_bound;

  std::size_t size() const noexcept { return reference.size(); }
};

class InstabilityError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

namespace detail {

inline RunRecord make_record(double rate, std::size_t n) {
  RunRecord r;
  for (PoseSeries* s : {&r.reference, &r.truth, &r.measured, &r.error}) {
    s->rate_hz = rate;
    s->samples.reserve(n);
  }
  r.voltage.rate_hz = rate;
  r.voltage.samples.reserve(n);
  r.command_saturated.reserve(n);
  r.sensor_saturated.reserve(n);
  r.hysteresis_bound.reserve(n);
  return r;
}

// Ten times the nominal [0, 110] µm workspace width on each axis.
inline Vector6 divergence_bound(const Jacobian6& J) {
  const auto ranges = workspace::axis_ranges(J, workspace::InputBox{});
  Vector6 b;
  for (std::size_t k = 0; k < 6; ++k) b[static_cast<Eigen::Index>(k)] = 10.0 * std::max(ranges[k].width(), 1.0);
  return b;
}

inline void check_rate(const PoseSeries& reference, const LoopConfig& loop) {
  if (std::abs(reference.rate_hz - loop.control_rate_hz) > 1e-9 * loop.control_rate_hz)
    throw ValidationError("reference must be sampled at the control rate");
}

// Runs the plant for one control period under a held command and records
// one row. `command` is a function Pose6 measured -> VoltageVec6 (+ flag).
template <class CommandFn>
RunRecord run_loop(const plant::PlantConfig& plant_cfg, const LoopConfig& loop, const PoseSeries& reference,
                   std::uint64_t seed, CommandFn&& command) {
  loop.validate();
  check_rate(reference, loop);
  plant::Plant plant(plant_cfg, seed);
  plant.settle_at(loop.operating_voltage);
  const int sub = loop.substeps();
  const Vector6 bound = divergence_bound(plant_cfg.jacobian);

  RunRecord rec = make_record(loop.control_rate_hz, reference.size());
  for (std::size_t i = 0; i < reference.size(); ++i) {
    const Pose6 meas = plant.sense();
    const Pose6 err = reference[i] - meas;
    bool clamped = false;
    const VoltageVec6 v = command(reference[i], meas, err, clamped);

    rec.reference.samples.push_back(reference[i]);
    rec.truth.samples.push_back(plant.state().true_pose - plant.state().sensor_zero);
    rec.measured.samples.push_back(meas);
    rec.error.samples.push_back(err);
    rec.voltage.samples.push_back(v);
    rec.command_saturated.push_back(clamped ? 1 : 0);
    rec.sensor_saturated.push_back(plant.telemetry().sensor_saturated ? 1 : 0);

    bool bound_hit = false;
    for (int k = 0; k < sub; ++k) {
      plant.advance(v, loop.sim_dt);
      bound_hit |= plant.telemetry().hysteresis_bound;
    }
    rec.hysteresis_bound.push_back(bound_hit ? 1 : 0);

    const Pose6 rel = plant.state().true_pose - plant.state().sensor_zero;
    for (Eigen::Index k = 0; k < 6; ++k) {
      if (!std::isfinite(rel.vec()[k]) || std::abs(rel.vec()[k]) > bound[k]) {
        std::ostringstream msg;
        msg << "closed loop diverged at t=" << reference.time(i) << " s on axis "
            << kAxisNames[static_cast<std::size_t>(k)] << " (|pose| " << std::abs(rel.vec()[k])
            << " exceeds bound " << bound[k] << ")";
        throw InstabilityError(msg.str());
      }
    }
  }
  return rec;
}

}  // namespace detail

// Task-space PID: error per pose axis, effort mapped to actuators through the
// inverse of the nominal Jacobian, then to volts through the actuator's
// nominal gain about the operating voltage. Actuator mode runs one PID per
// actuator on the actuator-space error instead.
inline RunRecord closed_loop_run(const plant::PlantConfig& plant_cfg, const PidGains& gains,
                                 const LoopConfig& loop, const PoseSeries& reference, std::uint64_t seed,
                                 const Jacobian6& nominal) {
  gains.validate();
  const kinematics::InverseMap inverse(nominal);
  const double volts_per_um = 1.0 / plant_cfg.actuator.gain();
  const double dt = 1.0 / loop.control_rate_hz;
  const double v0 = loop.operating_voltage;
  PidState state;

  PidLimits act_limits;
  if (loop.mode == Mode::actuator) {
    act_limits.lo.setConstant((gains.v_lo - v0) / volts_per_um);
    act_limits.hi.setConstant((gains.v_hi - v0) / volts_per_um);
  }

  auto command = [&](const Pose6&, const Pose6&, const Pose6& err, bool& clamped) {
    VoltageVec6 v;
    if (loop.mode == Mode::task) {
      const auto out = pid_step(gains, state, err.vec(), dt);
      const ActuatorVec6 d = inverse(Pose6(out.effort));
      for (std::size_t i = 0; i < 6; ++i) {
        const double raw = v0 + d[i] * volts_per_um;
        v[i] = std::clamp(raw, gains.v_lo, gains.v_hi);
        clamped |= v[i] != raw;
      }
      if (clamped && gains.anti_windup == AntiWindup::conditional) hold_integral(state);
    } else {
      const ActuatorVec6 e_act = inverse(err);
      const auto out = pid_step(gains, state, e_act.vec(), dt, act_limits);
      for (std::size_t i = 0; i < 6; ++i) {
        v[i] = v0 + out.effort[static_cast<Eigen::Index>(i)] * volts_per_um;
        clamped |= out.saturated[i];
      }
    }
    return v;
  };
  return detail::run_loop(plant_cfg, loop, reference, seed, command);
}

inline RunRecord closed_loop_run(const plant::PlantConfig& plant_cfg, const PidGains& gains,
                                 const LoopConfig& loop, const PoseSeries& reference, std::uint64_t seed) {
  return closed_loop_run(plant_cfg, gains, loop, reference, seed, plant_cfg.jacobian);
}

// Feedforward only: the reference is mapped through the nominal inverse and
// the actuator gain, with no feedback. The response shows the raw plant
// (hysteresis, dynamics) against the commanded pose.
inline RunRecord open_loop_run(const plant::PlantConfig& plant_cfg, const LoopConfig& loop,
                               const PoseSeries& command_pose, std::uint64_t seed, const Jacobian6& nominal,
                               double v_lo = 0.0, double v_hi = 150.0) {
  const kinematics::InverseMap inverse(nominal);
  const double volts_per_um = 1.0 / plant_cfg.actuator.gain();
  const double v0 = loop.operating_voltage;
  auto command = [&](const Pose6& ref, const Pose6&, const Pose6&, bool& clamped) {
    const ActuatorVec6 d = inverse(ref);
    VoltageVec6 v;
    for (std::size_t i = 0; i < 6; ++i) {
      const double raw = v0 + d[i] * volts_per_um;
      v[i] = std::clamp(raw, v_lo, v_hi);
      clamped |= v[i] != raw;
    }
    return v;
  };
  return detail::run_loop(plant_cfg, loop, command_pose, seed, command);
}

inline RunRecord open_loop_run(const plant::PlantConfig& plant_cfg, const LoopConfig& loop,
                               const PoseSeries& command_pose, std::uint64_t seed) {
  return open_loop_run(plant_cfg, loop, command_pose, seed, plant_cfg.jacobian);
}

}  // namespace flexpos::control
