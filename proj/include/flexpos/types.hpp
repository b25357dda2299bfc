#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "flexpos/errors.hpp"

namespace flexpos {

using Vector6 = Eigen::Matrix<double, 6, 1>;
using Matrix6 = Eigen::Matrix<double, 6, 6>;

// Task-space axis order is fixed: three translations then three rotations.
enum class Axis : std::size_t { x = 0, y = 1, z = 2, rx = 3, ry = 4, rz = 5 };

inline constexpr std::array<Axis, 6> kAllAxes{Axis::x,  Axis::y,  Axis::z,
                                              Axis::rx, Axis::ry, Axis::rz};

inline constexpr std::array<std::string_view, 6> kAxisNames{"x", "y", "z", "rx", "ry", "rz"};
inline constexpr std::array<std::string_view, 6> kAxisUnits{"um", "um", "um", "urad", "urad", "urad"};

constexpr std::size_t index(Axis a) noexcept { return static_cast<std::size_t>(a); }
constexpr bool is_rotation(Axis a) noexcept { return index(a) >= 3; }

inline Axis axis_from_name(std::string_view name) {
  for (std::size_t i = 0; i < 6; ++i) {
    if (kAxisNames[i] == name) return static_cast<Axis>(i);
  }
  throw ValidationError("unknown axis '" + std::string(name) + "'");
}

// Six-component value with a phantom tag so poses, actuator displacements,
// voltages and wrenches cannot be mixed by accident. Conversions between
// them go through the kinematics/plant functions that own the units.
template <class Tag>
class Vec6 {
 public:
  Vec6() : v_(Vector6::Zero()) {}
  explicit Vec6(const Vector6& v) : v_(v) {}
  Vec6(double a, double b, double c, double d, double e, double f) { v_ << a, b, c, d, e, f; }

  static Vec6 zero() { return Vec6(); }
  static Vec6 constant(double value) { return Vec6(Vector6::Constant(value)); }
  static Vec6 unit(std::size_t i, double value = 1.0) {
    Vec6 out;
    out.v_[static_cast<Eigen::Index>(i)] = value;
    return out;
  }
  static Vec6 unit(Axis a, double value = 1.0) { return unit(index(a), value); }

  double operator[](std::size_t i) const { return v_[static_cast<Eigen::Index>(i)]; }
  double& operator[](std::size_t i) { return v_[static_cast<Eigen::Index>(i)]; }
  double operator[](Axis a) const { return (*this)[index(a)]; }
  double& operator[](Axis a) { return (*this)[index(a)]; }

  const Vector6& vec() const noexcept { return v_; }
  Vector6& vec() noexcept { return v_; }

  bool all_finite() const { return v_.allFinite(); }
  double norm() const { return v_.norm(); }

  Vec6& operator+=(const Vec6& o) {
    v_ += o.v_;
    return *this;
  }
  Vec6& operator-=(const Vec6& o) {
    v_ -= o.v_;
    return *this;
  }
  Vec6& operator*=(double s) {
    v_ *= s;
    return *this;
  }
  friend Vec6 operator+(Vec6 a, const Vec6& b) { return a += b; }
  friend Vec6 operator-(Vec6 a, const Vec6& b) { return a -= b; }
  friend Vec6 operator*(Vec6 a, double s) { return a *= s; }
  friend Vec6 operator*(double s, Vec6 a) { return a *= s; }
  friend Vec6 operator-(Vec6 a) {
    a.v_ = -a.v_;
    return a;
  }
  friend bool operator==(const Vec6& a, const Vec6& b) { return a.v_ == b.v_; }

 private:
  Vector6 v_;
};

struct PoseTag {};
struct ActuatorTag {};
struct VoltageTag {};
struct WrenchTag {};

/// Stage displacement: x, y, z in µm; rx, ry, rz in µrad.
using Pose6 = Vec6<PoseTag>;
/// Per-actuator input displacement in µm.
using ActuatorVec6 = Vec6<ActuatorTag>;
/// Per-actuator drive voltage in V.
using VoltageVec6 = Vec6<VoltageTag>;
/// Force (N) and moment (N·m) applied at the stage.
using Wrench6 = Vec6<WrenchTag>;

// Linear map from actuator displacement to stage pose. Rows 1-3 are µm/µm,
// rows 4-6 are µrad/µm. The condition number is computed once at
// construction; inverse operations refuse matrices above kMaxCondition.
class Jacobian6 {
 public:
  static constexpr double kMaxCondition = 1e6;

  Jacobian6() : Jacobian6(Matrix6::Identity()) {}

  explicit Jacobian6(const Matrix6& m) : m_(m) {
    if (!m_.allFinite()) throw ValidationError("Jacobian has non-finite entries");
    Eigen::JacobiSVD<Matrix6> svd(m_);
    const auto& s = svd.singularValues();
    cond_ = s[5] > 0.0 ? s[0] / s[5] : std::numeric_limits<double>::infinity();
  }

  static Jacobian6 from_row_major(std::span<const double> values) {
    if (values.size() != 36) throw ValidationError("Jacobian needs 36 row-major values");
    Matrix6 m;
    for (Eigen::Index r = 0; r < 6; ++r)
      for (Eigen::Index c = 0; c < 6; ++c) m(r, c) = values[static_cast<std::size_t>(r * 6 + c)];
    return Jacobian6(m);
  }

  const Matrix6& matrix() const noexcept { return m_; }
  double operator()(Eigen::Index r, Eigen::Index c) const { return m_(r, c); }
  double condition_number() const noexcept { return cond_; }
  bool invertible() const noexcept { return cond_ < kMaxCondition; }

  std::vector<double> row_major() const {
    std::vector<double> out(36);
    for (Eigen::Index r = 0; r < 6; ++r)
      for (Eigen::Index c = 0; c < 6; ++c) out[static_cast<std::size_t>(r * 6 + c)] = m_(r, c);
    return out;
  }

 private:
  Matrix6 m_;
  double cond_ = 1.0;
};

// Output compliance, SI units: translational rows in m per N (or per N·m),
// rotational rows in rad per N (or per N·m). Construction only checks that
// entries are finite; the symmetry/positivity invariants are reported by
// validate_compliance() so that a bad matrix can still be inspected.
class Compliance6 {
 public:
  Compliance6() : m_(Matrix6::Identity()) {}
  explicit Compliance6(const Matrix6& m) : m_(m) {
    if (!m_.allFinite()) throw ValidationError("compliance has non-finite entries");
  }

  static Compliance6 from_row_major(std::span<const double> values) {
    if (values.size() != 36) throw ValidationError("compliance needs 36 row-major values");
    Matrix6 m;
    for (Eigen::Index r = 0; r < 6; ++r)
      for (Eigen::Index c = 0; c < 6; ++c) m(r, c) = values[static_cast<std::size_t>(r * 6 + c)];
    return Compliance6(m);
  }

  const Matrix6& matrix() const noexcept { return m_; }

  std::vector<double> row_major() const {
    std::vector<double> out(36);
    for (Eigen::Index r = 0; r < 6; ++r)
      for (Eigen::Index c = 0; c < 6; ++c) out[static_cast<std::size_t>(r * 6 + c)] = m_(r, c);
    return out;
  }

 private:
  Matrix6 m_;
};

// Uniformly sampled record. Sample i sits at time i / rate_hz.
template <class Sample>
struct TimeSeries {
  double rate_hz = 1.0;
  std::vector<Sample> samples;

  std::size_t size() const noexcept { return samples.size(); }
  bool empty() const noexcept { return samples.empty(); }
  double dt() const noexcept { return 1.0 / rate_hz; }
  double time(std::size_t i) const noexcept { return static_cast<double>(i) / rate_hz; }
  double duration() const noexcept { return static_cast<double>(samples.size()) / rate_hz; }

  const Sample& operator[](std::size_t i) const { return samples[i]; }
  Sample& operator[](std::size_t i) { return samples[i]; }

  // One component of every sample, e.g. the z channel of a pose series.
  std::vector<double> channel(std::size_t k) const {
    std::vector<double> out;
    out.reserve(samples.size());
    for (const auto& s : samples) out.push_back(s[k]);
    return out;
  }
  std::vector<double> channel(Axis a) const { return channel(index(a)); }
};

using PoseSeries = TimeSeries<Pose6>;
using VoltageSeries = TimeSeries<VoltageVec6>;

}  // namespace flexpos
