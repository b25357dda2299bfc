#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "flexpos/errors.hpp"
#include "flexpos/kinematics.hpp"
#include "flexpos/types.hpp"

namespace flexpos::workspace {

// Per-actuator displacement bounds in µm.
struct InputBox {
  ActuatorVec6 lo = ActuatorVec6::zero();
  ActuatorVec6 hi = ActuatorVec6::constant(kinematics::kSafeInputStroke);

  static InputBox uniform(double lo, double hi) {
    return InputBox{ActuatorVec6::constant(lo), ActuatorVec6::constant(hi)};
  }

  void validate(double safe_stroke = kinematics::kSafeInputStroke) const {
    if (!lo.all_finite() || !hi.all_finite()) throw ValidationError("input box: non-finite bound");
    for (std::size_t i = 0; i < 6; ++i) {
      if (lo[i] > hi[i]) throw ValidationError("input box: lo > hi on actuator " + std::to_string(i + 1));
      if (hi[i] > safe_stroke) {
        throw ValidationError("input box: hi exceeds safe stroke on actuator " + std::to_string(i + 1));
      }
    }
  }

  ActuatorVec6 widths() const { return hi - lo; }

  bool is_uniform() const {
    const auto w = widths();
    for (std::size_t i = 1; i < 6; ++i)
      if (std::abs(w[i] - w[0]) > 1e-12 * std::max(1.0, std::abs(w[0]))) return false;
    return true;
  }
};

struct Interval {
  double min = 0.0;
  double max = 0.0;
  double width() const noexcept { return max - min; }
};

enum class Block { translation, rotation };

using Generators = std::array<Eigen::Vector3d, 6>;

// Exact interval image of the box through each Jacobian row.
inline std::array<Interval, 6> axis_ranges(const Jacobian6& J, const InputBox& box) {
  box.validate(std::numeric_limits<double>::infinity());
  std::array<Interval, 6> out{};
  for (Eigen::Index k = 0; k < 6; ++k) {
    Interval iv;
    for (Eigen::Index i = 0; i < 6; ++i) {
      const double a = J(k, i) * box.lo[static_cast<std::size_t>(i)];
      const double b = J(k, i) * box.hi[static_cast<std::size_t>(i)];
      iv.min += std::min(a, b);
      iv.max += std::max(a, b);
    }
    out[static_cast<std::size_t>(k)] = iv;
  }
  return out;
}

/// Translational range divided by the (uniform) input stroke, for x, y, z.
inline std::array<double, 3> amplification_ratios(const Jacobian6& J, const InputBox& box) {
  if (!box.is_uniform()) throw ValidationError("amplification ratios need a uniform input box");
  const double stroke = box.widths()[0];
  if (!(stroke > 0.0)) throw ValidationError("amplification ratios need a non-zero input width");
  const auto ranges = axis_ranges(J, box);
  return {ranges[0].width() / stroke, ranges[1].width() / stroke, ranges[2].width() / stroke};
}

// Generators of the reachable set of one 3-row block: column i of the block
// scaled by the width of input i.
inline Generators generators(const Jacobian6& J, const InputBox& box, Block block) {
  const Eigen::Index r0 = block == Block::translation ? 0 : 3;
  const auto w = box.widths();
  Generators g;
  for (Eigen::Index i = 0; i < 6; ++i)
    g[static_cast<std::size_t>(i)] = J.matrix().block<3, 1>(r0, i) * w[static_cast<std::size_t>(i)];
  return g;
}

// Offset of the reachable set (image of box.lo).
inline Eigen::Vector3d block_offset(const Jacobian6& J, const InputBox& box, Block block) {
  const Eigen::Index r0 = block == Block::translation ? 0 : 3;
  return J.matrix().block<3, 6>(r0, 0) * box.lo.vec();
}

/// Volume of the zonotope spanned by the generators: the sum of |det| over
/// every generator triple. Rank-deficient sets give 0.
inline double zonotope_volume_3d(std::span<const Eigen::Vector3d> g) {
  double vol = 0.0;
  const std::size_t n = g.size();
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b) {
      const Eigen::Vector3d ab = g[a].cross(g[b]);
      for (std::size_t c = b + 1; c < n; ++c) vol += std::abs(ab.dot(g[c]));
    }
  return vol;
}

// ---------------------------------------------------------------------------
// 2D projections
// ---------------------------------------------------------------------------

struct Plane {
  Block block = Block::translation;
  int u = 0;  // component index within the 3D block
  int v = 1;
  std::string label;
};

inline const std::array<Plane, 6>& standard_planes() {
  static const std::array<Plane, 6> planes{{
      {Block::translation, 0, 1, "x-y"},
      {Block::translation, 0, 2, "x-z"},
      {Block::translation, 1, 2, "y-z"},
      {Block::rotation, 0, 1, "rx-ry"},
      {Block::rotation, 0, 2, "rx-rz"},
      {Block::rotation, 1, 2, "ry-rz"},
  }};
  return planes;
}

struct Polygon2D {
  std::string label;
  std::vector<Eigen::Vector2d> vertices;  // counterclockwise
  bool degenerate = false;                // point or segment

  Eigen::Vector2d centroid() const {
    Eigen::Vector2d c = Eigen::Vector2d::Zero();
    for (const auto& v : vertices) c += v;
    return vertices.empty() ? c : Eigen::Vector2d(c / static_cast<double>(vertices.size()));
  }

  // Axis-aligned bounding box as (min, max).
  std::pair<Eigen::Vector2d, Eigen::Vector2d> bounds() const {
    Eigen::Vector2d lo = Eigen::Vector2d::Constant(std::numeric_limits<double>::infinity());
    Eigen::Vector2d hi = -lo;
    for (const auto& v : vertices) {
      lo = lo.cwiseMin(v);
      hi = hi.cwiseMax(v);
    }
    return {lo, hi};
  }

  // Signed shoelace area; positive for counterclockwise order.
  double area() const {
    double a = 0.0;
    const std::size_t n = vertices.size();
    for (std::size_t i = 0; i < n; ++i) {
      const auto& p = vertices[i];
      const auto& q = vertices[(i + 1) % n];
      a += p.x() * q.y() - q.x() * p.y();
    }
    return 0.5 * a;
  }
};

// Exact zonotope polygon: projected generators are flipped into the upper
// half-plane, sorted by angle, parallel ones merged, then the boundary is
// walked once forward and once backward from the lowest vertex.
inline Polygon2D project_2d(std::span<const Eigen::Vector3d> g, const Plane& plane,
                            const Eigen::Vector3d& offset = Eigen::Vector3d::Zero()) {
  if (plane.u < 0 || plane.u > 2 || plane.v < 0 || plane.v > 2 || plane.u == plane.v) {
    throw ValidationError("project_2d: invalid plane selector");
  }
  Polygon2D poly;
  poly.label = plane.label;

  Eigen::Vector2d center(offset[plane.u], offset[plane.v]);
  double scale = 0.0;
  std::vector<Eigen::Vector2d> half;
  for (const auto& gi : g) {
    const Eigen::Vector2d p(gi[plane.u], gi[plane.v]);
    center += 0.5 * p;
    scale = std::max(scale, p.norm());
    half.push_back(0.5 * p);
  }
  const double eps = 1e-12 * std::max(scale, 1e-300);

  struct Dir {
    double angle;
    Eigen::Vector2d h;
  };
  std::vector<Dir> dirs;
  for (auto h : half) {
    if (h.norm() <= eps) continue;
    if (h.y() < 0.0 || (h.y() == 0.0 && h.x() < 0.0)) h = -h;
    dirs.push_back({std::atan2(h.y(), h.x()), h});
  }
  std::sort(dirs.begin(), dirs.end(), [](const Dir& a, const Dir& b) { return a.angle < b.angle; });

  std::vector<Eigen::Vector2d> merged;
  double last_angle = -1.0;
  for (const auto& d : dirs) {
    if (!merged.empty() && std::abs(d.angle - last_angle) <= 1e-12) {
      merged.back() += d.h;
    } else {
      merged.push_back(d.h);
      last_angle = d.angle;
    }
  }
  // Antiparallel pairs straddling angle 0 / pi end up at both ends.
  if (merged.size() > 1 && std::abs(last_angle - std::numbers::pi) <= 1e-12) {
    merged.front() -= merged.back();
    merged.pop_back();
  }

  if (merged.empty()) {
    poly.vertices.push_back(center);
    poly.degenerate = true;
    return poly;
  }

  Eigen::Vector2d sum = Eigen::Vector2d::Zero();
  for (const auto& h : merged) sum += h;
  Eigen::Vector2d v = center - sum;
  if (merged.size() == 1) {
    poly.vertices = {v, center + sum};
    poly.degenerate = true;
    return poly;
  }
  for (const auto& h : merged) {
    poly.vertices.push_back(v);
    v += 2.0 * h;
  }
  for (const auto& h : merged) {
    poly.vertices.push_back(v);
    v -= 2.0 * h;
  }
  return poly;
}

// ---------------------------------------------------------------------------
// Summary
// ---------------------------------------------------------------------------

struct WorkspaceSummary {
  std::array<Interval, 6> ranges{};
  std::array<double, 3> amplification{};
  double translational_volume = 0.0;  // µm^3
  double rotational_volume = 0.0;     // µrad^3
  std::vector<Polygon2D> projections;
};

inline WorkspaceSummary summarize(const Jacobian6& J, const InputBox& box) {
  WorkspaceSummary s;
  s.ranges = axis_ranges(J, box);
  if (box.is_uniform() && box.widths()[0] > 0.0) s.amplification = amplification_ratios(J, box);
  const auto gt = generators(J, box, Block::translation);
  const auto gr = generators(J, box, Block::rotation);
  s.translational_volume = zonotope_volume_3d(gt);
  s.rotational_volume = zonotope_volume_3d(gr);
  for (const auto& plane : standard_planes()) {
    const auto& g = plane.block == Block::translation ? gt : gr;
    s.projections.push_back(project_2d(g, plane, block_offset(J, box, plane.block)));
  }
  return s;
}

}  // namespace flexpos::workspace
