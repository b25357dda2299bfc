#pragma once

// Independent reference computations used only by the test suites. Nothing
// here calls into the code paths it is used to check.

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

namespace oracle {

// Half-space description of a full-dimensional 3D zonotope
// {c + sum t_i g_i : t_i in [-1/2, 1/2]}. Each non-parallel generator pair
// spans a facet normal n; x is inside iff |n.(x-c)| <= 1/2 sum |n.g_i|.
struct ZonotopeHalfspaces {
  Eigen::Vector3d center;
  std::vector<Eigen::Vector3d> normals;
  std::vector<double> offsets;

  ZonotopeHalfspaces(std::span<const Eigen::Vector3d> g, const Eigen::Vector3d& c) : center(c) {
    for (std::size_t a = 0; a < g.size(); ++a)
      for (std::size_t b = a + 1; b < g.size(); ++b) {
        Eigen::Vector3d n = g[a].cross(g[b]);
        if (n.norm() < 1e-12 * (g[a].norm() * g[b].norm() + 1e-300)) continue;
        n.normalize();
        double h = 0.0;
        for (const auto& gi : g) h += std::abs(n.dot(gi));
        normals.push_back(n);
        offsets.push_back(0.5 * h);
      }
  }

  bool contains(const Eigen::Vector3d& x) const {
    const Eigen::Vector3d d = x - center;
    for (std::size_t k = 0; k < normals.size(); ++k)
      if (std::abs(normals[k].dot(d)) > offsets[k]) return false;
    return true;
  }
};

struct MonteCarloVolume {
  double estimate;
  double sigma;  // standard deviation of the estimator
};

// Hit-or-miss volume inside the zonotope's bounding box.
inline MonteCarloVolume zonotope_volume_mc(std::span<const Eigen::Vector3d> g, std::size_t samples,
                                           std::uint64_t seed) {
  Eigen::Vector3d half = Eigen::Vector3d::Zero();
  for (const auto& gi : g) half += 0.5 * gi.cwiseAbs();
  const ZonotopeHalfspaces z(g, Eigen::Vector3d::Zero());
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < samples; ++i) {
    const Eigen::Vector3d p(u(rng) * half.x(), u(rng) * half.y(), u(rng) * half.z());
    if (z.contains(p)) ++hits;
  }
  const double box = 8.0 * half.prod();
  const double p = static_cast<double>(hits) / static_cast<double>(samples);
  return {box * p, box * std::sqrt(p * (1.0 - p) / static_cast<double>(samples))};
}

// Exact zero-order-hold discretisation of x'' = w^2 (u - x) - 2 z w x'.
class SecondOrderZoh {
 public:
  SecondOrderZoh(double f_hz, double zeta, double dt) {
    const double w = 2.0 * std::numbers::pi * f_hz;
    Eigen::Matrix2d A;
    A << 0.0, 1.0, -w * w, -2.0 * zeta * w;
    Eigen::Vector2d B(0.0, w * w);
    Ad_ = (A * dt).exp();
    Bd_ = A.inverse() * (Ad_ - Eigen::Matrix2d::Identity()) * B;
  }
  double step(double u) {
    x_ = Ad_ * x_ + Bd_ * u;
    return x_[0];
  }
  std::vector<double> filter(std::span<const double> u) {
    std::vector<double> y;
    y.reserve(u.size());
    for (double v : u) {
      y.push_back(x_[0]);
      step(v);
    }
    return y;
  }

 private:
  Eigen::Matrix2d Ad_;
  Eigen::Vector2d Bd_;
  Eigen::Vector2d x_ = Eigen::Vector2d::Zero();
};

// Analytic magnitude of the unit-gain second-order filter at frequency f.
inline double second_order_gain(double f_hz, double fn_hz, double zeta) {
  const double r = f_hz / fn_hz;
  return 1.0 / std::sqrt((1.0 - r * r) * (1.0 - r * r) + (2.0 * zeta * r) * (2.0 * zeta * r));
}

// Bouc-Wen integrated with RK4 on a fine time grid against a continuous
// drive d_lin(t). Returns the output displacement at each fine step.
template <class Drive>
std::vector<double> bouc_wen_rk4(Drive&& d_lin, double ddot_eps, double alpha, double beta, double gamma, double n,
                                 double t_end, double dt, std::vector<double>* x_out = nullptr) {
  auto rate = [&](double t, double h) {
    const double xd = (d_lin(t + ddot_eps) - d_lin(t - ddot_eps)) / (2.0 * ddot_eps);
    return xd - beta * std::abs(xd) * std::pow(std::abs(h), n - 1.0) * h - gamma * xd * std::pow(std::abs(h), n);
  };
  std::vector<double> y;
  double h = 0.0;
  const auto steps = static_cast<std::size_t>(std::llround(t_end / dt));
  for (std::size_t i = 0; i < steps; ++i) {
    const double t = static_cast<double>(i) * dt;
    const double x = d_lin(t);
    y.push_back(alpha * x + (1.0 - alpha) * h);
    if (x_out) x_out->push_back(x);
    const double k1 = rate(t, h);
    const double k2 = rate(t + dt / 2, h + dt / 2 * k1);
    const double k3 = rate(t + dt / 2, h + dt / 2 * k2);
    const double k4 = rate(t + dt, h + dt * k3);
    h += dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  return y;
}

// Signed shoelace area of a closed polyline (x_i, y_i).
inline double shoelace(std::span<const double> x, std::span<const double> y) {
  double a = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const std::size_t j = (i + 1) % x.size();
    a += x[i] * y[j] - x[j] * y[i];
  }
  return 0.5 * a;
}

}  // namespace oracle
