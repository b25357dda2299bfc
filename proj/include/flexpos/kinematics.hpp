#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <sstream>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "flexpos/errors.hpp"
#include "flexpos/types.hpp"

namespace flexpos::kinematics {

// ---------------------------------------------------------------------------
// Nominal model of the positioner
// ---------------------------------------------------------------------------

/// Regression-fitted Jacobian of the six-DOF stage (actuator µm -> µm / µrad).
inline Jacobian6 nominal_jacobian() {
  Matrix6 m;
  m << -0.65214, -0.926, -0.26136, 0.26204, 0.91721, 0.65117,  //
      0.68583, 0.22332, -0.90423, -0.89984, 0.21785, 0.69157,   //
      0.59421, 0.59531, 0.59273, 0.58933, 0.58998, 0.59237,     //
      6.8766, -19.846, 13.804, 13.74, -19.594, 6.7252,          //
      -18.912, -3.8375, 14.909, -14.936, 3.9577, 18.883,        //
      23.248, -23.313, 23.035, -23.009, 23.089, -23.199;
  return Jacobian6(m);
}

/// Output compliance of the stage in SI units (m/N, m/N·m, rad/N, rad/N·m).
inline Compliance6 nominal_compliance() {
  Matrix6 m;
  m << 8.1702e-06, 2.9018e-09, -8.1048e-09, 2.2626e-07, 1.5341e-04, 6.7613e-07,  //
      2.9006e-09, 8.1760e-06, 2.1384e-08, -1.5340e-04, 1.5135e-07, -5.8689e-07,   //
      -8.1046e-09, 2.1240e-08, 1.0176e-05, -1.2287e-06, 2.4710e-07, -2.7619e-07,  //
      2.2628e-07, -1.5340e-04, -1.2577e-06, 3.0963e-02, -2.6427e-07, 9.1629e-06,  //
      1.5341e-04, 1.5135e-07, 2.4704e-07, -2.6427e-07, 3.0831e-02, 3.1156e-05,    //
      6.9291e-07, -5.8687e-07, -2.7620e-07, 9.1629e-06, 3.1156e-05, 1.8005e-02;
  return Compliance6(m);
}

inline constexpr double kNominalInputStiffness = 3.0378e6;  // N/m
inline constexpr double kSafeInputStroke = 110.0;           // µm

// ---------------------------------------------------------------------------
// Mobility
// ---------------------------------------------------------------------------

struct MobilityParams {
  int lambda = 6;           // dimension of the motion space (3 planar, 6 spatial)
  int n_links = 8;          // including the ground link
  std::vector<int> joints;  // freedom m_i of each joint

  void validate() const {
    if (lambda != 3 && lambda != 6) throw ValidationError("mobility: lambda must be 3 or 6");
    if (n_links < 2) throw ValidationError("mobility: n_links must be >= 2");
    for (std::size_t i = 0; i < joints.size(); ++i) {
      if (joints[i] < 1 || joints[i] > lambda) {
        std::ostringstream msg;
        msg << "mobility: joint " << i << " has " << joints[i] << " DOF, expected 1.." << lambda;
        throw ValidationError(msg.str());
      }
    }
  }
};

/// Six bridge/parallelogram sections joined to the stage through universal joints.
inline MobilityParams nominal_mobility() { return MobilityParams{6, 8, std::vector<int>(9, 2)}; }

/// Kutzbach-Grübler count: lambda (n - j - 1) + sum(m_i).
inline int mobility(const MobilityParams& p) {
  p.validate();
  const int j = static_cast<int>(p.joints.size());
  const int freedoms = std::accumulate(p.joints.begin(), p.joints.end(), 0);
  return p.lambda * (p.n_links - j - 1) + freedoms;
}

// ---------------------------------------------------------------------------
// Forward / inverse maps
// ---------------------------------------------------------------------------

inline Pose6 forward_map(const Jacobian6& J, const ActuatorVec6& u) {
  return Pose6(J.matrix() * u.vec());
}

// Exact square solve via partial-pivot LU. Throws if the Jacobian is
// numerically singular.
inline ActuatorVec6 inverse_map(const Jacobian6& J, const Pose6& target) {
  if (!J.invertible()) {
    std::ostringstream msg;
    msg << "inverse_map: Jacobian is ill-conditioned (condition number " << J.condition_number()
        << ", limit " << Jacobian6::kMaxCondition << ")";
    throw NumericalError(msg.str());
  }
  return ActuatorVec6(J.matrix().partialPivLu().solve(target.vec()));
}

// Precomputed inverse for hot loops. Same conditioning rule as inverse_map.
class InverseMap {
 public:
  explicit InverseMap(const Jacobian6& J) : lu_(J.matrix()) {
    if (!J.invertible()) {
      std::ostringstream msg;
      msg << "Jacobian is ill-conditioned (condition number " << J.condition_number() << ")";
      throw NumericalError(msg.str());
    }
    inv_ = lu_.inverse();
  }
  ActuatorVec6 operator()(const Pose6& target) const { return ActuatorVec6(inv_ * target.vec()); }
  const Matrix6& matrix() const noexcept { return inv_; }

 private:
  Eigen::PartialPivLU<Matrix6> lu_;
  Matrix6 inv_;
};

// ---------------------------------------------------------------------------
// Regression fit
// ---------------------------------------------------------------------------

struct JacobianSample {
  ActuatorVec6 input;
  Pose6 output;
};

struct JacobianFit {
  Jacobian6 jacobian;
  Pose6 intercept;      // expected ~0 for a homogeneous linear plant
  Pose6 rms_residual;   // per output axis
  Matrix6 std_error;    // standard error of each fitted entry
  std::size_t samples = 0;
};

/// Ordinary least squares per output row with an intercept column.
inline JacobianFit fit_jacobian(std::span<const JacobianSample> samples) {
  constexpr Eigen::Index kCols = 7;
  const auto n = static_cast<Eigen::Index>(samples.size());
  if (n < kCols) {
    throw ValidationError("fit_jacobian: need at least 7 samples, got " + std::to_string(n));
  }

  Eigen::MatrixXd X(n, kCols);
  Eigen::MatrixXd Y(n, 6);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& s = samples[static_cast<std::size_t>(i)];
    X.row(i).head<6>() = s.input.vec().transpose();
    X(i, 6) = 1.0;
    Y.row(i) = s.output.vec().transpose();
  }
  if (!X.allFinite() || !Y.allFinite()) throw ValidationError("fit_jacobian: non-finite sample");

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  if (qr.rank() < kCols) {
    throw NumericalError("fit_jacobian: sample inputs are rank deficient (rank " +
                         std::to_string(qr.rank()) + " < 7)");
  }
  const Eigen::MatrixXd B = qr.solve(Y);  // 7 x 6
  const Eigen::MatrixXd R = Y - X * B;

  JacobianFit fit;
  fit.samples = static_cast<std::size_t>(n);
  fit.jacobian = Jacobian6(Matrix6(B.topRows(6).transpose()));
  fit.intercept = Pose6(Vector6(B.row(6).transpose()));

  const Eigen::MatrixXd xtx_inv = (X.transpose() * X).inverse();
  const double dof = static_cast<double>(n - kCols);
  for (Eigen::Index k = 0; k < 6; ++k) {
    const double rss = R.col(k).squaredNorm();
    fit.rms_residual[static_cast<std::size_t>(k)] = std::sqrt(rss / static_cast<double>(n));
    const double sigma2 = dof > 0 ? rss / dof : 0.0;
    for (Eigen::Index j = 0; j < 6; ++j) fit.std_error(k, j) = std::sqrt(sigma2 * xtx_inv(j, j));
  }
  return fit;
}

// ---------------------------------------------------------------------------
// Statics
// ---------------------------------------------------------------------------

struct ComplianceReport {
  double max_asymmetry = 0.0;  // max |C_ij - C_ji| / max |C_ij|
  Vector6 diagonal = Vector6::Zero();
  bool symmetric = false;
  bool positive_diagonal = false;
  double linear_mean = 0.0;   // mean of C11..C33, m/N
  double angular_mean = 0.0;  // mean of C44..C66, rad/N·m

  bool ok() const noexcept { return symmetric && positive_diagonal; }
};

inline constexpr double kComplianceAsymmetryTolerance = 0.05;

inline ComplianceReport validate_compliance(const Compliance6& C,
                                            double tolerance = kComplianceAsymmetryTolerance) {
  const Matrix6& m = C.matrix();
  ComplianceReport r;
  const double scale = m.cwiseAbs().maxCoeff();
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  r.max_asymmetry = scale > 0.0 ? asym / scale : 0.0;
  r.symmetric = r.max_asymmetry <= tolerance;
  r.diagonal = m.diagonal();
  r.positive_diagonal = (r.diagonal.array() > 0.0).all();
  r.linear_mean = r.diagonal.head<3>().mean();
  r.angular_mean = r.diagonal.tail<3>().mean();
  return r;
}

/// Stage deflection under a wrench, returned in µm / µrad.
inline Pose6 output_deflection(const Compliance6& C, const Wrench6& w) {
  if (!w.all_finite()) throw ValidationError("output_deflection: non-finite wrench");
  const auto report = validate_compliance(C);
  if (!report.ok()) throw ValidationError("output_deflection: compliance fails symmetry/positivity");
  return Pose6(C.matrix() * w.vec() * 1e6);
}

/// Force (N) needed to push an input of stiffness k_in (N/m) by d (µm).
inline double required_actuator_force(double k_in, double displacement_um) {
  if (!(k_in > 0.0)) throw ValidationError("input stiffness must be positive");
  if (!(displacement_um >= 0.0)) throw ValidationError("input displacement must be non-negative");
  return k_in * displacement_um * 1e-6;
}

}  // namespace flexpos::kinematics
