#include "pba/pose.hpp"

#include <algorithm>
#include <cmath>

#include "pba/errors.hpp"

namespace pba {
namespace {

Eigen::Matrix3d skew(const Eigen::Vector3d& w) {
  Eigen::Matrix3d m;
  m << 0.0, -w.z(), w.y(), w.z(), 0.0, -w.x(), -w.y(), w.x(), 0.0;
  return m;
}

Eigen::Vector3d vee(const Eigen::Matrix3d& m) {
  return Eigen::Vector3d(m(2, 1), m(0, 2), m(1, 0));
}

// sin(t)/t and (1-cos(t))/t^2 with series fallbacks near zero.
void rodrigues_coeffs(double theta, double theta2, double* A, double* B) {
  if (theta < 1e-4) {
    *A = 1.0 - theta2 / 6.0 * (1.0 - theta2 / 20.0);
    *B = 0.5 * (1.0 - theta2 / 12.0 * (1.0 - theta2 / 30.0));
  } else {
    *A = std::sin(theta) / theta;
    *B = (1.0 - std::cos(theta)) / theta2;
  }
}

}  // namespace

Eigen::Matrix3d axis_angle_to_matrix(const Eigen::Vector3d& omega) {
  double theta2 = omega.squaredNorm();
  double theta = std::sqrt(theta2);
  double A, B;
  rodrigues_coeffs(theta, theta2, &A, &B);
  Eigen::Matrix3d W = skew(omega);
  return Eigen::Matrix3d::Identity() + A * W + B * (W * W);
}

Eigen::Vector3d matrix_to_axis_angle(const Eigen::Matrix3d& R) {
  double c = std::clamp((R.trace() - 1.0) * 0.5, -1.0, 1.0);
  double theta = std::acos(c);
  Eigen::Vector3d v = vee(R - R.transpose());  // = 2 sin(theta) * axis
  if (theta < 1e-7) {
    return 0.5 * v;
  }
  if (theta > M_PI - 1e-5) {
    // R is close to 2*n*n^T - I; recover the axis from the strongest column.
    Eigen::Matrix3d S = 0.5 * (R + Eigen::Matrix3d::Identity());
    int i = 0;
    S.diagonal().maxCoeff(&i);
    Eigen::Vector3d n = S.col(i) / std::sqrt(std::max(S(i, i), 1e-12));
    n.normalize();
    if (n.dot(v) < 0.0) n = -n;
    return theta * n;
  }
  return (theta / (2.0 * std::sin(theta))) * v;
}

std::array<Eigen::Matrix3d, 3> axis_angle_jacobian(const Eigen::Vector3d& omega) {
  double theta2 = omega.squaredNorm();
  double theta = std::sqrt(theta2);
  double A, B, dA_div, dB_div;  // dX_div = (dX/dtheta)/theta
  rodrigues_coeffs(theta, theta2, &A, &B);
  if (theta < 1e-4) {
    dA_div = -(1.0 / 3.0) * (1.0 - theta2 / 10.0);
    dB_div = -(1.0 / 12.0) * (1.0 - theta2 / 15.0);
  } else {
    dA_div = (std::cos(theta) - A) / theta2;
    dB_div = (A - 2.0 * B) / theta2;
  }
  Eigen::Matrix3d W = skew(omega);
  Eigen::Matrix3d W2 = W * W;
  std::array<Eigen::Matrix3d, 3> out;
  for (int k = 0; k < 3; ++k) {
    Eigen::Matrix3d E = skew(Eigen::Vector3d::Unit(k));
    out[k] = (dA_div * omega[k]) * W + A * E + (dB_div * omega[k]) * W2 +
             B * (E * W + W * E);
  }
  return out;
}

PoseMatrix pose_matrix(const RigidPose& p) {
  return PoseMatrix{axis_angle_to_matrix(p.rotation), p.translation};
}

RigidPose pose_from_matrix(const PoseMatrix& m) {
  return RigidPose{matrix_to_axis_angle(m.R), m.t};
}

PoseMatrix compose(const PoseMatrix& later, const PoseMatrix& earlier) {
  return PoseMatrix{later.R * earlier.R, later.R * earlier.t + later.t};
}

PoseMatrix inverse(const PoseMatrix& m) {
  Eigen::Matrix3d Rt = m.R.transpose();
  return PoseMatrix{Rt, -(Rt * m.t)};
}

Eigen::Vector3d transform_point(const Eigen::Vector3d& X, const RigidPose& T) {
  PoseMatrix m = pose_matrix(T);
  return m.R * X + m.t;
}

RigidPose compose_poses(const std::vector<RigidPose>& chain) {
  if (chain.empty()) throw InvalidInputError("compose_poses: empty chain");
  PoseMatrix acc = pose_matrix(chain.front());
  for (std::size_t i = 1; i < chain.size(); ++i) {
    acc = compose(pose_matrix(chain[i]), acc);
  }
  return pose_from_matrix(acc);
}

RigidPose invert_pose(const RigidPose& p) {
  // The axis-angle of the inverse rotation is the exact negation; only the
  // translation needs matrix arithmetic.
  Eigen::Matrix3d Rt = axis_angle_to_matrix(p.rotation).transpose();
  return RigidPose{-p.rotation, -(Rt * p.translation)};
}

}  // namespace pba
