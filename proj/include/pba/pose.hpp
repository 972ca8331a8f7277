#pragma once

#include <Eigen/Dense>

#include <array>
#include <vector>

namespace pba {

// Rigid transform parameterized by an axis-angle rotation (angle = vector
// norm, in [0, pi] when produced by this module) and a translation.
struct RigidPose {
  Eigen::Vector3d rotation = Eigen::Vector3d::Zero();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  static RigidPose identity() { return RigidPose{}; }
};

// Matrix form (R, t); the working representation for composition chains and
// gradient accumulation.
struct PoseMatrix {
  Eigen::Matrix3d R = Eigen::Matrix3d::Identity();
  Eigen::Vector3d t = Eigen::Vector3d::Zero();

  // Bitwise identity test; used to keep no-motion warps exact.
  bool is_identity() const {
    return (R.array() == Eigen::Matrix3d::Identity().array()).all() &&
           (t.array() == 0.0).all();
  }
};

Eigen::Matrix3d axis_angle_to_matrix(const Eigen::Vector3d& omega);

// Log map; returned vector has norm in [0, pi].
Eigen::Vector3d matrix_to_axis_angle(const Eigen::Matrix3d& R);

// dR[k] = d axis_angle_to_matrix(omega) / d omega[k]
std::array<Eigen::Matrix3d, 3> axis_angle_jacobian(const Eigen::Vector3d& omega);

PoseMatrix pose_matrix(const RigidPose& p);
RigidPose pose_from_matrix(const PoseMatrix& m);

// Applies `earlier` first: result maps X to later.R*(earlier.R*X + earlier.t) + later.t.
PoseMatrix compose(const PoseMatrix& later, const PoseMatrix& earlier);
PoseMatrix inverse(const PoseMatrix& m);

// R*X + t
Eigen::Vector3d transform_point(const Eigen::Vector3d& X, const RigidPose& T);

// Left-to-right composition: chain[0] is applied to the point first.
// Throws InvalidInputError on an empty chain.
RigidPose compose_poses(const std::vector<RigidPose>& chain);
RigidPose invert_pose(const RigidPose& p);

}  // namespace pba
