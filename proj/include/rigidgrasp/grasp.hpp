#pragma once

// Rigid-grasp kinematics: object-to-agent Jacobians, the grasp matrix G and
// its rate, velocity/force maps, and right inverses of G.

#include <string>
#include <vector>

#include "rigidgrasp/errors.hpp"
#include "rigidgrasp/linalg.hpp"
#include "rigidgrasp/rigidity.hpp"
#include "rigidgrasp/types.hpp"

namespace rigidgrasp::grasp {

/// Fixed grasp point and grasp frame, both expressed in the object body frame.
struct GraspOffset {
  Vec3 position = Vec3::Zero();
  Mat3 rotation = Mat3::Identity();
};

/// Object pose plus rigid grasp offsets. Agent poses are always derived:
/// p_i = p_O + R_O p_off_i, R_i = R_O R_off_i.
struct GraspConfiguration {
  PoseSE3 object;
  std::vector<GraspOffset> offsets;

  int agent_count() const { return static_cast<int>(offsets.size()); }

  /// p_iO = p_i - p_O.
  Vec3 lever(int i) const { return object.rotation * offsets[static_cast<std::size_t>(i)].position; }

  PoseSE3 agent_pose(int i) const {
    const auto& off = offsets[static_cast<std::size_t>(i)];
    return {object.position + object.rotation * off.position, object.rotation * off.rotation};
  }

  std::vector<PoseSE3> agent_poses() const {
    std::vector<PoseSE3> poses;
    poses.reserve(offsets.size());
    for (int i = 0; i < agent_count(); ++i) poses.push_back(agent_pose(i));
    return poses;
  }

  rigidity::Framework framework() const { return rigidity::Framework(agent_poses()); }
};

/// [[I, -S(p_iO)], [0, I]].
inline Mat6 object_to_agent_jacobian(const Vec3& p_io) {
  Mat6 j = Mat6::Identity();
  j.topRightCorner<3, 3>() = -linalg::skew(p_io);
  return j;
}

/// G = [J_O1^T, ..., J_ON^T], 6 x 6N.
inline MatX grasp_matrix(const GraspConfiguration& gc) {
  MatX g(6, 6 * gc.agent_count());
  for (int i = 0; i < gc.agent_count(); ++i) {
    g.middleCols<6>(6 * i) = object_to_agent_jacobian(gc.lever(i)).transpose();
  }
  return g;
}

/// dG/dt for object twist v_O. Only the lever terms move:
/// d/dt p_iO = omega_O x p_iO.
inline MatX grasp_matrix_rate(const GraspConfiguration& gc, const Twist6& v_o) {
  const Vec3 omega = v_o.tail<3>();
  MatX gd = MatX::Zero(6, 6 * gc.agent_count());
  for (int i = 0; i < gc.agent_count(); ++i) {
    const Vec3 lever_rate = omega.cross(gc.lever(i));
    // (d/dt J_Oi)^T has S(lever_rate) in its lower-left block.
    gd.block<3, 3>(3, 6 * i) = linalg::skew(lever_rate);
  }
  return gd;
}

/// v = G^T v_O.
inline VecX agent_velocities(const MatX& g, const Twist6& v_o) { return g.transpose() * v_o; }

/// h_O = G h.
inline Wrench6 object_wrench(const MatX& g, const VecX& h) {
  if (h.size() != g.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "object_wrench: wrench stack has wrong size");
  }
  return g * h;
}

enum class RightInverseKind {
  InertiaWeighted,  ///< M G^T (G M G^T)^-1
  MoorePenrose,     ///< G^T (G G^T)^-1
};

inline const char* to_string(RightInverseKind kind) {
  return kind == RightInverseKind::InertiaWeighted ? "inertia_weighted" : "moore_penrose";
}

/// Right inverse G* with G G* = I_6. M must be symmetric positive definite.
/// (G W G^T) is inverted by Cholesky; failure means G lost rank.
inline MatX right_inverse(const MatX& g, const MatX& m, RightInverseKind kind) {
  if (m.rows() != g.cols() || m.cols() != g.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "right_inverse: inertia has wrong size");
  }
  if (!linalg::is_symmetric(m) || Eigen::LLT<MatX>(m).info() != Eigen::Success) {
    throw Error(ErrorKind::SingularInertia, "right_inverse: inertia is not positive definite");
  }
  const MatX weighted_t =
      kind == RightInverseKind::InertiaWeighted ? MatX(m * g.transpose()) : MatX(g.transpose());
  const MatX gram = g * weighted_t;
  Eigen::LLT<MatX> llt(0.5 * (gram + gram.transpose()));
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorKind::RankDeficientGrasp, "right_inverse: grasp matrix is rank deficient");
  }
  // G* = W G^T (G W G^T)^-1 = (gram^-1 (W G^T)^T)^T with gram symmetric.
  return llt.solve(weighted_t.transpose()).transpose();
}

}  // namespace rigidgrasp::grasp
