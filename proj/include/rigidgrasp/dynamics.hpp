#pragma once

// Task-space rigid-body terms for the agents and the object, the coupled
// object-frame dynamics
//   M_c dv_O/dt + C_c v_O + g_c = G u,
//   M_c = M_O + G M G^T, C_c = C_O + G C G^T + G M dG^T/dt, g_c = g_O + G g,
// and the unconstrained accelerations used by the Gauss-principle forces.

#include <cmath>
#include <span>
#include <vector>

#include "rigidgrasp/errors.hpp"
#include "rigidgrasp/grasp.hpp"
#include "rigidgrasp/linalg.hpp"
#include "rigidgrasp/types.hpp"

namespace rigidgrasp::dynamics {

struct RigidBodyParams {
  double mass = 1.0;
  Mat3 inertia_body = Mat3::Identity();  ///< kg m^2, body frame
  Vec3 gravity = Vec3(0.0, 0.0, -9.81);  ///< m/s^2

  void validate() const {
    if (!(mass > 0.0) || !std::isfinite(mass)) {
      throw Error(ErrorKind::InvalidArgument, "rigid body mass must be positive");
    }
    if (!linalg::is_spd(inertia_body)) {
      throw Error(ErrorKind::InvalidArgument, "rigid body inertia must be symmetric positive definite");
    }
    if (!gravity.allFinite()) throw Error(ErrorKind::InvalidArgument, "gravity must be finite");
  }
};

/// M dv/dt + C v + g = (applied wrench).
struct DynamicTerms {
  Mat6 M = Mat6::Identity();
  Mat6 C = Mat6::Zero();
  Vec6 g = Vec6::Zero();
};

/// Newton-Euler terms of a free rigid body whose reference point is its
/// centre of mass: M = diag(m I, R I_b R^T), C = diag(0, S(omega) I),
/// g = [-m gravity; 0].
inline DynamicTerms body_terms(const PoseSE3& pose, const Twist6& twist,
                               const RigidBodyParams& params) {
  DynamicTerms t;
  const Mat3 inertia = pose.rotation * params.inertia_body * pose.rotation.transpose();
  t.M.setZero();
  t.M.topLeftCorner<3, 3>() = params.mass * Mat3::Identity();
  t.M.bottomRightCorner<3, 3>() = inertia;
  t.C.bottomRightCorner<3, 3>() = linalg::skew(twist.tail<3>()) * inertia;
  t.g.head<3>() = -params.mass * params.gravity;
  return t;
}

/// Block-diagonal stack of per-agent terms.
struct StackedTerms {
  MatX M;
  MatX C;
  VecX g;
};

inline StackedTerms stack_terms(std::span<const DynamicTerms> terms) {
  const auto n = static_cast<Eigen::Index>(terms.size());
  StackedTerms s{MatX::Zero(6 * n, 6 * n), MatX::Zero(6 * n, 6 * n), VecX::Zero(6 * n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& t = terms[static_cast<std::size_t>(i)];
    s.M.block<6, 6>(6 * i, 6 * i) = t.M;
    s.C.block<6, 6>(6 * i, 6 * i) = t.C;
    s.g.segment<6>(6 * i) = t.g;
  }
  return s;
}

struct CoupledTerms {
  Mat6 M;
  Mat6 C;
  Vec6 g;
};

inline CoupledTerms coupled_terms(const StackedTerms& agents, const DynamicTerms& object,
                                  const MatX& g_mat, const MatX& g_rate) {
  if (agents.M.rows() != g_mat.cols() || g_rate.cols() != g_mat.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "coupled_terms: blocks are not conformable");
  }
  CoupledTerms c;
  const MatX gm = g_mat * agents.M;
  c.M = object.M + gm * g_mat.transpose();
  c.C = object.C + g_mat * agents.C * g_mat.transpose() + gm * g_rate.transpose();
  c.g = object.g + g_mat * agents.g;
  if (Eigen::LLT<Mat6>(c.M).info() != Eigen::Success) {
    throw Error(ErrorKind::NonSPD, "coupled inertia is not positive definite");
  }
  return c;
}

/// Accelerations of the unconstrained system:
///   coupled:     M_bar alpha = [u; 0] - C_bar v_bar - g_bar   (6N + 6)
///   agents_only: M alpha_int = u - C v - g                    (6N)
struct UnconstrainedAccelerations {
  VecX coupled;
  VecX agents_only;
};

inline UnconstrainedAccelerations unconstrained_accelerations(const StackedTerms& agents,
                                                              const DynamicTerms& object,
                                                              const VecX& u, const VecX& v,
                                                              const Twist6& v_o) {
  Eigen::LLT<MatX> llt(agents.M);
  Eigen::LLT<Mat6> llt_o(object.M);
  if (llt.info() != Eigen::Success || llt_o.info() != Eigen::Success) {
    throw Error(ErrorKind::NonSPD, "unconstrained_accelerations: inertia is not positive definite");
  }
  UnconstrainedAccelerations a;
  a.agents_only = llt.solve(u - agents.C * v - agents.g);
  a.coupled.resize(u.size() + 6);
  a.coupled.head(u.size()) = a.agents_only;
  a.coupled.tail<6>() = llt_o.solve(-object.C * v_o - object.g);
  return a;
}

/// Everything derived from an object pose and twist through the rigid grasps.
struct SystemSnapshot {
  grasp::GraspConfiguration grasp;
  Twist6 object_twist = Twist6::Zero();
  std::vector<PoseSE3> agent_poses;
  VecX agent_twists;   ///< v = G^T v_O
  MatX G;
  MatX G_rate;
  std::vector<DynamicTerms> agent_terms;
  StackedTerms agents;
  DynamicTerms object;

  int agent_count() const { return grasp.agent_count(); }
  rigidity::Framework framework() const { return rigidity::Framework(agent_poses); }

  /// [v; v_O].
  VecX stacked_twist() const {
    VecX vb(agent_twists.size() + 6);
    vb << agent_twists, object_twist;
    return vb;
  }

  MatX stacked_inertia() const {
    const Eigen::Index n = agents.M.rows();
    MatX mb = MatX::Zero(n + 6, n + 6);
    mb.topLeftCorner(n, n) = agents.M;
    mb.bottomRightCorner<6, 6>() = object.M;
    return mb;
  }

  CoupledTerms coupled() const { return coupled_terms(agents, object, G, G_rate); }
};

inline SystemSnapshot make_snapshot(const grasp::GraspConfiguration& gc, const Twist6& v_o,
                                    std::span<const RigidBodyParams> agent_params,
                                    const RigidBodyParams& object_params) {
  if (static_cast<int>(agent_params.size()) != gc.agent_count()) {
    throw Error(ErrorKind::DimensionMismatch, "make_snapshot: one parameter set per agent required");
  }
  SystemSnapshot s;
  s.grasp = gc;
  s.object_twist = v_o;
  s.agent_poses = gc.agent_poses();
  s.G = grasp::grasp_matrix(gc);
  s.G_rate = grasp::grasp_matrix_rate(gc, v_o);
  s.agent_twists = grasp::agent_velocities(s.G, v_o);
  s.agent_terms.reserve(agent_params.size());
  for (int i = 0; i < gc.agent_count(); ++i) {
    s.agent_terms.push_back(body_terms(s.agent_poses[static_cast<std::size_t>(i)],
                                       s.agent_twists.segment<6>(6 * i),
                                       agent_params[static_cast<std::size_t>(i)]));
  }
  s.agents = stack_terms(s.agent_terms);
  s.object = body_terms(gc.object, v_o, object_params);
  return s;
}

}  // namespace rigidgrasp::dynamics
