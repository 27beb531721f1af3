#pragma once

// Orientation error metrics, the sinusoidal reference trajectory and the
// inverse-dynamics tracking law for the grasped object.

#include <cmath>
#include <numbers>
#include <optional>

#include "rigidgrasp/dynamics.hpp"
#include "rigidgrasp/errors.hpp"
#include "rigidgrasp/linalg.hpp"
#include "rigidgrasp/types.hpp"

namespace rigidgrasp::control {

/// Controllers refuse to act at or beyond this orientation error.
inline constexpr double kAntipodalThreshold = 2.0 - 1e-9;

struct Gains {
  Mat3 K_p1 = Mat3::Identity();
  double k_p2 = 1.0;
  Mat6 K_d = Mat6::Identity();

  static Gains paper() {
    return {15.0 * Mat3::Identity(), 75.0, 40.0 * Mat6::Identity()};
  }

  void validate() const {
    if (!linalg::is_spd(K_p1)) throw Error(ErrorKind::InvalidArgument, "K_p1 must be symmetric positive definite");
    if (!(k_p2 > 0.0) || !std::isfinite(k_p2)) throw Error(ErrorKind::InvalidArgument, "k_p2 must be positive");
    if (!linalg::is_spd(K_d)) throw Error(ErrorKind::InvalidArgument, "K_d must be symmetric positive definite");
  }
};

/// p_d(t) = p0 + [a_x sin(s), a_y cos(s), z_offset + a_z sin(s)], s = w_p t + phase
/// eta_d(t)_k = eta0_k + b_k sin(w_k t + phase), k in {roll, pitch, yaw}
struct TrajectorySpec {
  Vec3 base_position = Vec3::Zero();
  Vec3 base_euler = Vec3::Zero();  ///< roll, pitch, yaw (rad)
  Vec3 position_amplitude = Vec3(0.2, 0.2, 0.1);
  double z_offset = 0.09;
  double w_p = 1.0;
  Vec3 euler_amplitude = Vec3::Constant(0.15);
  Vec3 euler_frequency = Vec3(1.0, 0.5, 1.0);  ///< w_phi, w_theta, w_psi
  double phase = std::numbers::pi / 6.0;

  static TrajectorySpec paper() {
    TrajectorySpec s;
    s.base_position = Vec3(-0.225, -0.612, 0.161);
    return s;
  }

  void validate() const {
    if (!base_position.allFinite() || !base_euler.allFinite() || !position_amplitude.allFinite() ||
        !euler_amplitude.allFinite() || !euler_frequency.allFinite() || !std::isfinite(w_p) ||
        !std::isfinite(phase) || !std::isfinite(z_offset)) {
      throw Error(ErrorKind::InvalidArgument, "trajectory parameters must be finite");
    }
  }
};

struct DesiredState {
  Vec3 position = Vec3::Zero();
  Mat3 rotation = Mat3::Identity();
  Twist6 twist = Twist6::Zero();         ///< [p_dot_d; omega_d]
  Twist6 acceleration = Twist6::Zero();  ///< [p_ddot_d; omega_dot_d]
  Vec3 euler = Vec3::Zero();
};

inline DesiredState desired_trajectory(double t, const TrajectorySpec& spec) {
  if (!(t >= 0.0)) throw Error(ErrorKind::InvalidArgument, "desired_trajectory: t must be >= 0");
  DesiredState d;
  const double s = spec.w_p * t + spec.phase;
  const double ss = std::sin(s), cs = std::cos(s);
  const Vec3& a = spec.position_amplitude;
  const double w = spec.w_p;
  d.position = spec.base_position + Vec3(a.x() * ss, a.y() * cs, spec.z_offset + a.z() * ss);
  d.twist.head<3>() = w * Vec3(a.x() * cs, -a.y() * ss, a.z() * cs);
  d.acceleration.head<3>() = -w * w * Vec3(a.x() * ss, a.y() * cs, a.z() * ss);

  Vec3 eta, eta_dot, eta_ddot;
  for (int k = 0; k < 3; ++k) {
    const double wk = spec.euler_frequency(k);
    const double arg = wk * t + spec.phase;
    const double b = spec.euler_amplitude(k);
    eta(k) = spec.base_euler(k) + b * std::sin(arg);
    eta_dot(k) = b * wk * std::cos(arg);
    eta_ddot(k) = -b * wk * wk * std::sin(arg);
  }
  if (std::abs(std::cos(eta.y())) < 1e-6) {
    throw Error(ErrorKind::EulerRateSingularity, "desired pitch reaches +-pi/2");
  }
  d.euler = eta;
  const Mat3 rz = linalg::rot_z(eta.z());
  const Mat3 ry = linalg::rot_y(eta.y());
  d.rotation = rz * ry * linalg::rot_x(eta.x());

  // omega = E(eta) eta_dot with columns Rz Ry e_x, Rz e_y, e_z.
  const Vec3 c_roll = rz * ry * Vec3::UnitX();
  const Vec3 c_pitch = rz * Vec3::UnitY();
  const Vec3 c_yaw = Vec3::UnitZ();
  Mat3 e;
  e << c_roll, c_pitch, c_yaw;
  d.twist.tail<3>() = e * eta_dot;

  const Mat3 sz = linalg::skew(Vec3::UnitZ());
  const Mat3 sy = linalg::skew(Vec3::UnitY());
  const Vec3 c_roll_dot = eta_dot.z() * sz * c_roll + eta_dot.y() * rz * sy * ry * Vec3::UnitX();
  const Vec3 c_pitch_dot = eta_dot.z() * sz * c_pitch;
  d.acceleration.tail<3>() = e * eta_ddot + eta_dot.x() * c_roll_dot + eta_dot.y() * c_pitch_dot;
  return d;
}

struct OrientationErrors {
  double e_O = 0.0;
  Vec3 e_R = Vec3::Zero();
};

/// e_O = tr(I - R_d^T R_O) / 2 in [0, 2]; e_R = unskew(R_d^T R_O - R_O^T R_d).
inline OrientationErrors orientation_errors(const Mat3& r_o, const Mat3& r_d) {
  const Mat3 rel = r_d.transpose() * r_o;
  OrientationErrors out;
  out.e_O = std::clamp(0.5 * (3.0 - rel.trace()), 0.0, 2.0);
  out.e_R = linalg::unskew(rel - rel.transpose(), 1e-6);
  return out;
}

struct TrackingErrors {
  Vec3 e_p = Vec3::Zero();
  double e_O = 0.0;
  Vec3 e_R = Vec3::Zero();
  Twist6 e_v = Twist6::Zero();
  Vec6 e_x = Vec6::Zero();
};

inline TrackingErrors tracking_errors(const PoseSE3& object, const Twist6& v_o,
                                      const DesiredState& desired) {
  TrackingErrors e;
  e.e_p = object.position - desired.position;
  const auto oe = orientation_errors(object.rotation, desired.rotation);
  e.e_O = oe.e_O;
  e.e_R = oe.e_R;
  e.e_v = v_o - desired.twist;
  e.e_x.head<3>() = e.e_p;
  const double denom = 2.0 * (2.0 - e.e_O) * (2.0 - e.e_O);
  e.e_x.tail<3>() = object.rotation * e.e_R / denom;
  return e;
}

/// V = e_p^T K_p1 e_p / 2 + k_p2 / (2 - e_O) + ||e_v||^2 / 2.
inline double lyapunov(const TrackingErrors& e, const Gains& gains) {
  return 0.5 * e.e_p.dot(gains.K_p1 * e.e_p) + gains.k_p2 / (2.0 - e.e_O) +
         0.5 * e.e_v.squaredNorm();
}

struct ControlOutput {
  VecX u;
  TrackingErrors errors;
  Twist6 commanded_acceleration;  ///< dv_d/dt - K_d e_v - K_p e_x
};

/// u = g + (C G^T + M dG^T/dt) v_O + G* (g_O + C_O v_O)
///       + (M G^T + G* M_O)(dv_d/dt - K_d e_v - K_p e_x) [+ h_int_d].
inline ControlOutput control_law(const dynamics::SystemSnapshot& s, const DesiredState& desired,
                                 const Gains& gains, const MatX& gstar,
                                 const std::optional<VecX>& h_int_d = std::nullopt) {
  const Eigen::Index n6 = s.G.cols();
  if (gstar.rows() != n6 || gstar.cols() != 6) {
    throw Error(ErrorKind::DimensionMismatch, "control_law: right inverse has wrong size");
  }
  ControlOutput out;
  out.errors = tracking_errors(s.grasp.object, s.object_twist, desired);
  if (out.errors.e_O >= kAntipodalThreshold) {
    throw Error(ErrorKind::AntipodalOrientation, "orientation error reached the antipodal set");
  }
  Vec6 kp_ex;
  kp_ex.head<3>() = gains.K_p1 * out.errors.e_x.head<3>();
  kp_ex.tail<3>() = gains.k_p2 * out.errors.e_x.tail<3>();
  out.commanded_acceleration = desired.acceleration - gains.K_d * out.errors.e_v - kp_ex;

  const MatX& m = s.agents.M;
  const Twist6& v_o = s.object_twist;
  out.u = s.agents.g + (s.agents.C * s.G.transpose() + m * s.G_rate.transpose()) * v_o +
          gstar * (s.object.g + s.object.C * v_o) +
          (m * s.G.transpose() + gstar * s.object.M) * out.commanded_acceleration;
  if (h_int_d) {
    if (h_int_d->size() != n6) {
      throw Error(ErrorKind::DimensionMismatch, "control_law: desired internal force has wrong size");
    }
    if ((s.G * *h_int_d).norm() > 1e-8 * std::max(1.0, h_int_d->norm())) {
      throw Error(ErrorKind::DesiredInternalForceNotInternal,
                  "desired internal force is not in null(G)");
    }
    out.u += *h_int_d;
  }
  return out;
}

}  // namespace rigidgrasp::control
