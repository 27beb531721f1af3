#pragma once

// Fixed-step integration of the coupled object dynamics under the tracking
// controller, with per-sample force accounting.
//
// The pose is advanced on SE(3) with a Runge-Kutta-Munthe-Kaas scheme: the
// rotation at each stage is exp(S(theta)) R_n, and theta is integrated with
// the inverse differential of exp so the method keeps classical order four.

#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rigidgrasp/control.hpp"
#include "rigidgrasp/dynamics.hpp"
#include "rigidgrasp/errors.hpp"
#include "rigidgrasp/forces.hpp"
#include "rigidgrasp/grasp.hpp"
#include "rigidgrasp/linalg.hpp"
#include "rigidgrasp/rigidity.hpp"
#include "rigidgrasp/types.hpp"

namespace rigidgrasp::sim {

inline constexpr double kMaxStep = 0.01;

struct CoupledState {
  PoseSE3 pose{Vec3::Zero(), Mat3::Identity()};
  Twist6 twist = Twist6::Zero();
  double t = 0.0;
};

/// Physical description of the grasped system.
struct Plant {
  dynamics::RigidBodyParams object;
  std::vector<dynamics::RigidBodyParams> agents;
  std::vector<grasp::GraspOffset> offsets;

  int agent_count() const { return static_cast<int>(agents.size()); }

  grasp::GraspConfiguration configuration(const PoseSE3& pose) const { return {pose, offsets}; }

  dynamics::SystemSnapshot snapshot(const CoupledState& s) const {
    return dynamics::make_snapshot(configuration(s.pose), s.twist, agents, object);
  }

  void validate() const {
    if (agents.size() != offsets.size()) {
      throw Error(ErrorKind::ConfigError, "one grasp offset per agent required");
    }
    if (agents.size() < 3) {
      throw Error(ErrorKind::DegenerateConfiguration,
                  "degenerate framework (N=" + std::to_string(agents.size()) + ")");
    }
    object.validate();
    for (const auto& a : agents) a.validate();
    for (const auto& o : offsets) {
      if (!o.position.allFinite() || !linalg::is_rotation(o.rotation)) {
        throw Error(ErrorKind::ConfigError, "grasp offsets must be finite with a valid rotation");
      }
    }
    rigidity::is_infinitesimally_rigid(configuration({Vec3::Zero(), Mat3::Identity()}).framework());
  }
};

/// dv_O/dt = M_c^-1 (G u - C_c v_O - g_c).
inline Twist6 object_acceleration(const dynamics::SystemSnapshot& s, const VecX& u) {
  const auto c = s.coupled();
  const Eigen::LLT<Mat6> llt(c.M);
  if (llt.info() != Eigen::Success) throw Error(ErrorKind::NonSPD, "coupled inertia is not positive definite");
  return llt.solve(s.G * u - c.C * s.object_twist - c.g);
}

/// One RKMK4 step. `controller(snapshot, t)` returns the stacked agent wrenches
/// u and is evaluated at every stage.
template <class Controller>
CoupledState step(const Plant& plant, const CoupledState& state, Controller&& controller,
                  double dt) {
  if (!(dt > 0.0) || dt > kMaxStep) {
    throw Error(ErrorKind::InvalidArgument, "step: dt must lie in (0, 0.01]");
  }
  struct Rate {
    Vec3 p;
    Vec3 theta;
    Twist6 v;
  };
  const auto rate = [&](const Vec3& dp, const Vec3& theta, const Twist6& dv, double t) {
    CoupledState s;
    s.pose.position = state.pose.position + dp;
    s.pose.rotation = linalg::rot_exp(theta) * state.pose.rotation;
    s.twist = state.twist + dv;
    s.t = t;
    const auto snap = plant.snapshot(s);
    const VecX u = controller(snap, t);
    return Rate{s.twist.head<3>(), linalg::so3_dexp_inv(theta, s.twist.tail<3>()),
                object_acceleration(snap, u)};
  };
  const double h = dt;
  const Rate k1 = rate(Vec3::Zero(), Vec3::Zero(), Twist6::Zero(), state.t);
  const Rate k2 = rate(0.5 * h * k1.p, 0.5 * h * k1.theta, 0.5 * h * k1.v, state.t + 0.5 * h);
  const Rate k3 = rate(0.5 * h * k2.p, 0.5 * h * k2.theta, 0.5 * h * k2.v, state.t + 0.5 * h);
  const Rate k4 = rate(h * k3.p, h * k3.theta, h * k3.v, state.t + h);

  CoupledState next;
  next.pose.position = state.pose.position + h / 6.0 * (k1.p + 2.0 * k2.p + 2.0 * k3.p + k4.p);
  const Vec3 theta = h / 6.0 * (k1.theta + 2.0 * k2.theta + 2.0 * k3.theta + k4.theta);
  next.pose.rotation = linalg::orthonormalize(linalg::rot_exp(theta) * state.pose.rotation);
  next.twist = state.twist + h / 6.0 * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v);
  next.t = state.t + h;
  if (!next.pose.position.allFinite() || !next.twist.allFinite()) {
    throw Error(ErrorKind::NumericFailure, "integration produced non-finite state");
  }
  return next;
}

struct Scenario {
  Plant plant;
  CoupledState initial;
  control::TrajectorySpec trajectory;
  control::Gains gains;
  grasp::RightInverseKind right_inverse = grasp::RightInverseKind::InertiaWeighted;
  /// Desired internal wrenches in the object body frame, one 6-block per agent.
  std::optional<VecX> desired_internal_force;
  double dt = 1e-3;
  double duration = 15.0;
  int log_stride = 1;

  /// Object and agents of the reference cooperative-transport scenario: a
  /// 40 kg square plate held at its four edge midpoints by agents of 5, 10,
  /// 20 and 40 kg with distinct inertia tensors.
  static Scenario paper(grasp::RightInverseKind kind = grasp::RightInverseKind::InertiaWeighted) {
    Scenario s;
    s.plant.object.mass = 40.0;
    s.plant.object.inertia_body = Vec3(1.3333333333333333, 1.3333333333333333, 2.4).asDiagonal();
    const double masses[4] = {5.0, 10.0, 20.0, 40.0};
    const Vec3 inertias[4] = {Vec3(0.05, 0.06, 0.04), Vec3(0.12, 0.10, 0.15),
                              Vec3(0.30, 0.25, 0.35), Vec3(0.60, 0.70, 0.50)};
    for (int i = 0; i < 4; ++i) {
      const double yaw = i * std::numbers::pi / 2.0;
      dynamics::RigidBodyParams a;
      a.mass = masses[i];
      a.inertia_body = inertias[i].asDiagonal();
      s.plant.agents.push_back(a);
      s.plant.offsets.push_back({linalg::rot_z(yaw) * Vec3(0.3, 0.0, 0.0), linalg::rot_z(yaw)});
    }
    s.trajectory = control::TrajectorySpec::paper();
    s.initial.pose = {s.trajectory.base_position, linalg::euler_to_rot(s.trajectory.base_euler)};
    s.gains = control::Gains::paper();
    s.right_inverse = kind;
    return s;
  }

  void validate() const {
    plant.validate();
    gains.validate();
    trajectory.validate();
    if (!(dt > 0.0) || dt > kMaxStep) throw Error(ErrorKind::ConfigError, "dt must lie in (0, 0.01]");
    if (!(duration >= 0.0) || !std::isfinite(duration)) {
      throw Error(ErrorKind::ConfigError, "duration must be >= 0");
    }
    if (log_stride < 1) throw Error(ErrorKind::ConfigError, "log_stride must be >= 1");
    if (!initial.pose.position.allFinite() || !linalg::is_rotation(initial.pose.rotation) ||
        !initial.twist.allFinite()) {
      throw Error(ErrorKind::ConfigError, "initial state is invalid");
    }
    if (desired_internal_force) {
      const auto n = static_cast<Eigen::Index>(plant.agent_count());
      if (desired_internal_force->size() != 6 * n) {
        throw Error(ErrorKind::ConfigError, "desired_internal_force must have 6N entries");
      }
      const MatX g_body = grasp::grasp_matrix(plant.configuration({Vec3::Zero(), Mat3::Identity()}));
      if ((g_body * *desired_internal_force).norm() >
          1e-8 * std::max(1.0, desired_internal_force->norm())) {
        throw Error(ErrorKind::DesiredInternalForceNotInternal,
                    "desired_internal_force is not in null(G)");
      }
    }
  }

  long long step_count() const { return std::llround(duration / dt); }
};

/// Desired internal wrenches rotated from the object body frame into the
/// world frame; stays in null(G) as the object rotates.
inline VecX world_internal_force(const VecX& body, const Mat3& r_o) {
  VecX out(body.size());
  for (Eigen::Index k = 0; k < body.size(); k += 3) out.segment<3>(k) = r_o * body.segment<3>(k);
  return out;
}

struct ControlEvaluation {
  dynamics::SystemSnapshot snapshot;
  control::DesiredState desired;
  MatX gstar;
  std::optional<VecX> h_int_desired;  ///< world frame
  control::ControlOutput output;
};

inline ControlEvaluation evaluate_controller(const Scenario& sc, const CoupledState& state) {
  ControlEvaluation ev;
  ev.snapshot = sc.plant.snapshot(state);
  ev.desired = control::desired_trajectory(state.t, sc.trajectory);
  ev.gstar = grasp::right_inverse(ev.snapshot.G, ev.snapshot.agents.M, sc.right_inverse);
  if (sc.desired_internal_force) {
    ev.h_int_desired = world_internal_force(*sc.desired_internal_force, state.pose.rotation);
  }
  ev.output = control::control_law(ev.snapshot, ev.desired, sc.gains, ev.gstar, ev.h_int_desired);
  return ev;
}

/// Scenario controller in the form expected by step().
inline auto scenario_controller(const Scenario& sc) {
  return [&sc](const dynamics::SystemSnapshot& snap, double t) -> VecX {
    const auto desired = control::desired_trajectory(t, sc.trajectory);
    const MatX gstar = grasp::right_inverse(snap.G, snap.agents.M, sc.right_inverse);
    std::optional<VecX> h_d;
    if (sc.desired_internal_force) {
      h_d = world_internal_force(*sc.desired_internal_force, snap.grasp.object.rotation);
    }
    return control::control_law(snap, desired, sc.gains, gstar, h_d).u;
  };
}

struct LogSample {
  double t = 0.0;
  double e_p_norm = 0.0;
  double e_O = 0.0;
  double e_v_norm = 0.0;
  double h_int_norm = 0.0;      ///< internal forces from the agents-only Gauss principle
  double h_int_norm_th2 = 0.0;  ///< projection of the closed-form interaction forces
  double h_int_discrepancy = 0.0;  ///< ||difference of the two internal-force vectors||
  double h_int_desired_error = 0.0;  ///< ||h_int - h_int_d||, zero without injection
  double V = 0.0;
  double constraint_residual = 0.0;  ///< ||R_bar v_bar||
  double u_norm = 0.0;
  std::vector<double> u_norms;
};

struct SimLog {
  int agent_count = 0;
  std::vector<LogSample> samples;
};

inline LogSample sample(const Scenario& sc, const CoupledState& state) {
  const auto ev = evaluate_controller(sc, state);
  const auto& snap = ev.snapshot;
  const VecX& u = ev.output.u;
  const auto& err = ev.output.errors;

  LogSample s;
  s.t = state.t;
  s.e_p_norm = err.e_p.norm();
  s.e_O = err.e_O;
  s.e_v_norm = err.e_v.norm();
  s.V = control::lyapunov(err, sc.gains);
  s.u_norm = u.norm();
  for (int i = 0; i < snap.agent_count(); ++i) s.u_norms.push_back(u.segment<6>(6 * i).norm());

  const VecX h_int = forces::internal_forces_gauss(snap.framework(), snap.agent_twists, snap.agents, u).h_int;
  const VecX h = forces::interaction_forces_closed(snap, u);
  const VecX h_int_th2 = forces::internal_from_interaction(snap.agents.M, snap.G, h);
  s.h_int_norm = h_int.norm();
  s.h_int_norm_th2 = h_int_th2.norm();
  s.h_int_discrepancy = (h_int - h_int_th2).norm();
  if (ev.h_int_desired) s.h_int_desired_error = (h_int - *ev.h_int_desired).norm();

  const auto ext = rigidity::extended_rigidity_matrix(snap.framework(), snap.grasp.object);
  s.constraint_residual = (ext.matrix * snap.stacked_twist()).norm();
  return s;
}

/// Integrates the scenario from its initial state. Samples are taken at
/// t = k dt for every k divisible by the log stride, including t = 0.
inline SimLog run_scenario(const Scenario& sc) {
  sc.validate();
  SimLog log;
  log.agent_count = sc.plant.agent_count();
  const long long steps = sc.step_count();
  const auto controller = scenario_controller(sc);
  CoupledState state = sc.initial;
  state.t = 0.0;
  for (long long k = 0;; ++k) {
    if (k % sc.log_stride == 0) log.samples.push_back(sample(sc, state));
    if (k == steps) break;
    state = step(sc.plant, state, controller, sc.dt);
    state.t = static_cast<double>(k + 1) * sc.dt;
  }
  return log;
}

/// Final state only, for convergence studies.
inline CoupledState integrate(const Scenario& sc, double duration, double dt) {
  const auto controller = scenario_controller(sc);
  CoupledState state = sc.initial;
  state.t = 0.0;
  const long long steps = std::llround(duration / dt);
  for (long long k = 0; k < steps; ++k) {
    state = step(sc.plant, state, controller, dt);
    state.t = static_cast<double>(k + 1) * dt;
  }
  return state;
}

}  // namespace rigidgrasp::sim
