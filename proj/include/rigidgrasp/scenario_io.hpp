#pragma once

// JSON scenario configs, CSV trajectory logs and run summaries.
//
// Units: SI throughout (kg, kg m^2, m, s, rad). Euler angles are Z-Y-X
// (roll, pitch, yaw) with R = Rz(yaw) Ry(pitch) Rx(roll).

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "rigidgrasp/errors.hpp"
#include "rigidgrasp/grasp.hpp"
#include "rigidgrasp/linalg.hpp"
#include "rigidgrasp/sim.hpp"
#include "rigidgrasp/types.hpp"

namespace rigidgrasp::io {

using json = nlohmann::json;

namespace detail {

[[noreturn]] inline void fail(const std::string& what) { throw Error(ErrorKind::ConfigError, what); }

inline const json& member(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) fail(where + ": missing '" + key + "'");
  return j.at(key);
}

inline double number(const json& j, const std::string& where) {
  if (!j.is_number()) fail(where + ": expected a number");
  return j.get<double>();
}

inline VecX vector(const json& j, const std::string& where, Eigen::Index size = -1) {
  if (!j.is_array()) fail(where + ": expected an array");
  if (size >= 0 && static_cast<Eigen::Index>(j.size()) != size) {
    fail(where + ": expected " + std::to_string(size) + " entries");
  }
  VecX v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = number(j[i], where);
  return v;
}

inline Vec3 vec3(const json& j, const std::string& where) { return vector(j, where, 3); }

inline Mat3 positive_diag3(const json& j, const std::string& where) {
  const Vec3 d = vec3(j, where);
  if (!(d.minCoeff() > 0.0)) fail(where + ": diagonal entries must be positive");
  return d.asDiagonal();
}

inline double get_or(const json& j, const char* key, double fallback, const std::string& where) {
  return j.contains(key) ? number(j.at(key), where + "." + key) : fallback;
}

inline Vec3 vec3_or(const json& j, const char* key, const Vec3& fallback, const std::string& where) {
  return j.contains(key) ? vec3(j.at(key), where + "." + key) : fallback;
}

}  // namespace detail

/// Builds a scenario from a parsed config. Only the format is checked here;
/// physical validity is left to Scenario::validate().
inline sim::Scenario scenario_from_json(const json& cfg) {
  using namespace detail;
  if (!cfg.is_object()) fail("config: expected a JSON object");
  sim::Scenario sc;
  const Vec3 gravity = vec3_or(cfg, "gravity", Vec3(0.0, 0.0, -9.81), "config");

  const json& obj = member(cfg, "object", "config");
  sc.plant.object.mass = number(member(obj, "mass", "object"), "object.mass");
  sc.plant.object.inertia_body = vec3(member(obj, "inertia_diag", "object"), "object.inertia_diag").asDiagonal();
  sc.plant.object.gravity = gravity;
  const Vec3 p0 = vec3(member(obj, "initial_position", "object"), "object.initial_position");
  const Vec3 eta0 = vec3_or(obj, "initial_euler", Vec3::Zero(), "object");
  sc.initial.pose = {p0, linalg::euler_to_rot(eta0)};
  sc.initial.twist = vector(obj.contains("initial_twist") ? obj.at("initial_twist") : json::array({0, 0, 0, 0, 0, 0}),
                            "object.initial_twist", 6);

  const json& agents = member(cfg, "agents", "config");
  if (!agents.is_array()) fail("agents: expected an array");
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const std::string where = "agents[" + std::to_string(i) + "]";
    const json& a = agents[i];
    dynamics::RigidBodyParams params;
    params.mass = number(member(a, "mass", where), where + ".mass");
    params.inertia_body = vec3(member(a, "inertia_diag", where), where + ".inertia_diag").asDiagonal();
    params.gravity = gravity;
    sc.plant.agents.push_back(params);
    grasp::GraspOffset off;
    off.position = vec3(member(a, "offset_position", where), where + ".offset_position");
    off.rotation = linalg::euler_to_rot(vec3_or(a, "offset_euler", Vec3::Zero(), where));
    sc.plant.offsets.push_back(off);
  }

  sc.trajectory.base_position = p0;
  sc.trajectory.base_euler = eta0;
  if (cfg.contains("trajectory")) {
    const json& tr = cfg.at("trajectory");
    auto& t = sc.trajectory;
    t.position_amplitude = vec3_or(tr, "position_amplitude", t.position_amplitude, "trajectory");
    t.z_offset = get_or(tr, "z_offset", t.z_offset, "trajectory");
    t.w_p = get_or(tr, "w_p", t.w_p, "trajectory");
    t.euler_amplitude = vec3_or(tr, "euler_amplitude", t.euler_amplitude, "trajectory");
    t.euler_frequency = vec3_or(tr, "euler_frequency", t.euler_frequency, "trajectory");
    t.phase = get_or(tr, "phase", t.phase, "trajectory");
  }

  if (cfg.contains("gains")) {
    const json& g = cfg.at("gains");
    sc.gains.K_p1 = positive_diag3(member(g, "K_p1_diag", "gains"), "gains.K_p1_diag");
    sc.gains.k_p2 = number(member(g, "k_p2", "gains"), "gains.k_p2");
    const VecX kd = vector(member(g, "K_d_diag", "gains"), "gains.K_d_diag", 6);
    if (!(kd.minCoeff() > 0.0)) fail("gains.K_d_diag: diagonal entries must be positive");
    sc.gains.K_d = kd.asDiagonal();
  } else {
    sc.gains = control::Gains::paper();
  }

  const std::string kind = cfg.value("right_inverse", std::string("inertia_weighted"));
  if (kind == "inertia_weighted") {
    sc.right_inverse = grasp::RightInverseKind::InertiaWeighted;
  } else if (kind == "moore_penrose") {
    sc.right_inverse = grasp::RightInverseKind::MoorePenrose;
  } else {
    fail("right_inverse: expected \"inertia_weighted\" or \"moore_penrose\"");
  }

  if (cfg.contains("desired_internal_force") && !cfg.at("desired_internal_force").is_null()) {
    sc.desired_internal_force = vector(cfg.at("desired_internal_force"), "desired_internal_force");
  }
  sc.dt = get_or(cfg, "dt", sc.dt, "config");
  sc.duration = get_or(cfg, "duration", sc.duration, "config");
  if (cfg.contains("log_stride")) {
    if (!cfg.at("log_stride").is_number_integer()) fail("log_stride: expected an integer");
    sc.log_stride = cfg.at("log_stride").get<int>();
  }
  return sc;
}

inline sim::Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) detail::fail("cannot open config '" + path + "'");
  json cfg;
  try {
    in >> cfg;
  } catch (const json::exception& e) {
    detail::fail("config '" + path + "' is not valid JSON: " + e.what());
  }
  return scenario_from_json(cfg);
}

inline std::string format_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string csv_header(int agents) {
  std::string h = "t,e_p_norm,e_O,e_v_norm,h_int_norm,h_int_norm_th2,V,constraint_residual";
  for (int i = 1; i <= agents; ++i) h += ",u_norm_" + std::to_string(i);
  return h;
}

inline void write_csv(std::ostream& out, const sim::SimLog& log) {
  out << csv_header(log.agent_count) << '\n';
  for (const auto& s : log.samples) {
    out << format_number(s.t);
    for (double x : {s.e_p_norm, s.e_O, s.e_v_norm, s.h_int_norm, s.h_int_norm_th2, s.V,
                     s.constraint_residual}) {
      out << ',' << format_number(x);
    }
    for (double x : s.u_norms) out << ',' << format_number(x);
    out << '\n';
  }
}

/// Tracking errors below this count as converged.
inline constexpr double kConvergenceTolerance = 1e-3;

inline json summary(const sim::Scenario& sc, const sim::SimLog& log) {
  json j;
  j["agents"] = log.agent_count;
  j["right_inverse"] = grasp::to_string(sc.right_inverse);
  j["dt"] = sc.dt;
  j["duration"] = sc.duration;
  j["samples"] = log.samples.size();
  if (log.samples.empty()) return j;
  const auto& last = log.samples.back();
  double max_h = 0.0, max_h_th2 = 0.0, max_u = 0.0, max_res = 0.0, max_gap = 0.0, max_eo = 0.0;
  for (const auto& s : log.samples) {
    max_h = std::max(max_h, s.h_int_norm);
    max_h_th2 = std::max(max_h_th2, s.h_int_norm_th2);
    max_u = std::max(max_u, s.u_norm);
    max_res = std::max(max_res, s.constraint_residual);
    max_gap = std::max(max_gap, s.h_int_discrepancy);
    max_eo = std::max(max_eo, s.e_O);
  }
  j["terminal"] = {{"t", last.t},
                   {"e_p_norm", last.e_p_norm},
                   {"e_O", last.e_O},
                   {"e_v_norm", last.e_v_norm},
                   {"V", last.V}};
  j["max_h_int_norm"] = max_h;
  j["max_h_int_norm_th2"] = max_h_th2;
  j["max_h_int_discrepancy"] = max_gap;
  j["max_u_norm"] = max_u;
  j["max_e_O"] = max_eo;
  j["max_constraint_residual"] = max_res;
  j["converged"] = {{"position", last.e_p_norm < kConvergenceTolerance},
                    {"orientation", last.e_O < kConvergenceTolerance},
                    {"velocity", last.e_v_norm < kConvergenceTolerance}};
  j["internal_force_free"] = max_h < 1e-6 * (1.0 + max_u);
  return j;
}

}  // namespace rigidgrasp::io
