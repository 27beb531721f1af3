#pragma once

#include <cstdint>
#include <vector>

#include "rigidgrasp/rigidgrasp.hpp"

namespace rigidgrasp::testing {

/// Three agents at e1, e2, e3 with identity rotations, object at the origin.
inline grasp::GraspConfiguration canonical3() {
  grasp::GraspConfiguration gc;
  for (int i = 0; i < 3; ++i) gc.offsets.push_back({Vec3::Unit(i), Mat3::Identity()});
  return gc;
}

inline rigidity::Framework canonical3_framework() { return canonical3().framework(); }

inline grasp::GraspConfiguration collinear3() {
  grasp::GraspConfiguration gc;
  for (int i = 0; i < 3; ++i) gc.offsets.push_back({Vec3(1.0 + i, 0.0, 0.0), Mat3::Identity()});
  return gc;
}

inline verify::Rng rng(std::uint64_t seed) { return verify::Rng(seed); }

inline std::vector<dynamics::RigidBodyParams> heterogeneous_agents(int n) {
  std::vector<dynamics::RigidBodyParams> out;
  for (int i = 0; i < n; ++i) {
    dynamics::RigidBodyParams p;
    p.mass = 2.0 + 3.0 * i;
    p.inertia_body = Vec3(0.1 + 0.05 * i, 0.2 + 0.03 * i, 0.15 + 0.07 * i).asDiagonal();
    out.push_back(p);
  }
  return out;
}

/// Central difference of a matrix-valued function of a scalar.
template <class F>
MatX central_difference(F&& f, double h) {
  return (f(h) - f(-h)) / (2.0 * h);
}

/// Poses advanced along p + s p_dot, exp(s S(omega)) R.
inline std::vector<PoseSE3> advance(const std::vector<PoseSE3>& poses, const VecX& v, double s) {
  std::vector<PoseSE3> out = poses;
  for (std::size_t i = 0; i < poses.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(6 * i);
    out[i].position += s * v.segment<3>(k);
    const Vec3 w = v.segment<3>(k + 3) * s;
    out[i].rotation = (w.norm() == 0.0 ? Mat3::Identity()
                                       : Mat3(Eigen::AngleAxisd(w.norm(), w.normalized()))) *
                      poses[i].rotation;
  }
  return out;
}

inline double relative_error(const MatX& approx, const MatX& exact) {
  const double scale = std::max(exact.norm(), approx.norm());
  return scale == 0.0 ? 0.0 : (approx - exact).norm() / scale;
}

}  // namespace rigidgrasp::testing
