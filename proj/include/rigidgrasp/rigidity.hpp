#pragma once

// Distance-and-bearing (D&B) rigidity of frameworks in SE(3) over the
// complete graph K_N.
//
// Row layout of the rigidity matrix is frozen: one distance row per
// undirected edge (i<j, lexicographic), then three bearing rows per directed
// edge (i!=j, lexicographic). Columns are per node, interleaved as
// [d/dp_i (3), d/dR_i (3)], where the rotation block multiplies the inertial
// angular velocity omega_i under dR_i/dt = S(omega_i) R_i.

#include <cstddef>
#include <string>
#include <vector>

#include "rigidgrasp/errors.hpp"
#include "rigidgrasp/linalg.hpp"
#include "rigidgrasp/types.hpp"

namespace rigidgrasp::rigidity {

inline constexpr double kRankTolerance = 1e-10;
inline constexpr double kCoincidenceTolerance = 1e-9;

struct Edge {
  int from;
  int to;
};

/// Node poses of a framework on the complete graph K_N.
class Framework {
 public:
  explicit Framework(std::vector<PoseSE3> poses) : poses_(std::move(poses)) {
    if (poses_.size() < 2) {
      throw Error(ErrorKind::InvalidArgument, "framework needs at least 2 nodes");
    }
    for (const auto& p : poses_) {
      if (!p.position.allFinite() || !linalg::is_rotation(p.rotation)) {
        throw Error(ErrorKind::InvalidArgument, "framework pose is not a valid SE(3) element");
      }
    }
  }

  int size() const { return static_cast<int>(poses_.size()); }
  const PoseSE3& pose(int i) const { return poses_[static_cast<std::size_t>(i)]; }
  const std::vector<PoseSE3>& poses() const { return poses_; }

  /// E_u: pairs i<j in lexicographic order.
  std::vector<Edge> undirected_edges() const {
    std::vector<Edge> edges;
    for (int i = 0; i < size(); ++i)
      for (int j = i + 1; j < size(); ++j) edges.push_back({i, j});
    return edges;
  }

  /// E: ordered pairs i!=j in lexicographic order.
  std::vector<Edge> directed_edges() const {
    std::vector<Edge> edges;
    for (int i = 0; i < size(); ++i)
      for (int j = 0; j < size(); ++j)
        if (i != j) edges.push_back({i, j});
    return edges;
  }

  Eigen::Index distance_row_count() const {
    return static_cast<Eigen::Index>(size()) * (size() - 1) / 2;
  }
  Eigen::Index row_count() const { return distance_row_count() + 3 * size() * (size() - 1); }
  Eigen::Index col_count() const { return 6 * size(); }

 private:
  std::vector<PoseSE3> poses_;
};

struct RigidityEvaluation {
  VecX gamma;
  MatX matrix;
  Eigen::Index rank = 0;
  bool degenerate = false;
};

struct RigidityVerdict {
  bool rigid = false;
  Eigen::Index rank = 0;
};

namespace detail {

inline void check_separation(const Framework& fw) {
  for (const auto& e : fw.undirected_edges()) {
    if ((fw.pose(e.to).position - fw.pose(e.from).position).norm() <= kCoincidenceTolerance) {
      throw Error(ErrorKind::CoincidentNodes,
                  "nodes " + std::to_string(e.from) + " and " + std::to_string(e.to) +
                      " coincide");
    }
  }
}

}  // namespace detail

/// Stacked distances 1/2||p_i - p_j||^2 over E_u, then local bearings
/// R_i^T (p_j - p_i)/||p_j - p_i|| over E.
inline VecX rigidity_function(const Framework& fw) {
  detail::check_separation(fw);
  VecX gamma(fw.row_count());
  Eigen::Index row = 0;
  for (const auto& e : fw.undirected_edges()) {
    gamma(row++) = 0.5 * (fw.pose(e.from).position - fw.pose(e.to).position).squaredNorm();
  }
  for (const auto& e : fw.directed_edges()) {
    const Vec3 d = fw.pose(e.to).position - fw.pose(e.from).position;
    gamma.segment<3>(row) = fw.pose(e.from).rotation.transpose() * (d / d.norm());
    row += 3;
  }
  return gamma;
}

/// Rigidity matrix only, without the rank computation.
inline MatX rigidity_jacobian(const Framework& fw) {
  detail::check_separation(fw);
  MatX r = MatX::Zero(fw.row_count(), fw.col_count());
  Eigen::Index row = 0;
  for (const auto& e : fw.undirected_edges()) {
    const Vec3 diff = fw.pose(e.from).position - fw.pose(e.to).position;
    r.block<1, 3>(row, 6 * e.from) = diff.transpose();
    r.block<1, 3>(row, 6 * e.to) = -diff.transpose();
    ++row;
  }
  for (const auto& e : fw.directed_edges()) {
    const Mat3& ri = fw.pose(e.from).rotation;
    const Vec3 d = fw.pose(e.to).position - fw.pose(e.from).position;
    const double dist = d.norm();
    const Vec3 bearing = ri.transpose() * (d / dist);
    const Mat3 dp = linalg::proj_complement(bearing) * ri.transpose() / dist;
    r.block<3, 3>(row, 6 * e.from) = -dp;
    r.block<3, 3>(row, 6 * e.from + 3) = linalg::skew(bearing) * ri.transpose();
    r.block<3, 3>(row, 6 * e.to) = dp;
    row += 3;
  }
  return r;
}

/// Rigidity function, matrix, SVD rank and degeneracy flag (rank < 6N - 6).
inline RigidityEvaluation rigidity_matrix(const Framework& fw) {
  RigidityEvaluation out;
  out.gamma = rigidity_function(fw);
  out.matrix = rigidity_jacobian(fw);
  out.rank = linalg::numerical_rank(out.matrix, kRankTolerance);
  out.degenerate = out.rank < 6 * fw.size() - 6;
  return out;
}

/// Time derivative of the rigidity matrix along the flow dp_i/dt = v_i[0:3],
/// dR_i/dt = S(v_i[3:6]) R_i.
inline MatX rigidity_matrix_rate(const Framework& fw, const VecX& v) {
  if (v.size() != fw.col_count()) {
    throw Error(ErrorKind::DimensionMismatch, "rigidity_matrix_rate: twist stack has wrong size");
  }
  if (!v.allFinite()) throw Error(ErrorKind::InvalidArgument, "rigidity_matrix_rate: v not finite");
  detail::check_separation(fw);
  MatX rd = MatX::Zero(fw.row_count(), fw.col_count());
  Eigen::Index row = 0;
  for (const auto& e : fw.undirected_edges()) {
    const Vec3 rate = v.segment<3>(6 * e.from) - v.segment<3>(6 * e.to);
    rd.block<1, 3>(row, 6 * e.from) = rate.transpose();
    rd.block<1, 3>(row, 6 * e.to) = -rate.transpose();
    ++row;
  }
  for (const auto& e : fw.directed_edges()) {
    const Mat3& ri = fw.pose(e.from).rotation;
    const Vec3 omega_i = v.segment<3>(6 * e.from + 3);
    const Vec3 d = fw.pose(e.to).position - fw.pose(e.from).position;
    const Vec3 d_rate = v.segment<3>(6 * e.to) - v.segment<3>(6 * e.from);
    const double dist = d.norm();
    const Vec3 u = d / dist;
    const Mat3 pu = linalg::proj_complement(u);
    const Vec3 u_rate = pu * d_rate / dist;
    const double dist_rate = u.dot(d_rate);
    const Mat3 rit = ri.transpose();
    const Mat3 rit_rate = -rit * linalg::skew(omega_i);
    // position block: R_i^T P_r(u) / |d|
    const Mat3 pu_rate = -(u_rate * u.transpose() + u * u_rate.transpose());
    const Mat3 dp_rate =
        (rit_rate * pu + rit * pu_rate) / dist - rit * pu * dist_rate / (dist * dist);
    // rotation block: R_i^T S(u)
    const Mat3 dr_rate = rit_rate * linalg::skew(u) + rit * linalg::skew(u_rate);
    rd.block<3, 3>(row, 6 * e.from) = -dp_rate;
    rd.block<3, 3>(row, 6 * e.from + 3) = dr_rate;
    rd.block<3, 3>(row, 6 * e.to) = dp_rate;
    row += 3;
  }
  return rd;
}

/// Common translations (columns 0-2) and coordinated rotations (columns 3-5)
/// of all nodes.
inline MatX trivial_motion_basis(const Framework& fw) {
  MatX basis = MatX::Zero(fw.col_count(), 6);
  for (int i = 0; i < fw.size(); ++i) {
    for (int h = 0; h < 3; ++h) {
      const Vec3 axis = Vec3::Unit(h);
      basis(6 * i + h, h) = 1.0;
      basis.block<3, 1>(6 * i, 3 + h) = axis.cross(fw.pose(i).position);
      basis.block<3, 1>(6 * i + 3, 3 + h) = axis;
    }
  }
  return basis;
}

/// Columns regrouped as [all p blocks | all R blocks].
inline MatX permute_position_rotation(const MatX& r) {
  const Eigen::Index n = r.cols() / 6;
  MatX out(r.rows(), r.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    out.middleCols(3 * i, 3) = r.middleCols(6 * i, 3);
    out.middleCols(3 * n + 3 * i, 3) = r.middleCols(6 * i + 3, 3);
  }
  return out;
}

/// Infinitesimal rigidity: rank 6N - 6 and nullspace equal to the trivial
/// motions. N = 2 and rank-deficient (e.g. collinear) placements are rejected.
inline RigidityVerdict is_infinitesimally_rigid(const Framework& fw) {
  if (fw.size() == 2) {
    throw Error(ErrorKind::DegenerateConfiguration, "degenerate framework (N=2)");
  }
  const RigidityEvaluation eval = rigidity_matrix(fw);
  if (eval.degenerate) {
    throw Error(ErrorKind::DegenerateConfiguration,
                "degenerate framework: rank " + std::to_string(eval.rank) + " < " +
                    std::to_string(6 * fw.size() - 6));
  }
  const auto null = linalg::nullspace_basis(eval.matrix, kRankTolerance);
  const auto trivial = linalg::column_space_basis(trivial_motion_basis(fw), kRankTolerance);
  return {eval.rank == 6 * fw.size() - 6 && linalg::subspaces_equal(null, trivial), eval.rank};
}

/// Rigidity matrix of agents plus object, rows arranged as
///   [ R_G   0    ]
///   [ R_O1  R_O2 ]
/// where the bottom block holds every row incident to the object.
struct ExtendedRigidity {
  MatX matrix;            ///< 7(N+1)N/2 x (6N+6)
  MatX agents;            ///< R_G, 7N(N-1)/2 x 6N
  MatX object_agents;     ///< R_O1, 7N x 6N
  MatX object_object;     ///< R_O2, 7N x 6
};

/// Row order mapping the lexicographic (N+1)-node rigidity matrix (object as
/// last node) onto the agents-first arrangement above. Entry k is the source
/// row of destination row k.
inline std::vector<Eigen::Index> extended_row_order(int agents) {
  const int n = agents + 1;
  const int object = agents;
  std::vector<Eigen::Index> top_dist, top_bear, obj_dist;
  std::vector<Eigen::Index> obj_bear_to(agents), obj_bear_from(agents);
  Eigen::Index row = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      if (j == object) obj_dist.push_back(row);
      else top_dist.push_back(row);
      ++row;
    }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      if (j == object) obj_bear_to[i] = row;
      else if (i == object) obj_bear_from[j] = row;
      else top_bear.push_back(row);
      row += 3;
    }
  std::vector<Eigen::Index> order;
  order.insert(order.end(), top_dist.begin(), top_dist.end());
  for (Eigen::Index r : top_bear)
    for (int k = 0; k < 3; ++k) order.push_back(r + k);
  order.insert(order.end(), obj_dist.begin(), obj_dist.end());
  for (int i = 0; i < agents; ++i) {
    for (int k = 0; k < 3; ++k) order.push_back(obj_bear_to[i] + k);
    for (int k = 0; k < 3; ++k) order.push_back(obj_bear_from[i] + k);
  }
  return order;
}

inline Framework with_object(const Framework& agents, const PoseSE3& object) {
  std::vector<PoseSE3> poses = agents.poses();
  poses.push_back(object);
  return Framework(std::move(poses));
}

namespace detail {

inline MatX reorder_rows(const MatX& m, const std::vector<Eigen::Index>& order) {
  MatX out(m.rows(), m.cols());
  for (std::size_t k = 0; k < order.size(); ++k) out.row(static_cast<Eigen::Index>(k)) = m.row(order[k]);
  return out;
}

inline ExtendedRigidity split_extended(MatX full, int agents) {
  const Eigen::Index top = 7 * static_cast<Eigen::Index>(agents) * (agents - 1) / 2;
  ExtendedRigidity out;
  out.agents = full.topLeftCorner(top, 6 * agents);
  out.object_agents = full.bottomLeftCorner(7 * agents, 6 * agents);
  out.object_object = full.bottomRightCorner(7 * agents, 6);
  out.matrix = std::move(full);
  return out;
}

}  // namespace detail

inline ExtendedRigidity extended_rigidity_matrix(const Framework& agents, const PoseSE3& object) {
  const Framework ext = with_object(agents, object);
  return detail::split_extended(
      detail::reorder_rows(rigidity_jacobian(ext), extended_row_order(agents.size())),
      agents.size());
}

/// Rate of the extended matrix for the stacked twist [v; v_O].
inline MatX extended_rigidity_matrix_rate(const Framework& agents, const PoseSE3& object,
                                          const VecX& v_bar) {
  const Framework ext = with_object(agents, object);
  return detail::reorder_rows(rigidity_matrix_rate(ext, v_bar),
                              extended_row_order(agents.size()));
}

}  // namespace rigidgrasp::rigidity
