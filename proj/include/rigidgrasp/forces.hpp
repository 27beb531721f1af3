#pragma once

// Interaction and internal forces of the rigidly grasped system.
//
// Two independent routes are provided for the agent wrenches h:
//   * Gauss's principle on the (N+1)-node complete framework, where the
//     constraint forces are [-h; h_O] = -R^T (R M^-1 R^T)^+ (dR/dt v + R alpha),
//   * the closed form obtained by differentiating v = G^T v_O.
// Internal forces follow either from the agents-only framework or from
// projecting h with I - M G^T (G M G^T)^-1 G.

#include <cmath>
#include <map>
#include <string>

#include "rigidgrasp/dynamics.hpp"
#include "rigidgrasp/errors.hpp"
#include "rigidgrasp/grasp.hpp"
#include "rigidgrasp/linalg.hpp"
#include "rigidgrasp/rigidity.hpp"
#include "rigidgrasp/types.hpp"

namespace rigidgrasp::forces {

/// Relative cutoff for (R M^-1 R^T)^+, whose rank is deficient by construction.
inline constexpr double kGaussPinvTolerance = 1e-9;
/// Allowed ||R_bar v_bar|| / (1 + ||v_bar||) on entry to the Gauss route.
inline constexpr double kConstraintTolerance = 1e-6;

namespace detail {

struct PinvResult {
  MatX pinv;
  Eigen::Index rank;
};

inline PinvResult pinv_with_rank(const MatX& a, double tol) {
  const Eigen::JacobiSVD<MatX> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const VecX& sigma = svd.singularValues();
  const Eigen::Index r = linalg::detail::count_above(sigma, tol);
  if (r == 0) return {MatX::Zero(a.cols(), a.rows()), 0};
  return {svd.matrixV().leftCols(r) * sigma.head(r).cwiseInverse().asDiagonal() *
              svd.matrixU().leftCols(r).transpose(),
          r};
}

/// Square roots of a block-diagonal SPD matrix with 6x6 blocks.
inline linalg::SpdRoots block_roots(const MatX& m) {
  const Eigen::Index n = m.rows();
  linalg::SpdRoots out{MatX::Zero(n, n), MatX::Zero(n, n)};
  for (Eigen::Index k = 0; k < n; k += 6) {
    const auto r = linalg::spd_roots(m.block<6, 6>(k, k));
    out.sqrt.block<6, 6>(k, k) = r.sqrt;
    out.inv_sqrt.block<6, 6>(k, k) = r.inv_sqrt;
  }
  return out;
}

inline bool is_block_diagonal6(const MatX& m) {
  if (m.rows() % 6 != 0 || m.rows() != m.cols()) return false;
  for (Eigen::Index i = 0; i < m.rows(); i += 6)
    for (Eigen::Index j = 0; j < m.cols(); j += 6)
      if (i != j && m.block<6, 6>(i, j).cwiseAbs().maxCoeff() != 0.0) return false;
  return true;
}

inline linalg::SpdRoots roots(const MatX& m) {
  return is_block_diagonal6(m) ? block_roots(m) : linalg::spd_roots(m);
}

/// Both algebraic forms of the Gauss constraint force for constraint matrix r:
///   a) r^T (r M^-1 r^T)^+ b       b) M^1/2 (r M^-1/2)^+ b
struct GaussForms {
  VecX form_a;
  VecX form_b;
  Eigen::Index rank;
};

inline GaussForms gauss_forms(const MatX& r, const MatX& m, const VecX& b) {
  const Eigen::LLT<MatX> llt(m);
  if (llt.info() != Eigen::Success) throw Error(ErrorKind::NonSPD, "inertia is not positive definite");
  const MatX m_inv_rt = llt.solve(r.transpose());
  const auto pa = pinv_with_rank(r * m_inv_rt, kGaussPinvTolerance);
  const auto rt = roots(m);
  const auto pb = pinv_with_rank(r * rt.inv_sqrt, linalg::kDefaultPinvTolerance);
  return {r.transpose() * (pa.pinv * b), rt.sqrt * (pb.pinv * b), pb.rank};
}

}  // namespace detail

struct InteractionForces {
  VecX h;              ///< agent wrenches at the grasp points (form a)
  Wrench6 h_O;         ///< wrench on the object centre of mass (form a)
  VecX h_form_b;
  Wrench6 h_O_form_b;
  double form_agreement = 0.0;     ///< relative difference of forms a and b
  double grasp_consistency = 0.0;  ///< relative difference of h_O and G h
};

/// Agent and object wrenches by Gauss's principle on the agents + object
/// framework. The stacked twist must already satisfy the rigidity constraint.
inline InteractionForces interaction_forces_gauss(const dynamics::SystemSnapshot& s,
                                                  const VecX& u) {
  const auto fw = s.framework();
  const VecX v_bar = s.stacked_twist();
  const auto ext = rigidity::extended_rigidity_matrix(fw, s.grasp.object);
  const double violation = (ext.matrix * v_bar).norm() / (1.0 + v_bar.norm());
  if (violation > kConstraintTolerance) {
    throw Error(ErrorKind::ConstraintViolation,
                "stacked twist violates the rigidity constraint (" + std::to_string(violation) + ")");
  }
  const MatX r_rate = rigidity::extended_rigidity_matrix_rate(fw, s.grasp.object, v_bar);
  const auto alpha =
      dynamics::unconstrained_accelerations(s.agents, s.object, u, s.agent_twists, s.object_twist);
  const VecX b = r_rate * v_bar + ext.matrix * alpha.coupled;
  const auto forms = detail::gauss_forms(ext.matrix, s.stacked_inertia(), b);
  const int n = s.agent_count();
  if (forms.rank < 6 * n) {
    throw Error(ErrorKind::DegenerateConfiguration,
                "degenerate agents+object framework: rank " + std::to_string(forms.rank) + " < " +
                    std::to_string(6 * n));
  }
  InteractionForces out;
  // [-h; h_O] = -(form)
  out.h = forms.form_a.head(6 * n);
  out.h_O = -forms.form_a.tail<6>();
  out.h_form_b = forms.form_b.head(6 * n);
  out.h_O_form_b = -forms.form_b.tail<6>();
  out.form_agreement = linalg::relative_difference(forms.form_a, forms.form_b);
  out.grasp_consistency = linalg::relative_difference(out.h_O, s.G * out.h);
  return out;
}

struct InternalForces {
  VecX h_int;         ///< R^T (R M^-1 R^T)^+ (dR/dt v + R alpha_int)
  VecX h_int_form_b;  ///< M^1/2 (R M^-1/2)^+ (dR/dt v + R alpha_int)
  double form_agreement = 0.0;
  Eigen::Index rank = 0;
};

/// Internal forces for an explicit constraint matrix and its rate. Any matrix
/// with the same nullspace as the rigidity matrix gives the same result.
inline InternalForces internal_forces_from_constraints(const MatX& r, const MatX& r_rate,
                                                       const VecX& v,
                                                       const dynamics::StackedTerms& agents,
                                                       const VecX& u) {
  const Eigen::LLT<MatX> llt(agents.M);
  if (llt.info() != Eigen::Success) throw Error(ErrorKind::NonSPD, "agent inertia is not positive definite");
  const VecX alpha_int = llt.solve(u - agents.C * v - agents.g);
  const VecX b = r_rate * v + r * alpha_int;
  const auto forms = detail::gauss_forms(r, agents.M, b);
  return {forms.form_a, forms.form_b, linalg::relative_difference(forms.form_a, forms.form_b),
          forms.rank};
}

/// Internal forces from the agents-only complete framework. `v` must be a
/// rigid motion (in range(G^T)).
inline InternalForces internal_forces_gauss(const rigidity::Framework& fw, const VecX& v,
                                            const dynamics::StackedTerms& agents, const VecX& u) {
  auto out = internal_forces_from_constraints(rigidity::rigidity_jacobian(fw),
                                              rigidity::rigidity_matrix_rate(fw, v), v, agents, u);
  if (out.rank < 6 * fw.size() - 6) {
    throw Error(ErrorKind::DegenerateConfiguration,
                "degenerate agent framework: rank " + std::to_string(out.rank) + " < " +
                    std::to_string(6 * fw.size() - 6));
  }
  return out;
}

/// h = (M^-1 + G^T M_O^-1 G)^-1 [M^-1 (u - g - C v) - dG^T/dt v_O + G^T M_O^-1 (C_O v_O + g_O)].
inline VecX interaction_forces_closed(const dynamics::SystemSnapshot& s, const VecX& u) {
  const Eigen::LLT<MatX> llt(s.agents.M);
  const Eigen::LLT<Mat6> llt_o(s.object.M);
  if (llt.info() != Eigen::Success || llt_o.info() != Eigen::Success) {
    throw Error(ErrorKind::NonSPD, "interaction_forces_closed: inertia is not positive definite");
  }
  const Eigen::Index n = s.agents.M.rows();
  const MatX m_inv = llt.solve(MatX::Identity(n, n));
  const MatX lhs = m_inv + s.G.transpose() * llt_o.solve(s.G);
  const VecX rhs = llt.solve(u - s.agents.g - s.agents.C * s.agent_twists) -
                   s.G_rate.transpose() * s.object_twist +
                   s.G.transpose() * llt_o.solve(s.object.C * s.object_twist + s.object.g);
  const Eigen::LLT<MatX> llt_lhs(0.5 * (lhs + lhs.transpose()));
  if (llt_lhs.info() != Eigen::Success) {
    throw Error(ErrorKind::NonSPD, "interaction_forces_closed: M^-1 + G^T M_O^-1 G is not SPD");
  }
  return llt_lhs.solve(rhs);
}

/// I - M G^T (G M G^T)^-1 G.
inline MatX internal_projector(const MatX& m, const MatX& g) {
  if (!linalg::is_symmetric(m) || Eigen::LLT<MatX>(m).info() != Eigen::Success) {
    throw Error(ErrorKind::NonSPD, "internal_projector: inertia is not positive definite");
  }
  const MatX gstar = grasp::right_inverse(g, m, grasp::RightInverseKind::InertiaWeighted);
  return MatX::Identity(g.cols(), g.cols()) - gstar * g;
}

/// Internal part of the agent wrenches: (I - M G^T (G M G^T)^-1 G) h.
inline VecX internal_from_interaction(const MatX& m, const MatX& g, const VecX& h) {
  return internal_projector(m, g) * h;
}

struct ForceSplit {
  VecX motion;    ///< G* G h
  VecX internal;  ///< (I - G* G) h
};

inline ForceSplit force_decomposition(const MatX& gstar, const MatX& g, const VecX& h) {
  if ((g * gstar - Mat6::Identity()).norm() > 1e-9) {
    throw Error(ErrorKind::NotARightInverse, "force_decomposition: G G* != I");
  }
  ForceSplit split;
  split.motion = gstar * (g * h);
  split.internal = h - split.motion;
  return split;
}

/// ||M G^T (G M G^T)^-1 G + M^1/2 (R M^-1/2)^+ R M^-1 - I||_F / sqrt(6N).
/// Only meaningful for non-degenerate frameworks; degenerate ones are
/// rejected after the residual is computed so the message can carry it.
inline double projection_identity_residual(const MatX& m, const MatX& g, const MatX& r) {
  const Eigen::Index n = m.rows();
  const auto rt = detail::roots(m);
  const auto pb = detail::pinv_with_rank(r * rt.inv_sqrt, linalg::kDefaultPinvTolerance);
  const MatX gstar = grasp::right_inverse(g, m, grasp::RightInverseKind::InertiaWeighted);
  const MatX m_inv = Eigen::LLT<MatX>(m).solve(MatX::Identity(n, n));
  const MatX lhs = gstar * g + rt.sqrt * pb.pinv * r * m_inv;
  const double residual =
      (lhs - MatX::Identity(n, n)).norm() / std::sqrt(static_cast<double>(n));
  if (pb.rank < n - 6) {
    throw Error(ErrorKind::DegenerateConfiguration,
                "projection identity fails on a degenerate framework (residual " +
                    std::to_string(residual) + ")");
  }
  return residual;
}

struct InvarianceCheck {
  VecX h_int_original;
  VecX h_int_scaled;
  double deviation = 0.0;
};

/// Internal forces computed with R and with P R (rate P dR/dt for constant P).
inline InvarianceCheck rigidity_invariance_check(const rigidity::Framework& fw, const VecX& v,
                                                 const dynamics::StackedTerms& agents,
                                                 const VecX& u, const MatX& p) {
  const MatX r = rigidity::rigidity_jacobian(fw);
  if (p.rows() != r.rows() || p.cols() != r.rows()) {
    throw Error(ErrorKind::DimensionMismatch, "rigidity_invariance_check: P has wrong size");
  }
  const Eigen::FullPivLU<MatX> lu(p);
  if (!lu.isInvertible()) throw Error(ErrorKind::SingularScaling, "scaling matrix is singular");
  const MatX r_rate = rigidity::rigidity_matrix_rate(fw, v);
  InvarianceCheck out;
  out.h_int_original = internal_forces_from_constraints(r, r_rate, v, agents, u).h_int_form_b;
  out.h_int_scaled = internal_forces_from_constraints(p * r, p * r_rate, v, agents, u).h_int_form_b;
  out.deviation = linalg::relative_difference(out.h_int_original, out.h_int_scaled);
  return out;
}

/// Internal-force-free condition: dR/dt v + R M^-1 (u - C v - g) must lie in
/// null(R^T). Reports the component in range(R), which vanishes exactly then.
struct ForceFreeCondition {
  VecX constraint_term;
  double range_component = 0.0;  ///< ||projection onto range(R)||
};

inline ForceFreeCondition internal_force_free_condition(const rigidity::Framework& fw,
                                                        const VecX& v,
                                                        const dynamics::StackedTerms& agents,
                                                        const VecX& u) {
  const MatX r = rigidity::rigidity_jacobian(fw);
  const VecX alpha_int = Eigen::LLT<MatX>(agents.M).solve(u - agents.C * v - agents.g);
  ForceFreeCondition out;
  out.constraint_term = rigidity::rigidity_matrix_rate(fw, v) * v + r * alpha_int;
  const auto range = linalg::column_space_basis(r, rigidity::kRankTolerance);
  out.range_component = (range.columns.transpose() * out.constraint_term).norm();
  return out;
}

/// Interaction wrenches split into motion-inducing and internal parts with the
/// inertia-weighted right inverse.
struct ForceReport {
  VecX h;
  Wrench6 h_O;
  VecX h_m;
  VecX h_int;
  std::map<std::string, double> residuals;
};

inline ForceReport force_report(const dynamics::SystemSnapshot& s, const VecX& u) {
  ForceReport r;
  r.h = interaction_forces_closed(s, u);
  r.h_O = s.G * r.h;
  const MatX gstar = grasp::right_inverse(s.G, s.agents.M, grasp::RightInverseKind::InertiaWeighted);
  const auto split = force_decomposition(gstar, s.G, r.h);
  r.h_m = split.motion;
  r.h_int = split.internal;
  r.residuals["split_sum"] = (r.h - r.h_m - r.h_int).norm();
  r.residuals["grasp_h_int"] = (s.G * r.h_int).norm();
  return r;
}

}  // namespace rigidgrasp::forces
