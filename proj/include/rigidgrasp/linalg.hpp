#pragma once

// Small dense linear algebra used throughout the library: skew maps,
// SVD-based pseudoinverse / nullspace / row-space bases, subspace comparison
// via principal angles, and rotation utilities (Rodrigues exponential,
// Z-Y-X Euler angles, SO(3) inverse differential of exp).

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "rigidgrasp/errors.hpp"
#include "rigidgrasp/types.hpp"

namespace rigidgrasp::linalg {

inline constexpr double kDefaultPinvTolerance = 1e-10;
inline constexpr double kDefaultSubspaceAngleTolerance = 1e-7;

/// Orthonormal columns spanning a subspace of R^n, with the relative
/// singular-value cutoff that was used to build them.
struct SubspaceBasis {
  MatX columns;
  double tolerance = kDefaultPinvTolerance;

  Eigen::Index dimension() const { return columns.cols(); }
  Eigen::Index ambient_dimension() const { return columns.rows(); }
};

/// S(a) with S(a) b = a x b.
inline Mat3 skew(const Vec3& a) {
  Mat3 s;
  s << 0.0, -a.z(), a.y(),
       a.z(), 0.0, -a.x(),
       -a.y(), a.x(), 0.0;
  return s;
}

/// Inverse of skew(). Rejects matrices with ||M + M^T||_F above `tol`.
inline Vec3 unskew(const Mat3& m, double tol = 1e-8) {
  if ((m + m.transpose()).norm() > tol) {
    throw Error(ErrorKind::NotAntisymmetric, "unskew: matrix is not antisymmetric");
  }
  // Average the two mirrored entries so tiny asymmetry does not bias the result.
  return Vec3(0.5 * (m(2, 1) - m(1, 2)), 0.5 * (m(0, 2) - m(2, 0)),
              0.5 * (m(1, 0) - m(0, 1)));
}

/// I - x x^T / ||x||^2: projector onto the orthogonal complement of x.
inline MatX proj_complement(const VecX& x) {
  const double sq = x.squaredNorm();
  if (!(std::sqrt(sq) > 1e-12)) {
    throw Error(ErrorKind::ZeroVector, "proj_complement: vector norm below 1e-12");
  }
  return MatX::Identity(x.size(), x.size()) - x * x.transpose() / sq;
}

inline Mat3 proj_complement(const Vec3& x) {
  const double sq = x.squaredNorm();
  if (!(std::sqrt(sq) > 1e-12)) {
    throw Error(ErrorKind::ZeroVector, "proj_complement: vector norm below 1e-12");
  }
  return Mat3::Identity() - x * x.transpose() / sq;
}

namespace detail {

inline Eigen::JacobiSVD<MatX> thin_svd(const MatX& a) {
  return Eigen::JacobiSVD<MatX>(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
}

inline Eigen::JacobiSVD<MatX> full_v_svd(const MatX& a) {
  return Eigen::JacobiSVD<MatX>(a, Eigen::ComputeThinU | Eigen::ComputeFullV);
}

inline Eigen::Index count_above(const VecX& sigma, double tol) {
  if (sigma.size() == 0 || sigma(0) <= 0.0) return 0;
  const double cutoff = tol * sigma(0);
  Eigen::Index r = 0;
  while (r < sigma.size() && sigma(r) > cutoff) ++r;
  return r;
}

}  // namespace detail

/// Number of singular values above tol * sigma_max.
inline Eigen::Index numerical_rank(const MatX& a, double tol = kDefaultPinvTolerance) {
  if (a.size() == 0) return 0;
  return detail::count_above(
      Eigen::JacobiSVD<MatX>(a).singularValues(), tol);
}

/// Moore-Penrose pseudoinverse; singular values below tol * sigma_max are
/// treated as zero.
inline MatX pinv(const MatX& a, double tol = kDefaultPinvTolerance) {
  if (a.size() == 0) return MatX::Zero(a.cols(), a.rows());
  const auto svd = detail::thin_svd(a);
  const VecX& sigma = svd.singularValues();
  const Eigen::Index r = detail::count_above(sigma, tol);
  if (r == 0) return MatX::Zero(a.cols(), a.rows());
  const VecX inv = sigma.head(r).cwiseInverse();
  return svd.matrixV().leftCols(r) * inv.asDiagonal() *
         svd.matrixU().leftCols(r).transpose();
}

/// Orthonormal basis of null(A); column count is cols(A) - rank(A).
inline SubspaceBasis nullspace_basis(const MatX& a, double tol = kDefaultPinvTolerance) {
  const auto svd = detail::full_v_svd(a);
  const Eigen::Index r = detail::count_above(svd.singularValues(), tol);
  return {svd.matrixV().rightCols(a.cols() - r), tol};
}

/// Orthonormal basis of range(A^T), the row space of A.
inline SubspaceBasis row_space_basis(const MatX& a, double tol = kDefaultPinvTolerance) {
  const auto svd = detail::thin_svd(a);
  const Eigen::Index r = detail::count_above(svd.singularValues(), tol);
  return {svd.matrixV().leftCols(r), tol};
}

/// Orthonormal basis of range(A), the column space of A.
inline SubspaceBasis column_space_basis(const MatX& a, double tol = kDefaultPinvTolerance) {
  const auto svd = detail::thin_svd(a);
  const Eigen::Index r = detail::count_above(svd.singularValues(), tol);
  return {svd.matrixU().leftCols(r), tol};
}

/// Largest principal angle (rad) between two subspaces of equal dimension.
/// Computed through its sine, ||(I - U U^T) V||_2, which stays accurate for
/// nearly coincident subspaces where acos of the cosines would not.
inline double max_principal_angle(const SubspaceBasis& u, const SubspaceBasis& v) {
  if (u.ambient_dimension() != v.ambient_dimension()) {
    throw Error(ErrorKind::DimensionMismatch,
                "max_principal_angle: subspaces live in different ambient spaces");
  }
  if (u.dimension() != v.dimension()) {
    throw Error(ErrorKind::DimensionMismatch,
                "max_principal_angle: subspaces have different dimensions");
  }
  if (v.dimension() == 0) return 0.0;
  const MatX residual = v.columns - u.columns * (u.columns.transpose() * v.columns);
  const double s = Eigen::JacobiSVD<MatX>(residual).singularValues()(0);
  return std::asin(std::clamp(s, 0.0, 1.0));
}

/// True iff dim U = dim V and the largest principal angle is below `tol` rad.
inline bool subspaces_equal(const SubspaceBasis& u, const SubspaceBasis& v,
                            double tol = kDefaultSubspaceAngleTolerance) {
  if (u.ambient_dimension() != v.ambient_dimension()) {
    throw Error(ErrorKind::DimensionMismatch,
                "subspaces_equal: subspaces live in different ambient spaces");
  }
  if (u.dimension() != v.dimension()) return false;
  return max_principal_angle(u, v) < tol;
}

/// ||a - b|| / max(||a||, ||b||); zero when both vectors vanish.
inline double relative_difference(const VecX& a, const VecX& b) {
  const double scale = std::max(a.norm(), b.norm());
  if (scale == 0.0) return 0.0;
  return (a - b).norm() / scale;
}

// --- rotations --------------------------------------------------------------

inline bool is_rotation(const Mat3& r, double tol = 1e-9) {
  return (r.transpose() * r - Mat3::Identity()).norm() < tol && r.determinant() > 0.0;
}

/// Closest rotation in the Frobenius sense (polar factor).
inline Mat3 orthonormalize(const Mat3& r) {
  Eigen::JacobiSVD<Mat3> svd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 u = svd.matrixU();
  const Mat3& v = svd.matrixV();
  if ((u * v.transpose()).determinant() < 0.0) u.col(2) *= -1.0;
  return u * v.transpose();
}

/// exp(S(omega * dt)) by the Rodrigues formula.
inline Mat3 rot_exp(const Vec3& omega, double dt = 1.0) {
  if (dt < 0.0) throw Error(ErrorKind::InvalidArgument, "rot_exp: dt must be >= 0");
  const Vec3 theta = omega * dt;
  const double angle = theta.norm();
  if (angle < 1e-10) return Mat3::Identity();
  const Mat3 k = skew(theta / angle);
  return Mat3::Identity() + std::sin(angle) * k + (1.0 - std::cos(angle)) * k * k;
}

/// Rotation angle-axis vector of R (inverse of rot_exp for angles below pi).
inline Vec3 rot_log(const Mat3& r) {
  const Eigen::AngleAxisd aa(r);
  return aa.angle() * aa.axis();
}

inline Mat3 rot_x(double a) { return Eigen::AngleAxisd(a, Vec3::UnitX()).toRotationMatrix(); }
inline Mat3 rot_y(double a) { return Eigen::AngleAxisd(a, Vec3::UnitY()).toRotationMatrix(); }
inline Mat3 rot_z(double a) { return Eigen::AngleAxisd(a, Vec3::UnitZ()).toRotationMatrix(); }

/// Z-Y-X intrinsic Euler angles (roll, pitch, yaw): R = Rz(yaw) Ry(pitch) Rx(roll).
inline Mat3 euler_to_rot(const Vec3& eta) {
  return rot_z(eta.z()) * rot_y(eta.y()) * rot_x(eta.x());
}

/// Inverse of the left-trivialized differential of exp on so(3), applied to
/// omega: if R(t) = exp(S(theta(t))) R0 and dR/dt = S(omega) R, then
/// dtheta/dt = dexp_inv(theta) omega.
inline Vec3 so3_dexp_inv(const Vec3& theta, const Vec3& omega) {
  const double a = theta.norm();
  const Vec3 c1 = theta.cross(omega);
  const Vec3 c2 = theta.cross(c1);
  double coeff;
  if (a < 1e-4) {
    // 1/12 + a^2/720 + O(a^4)
    coeff = 1.0 / 12.0 + a * a / 720.0;
  } else {
    const double half = 0.5 * a;
    coeff = (1.0 - half * std::cos(half) / std::sin(half)) / (a * a);
  }
  return omega - 0.5 * c1 + coeff * c2;
}

// --- symmetric positive definite helpers --------------------------------------

inline double min_eigenvalue(const MatX& m) {
  Eigen::SelfAdjointEigenSolver<MatX> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

inline bool is_symmetric(const MatX& m, double rel_tol = 1e-9) {
  return m.rows() == m.cols() &&
         (m - m.transpose()).norm() <= rel_tol * std::max(1.0, m.norm());
}

/// Symmetric and strictly positive definite (Cholesky succeeds and the
/// smallest eigenvalue is positive).
inline bool is_spd(const MatX& m) {
  if (!is_symmetric(m)) return false;
  Eigen::LLT<MatX> llt(m);
  if (llt.info() != Eigen::Success) return false;
  return min_eigenvalue(m) > 0.0;
}

/// Principal square root and inverse square root of an SPD matrix.
struct SpdRoots {
  MatX sqrt;
  MatX inv_sqrt;
};

inline SpdRoots spd_roots(const MatX& m) {
  Eigen::SelfAdjointEigenSolver<MatX> es(0.5 * (m + m.transpose()));
  const VecX& lambda = es.eigenvalues();
  if (!(lambda.size() > 0 && lambda(0) > 0.0)) {
    throw Error(ErrorKind::NonSPD, "spd_roots: matrix is not positive definite");
  }
  const MatX& q = es.eigenvectors();
  return {q * lambda.cwiseSqrt().asDiagonal() * q.transpose(),
          q * lambda.cwiseSqrt().cwiseInverse().asDiagonal() * q.transpose()};
}

}  // namespace rigidgrasp::linalg
