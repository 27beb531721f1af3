#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "support.hpp"

namespace rg = rigidgrasp;
using rg::Mat3;
using rg::MatX;
using rg::Vec3;
using rg::VecX;
using namespace rg::linalg;

TEST(Skew, ZAxisGenerator) {
  Mat3 expected;
  expected << 0, -1, 0, 1, 0, 0, 0, 0, 0;
  EXPECT_EQ(skew(Vec3::UnitZ()), expected);
  EXPECT_TRUE((skew(Vec3::UnitZ()) * Vec3::UnitX()).isApprox(Vec3::UnitY()));
}

TEST(Skew, ZeroVector) { EXPECT_EQ(skew(Vec3::Zero()), Mat3::Zero()); }

TEST(Skew, MatchesCrossProduct) {
  Mat3 expected;
  expected << 0, -3, 2, 3, 0, -1, -2, 1, 0;
  const Vec3 a(1, 2, 3);
  EXPECT_EQ(skew(a), expected);
  auto rng = rg::testing::rng(7);
  for (int k = 0; k < 10; ++k) {
    const Vec3 b = rg::verify::gaussian(rng, 3);
    EXPECT_LT((skew(a) * b - a.cross(b)).norm(), 1e-12);
  }
  EXPECT_EQ(skew(a).transpose(), -skew(a));
}

TEST(Unskew, Examples) {
  EXPECT_EQ(unskew(Mat3::Zero()), Vec3::Zero());
  EXPECT_EQ(unskew(skew(Vec3(1, 2, 3))), Vec3(1, 2, 3));
  Mat3 m;
  m << 0, -3, 2, 3, 0, -1, -2, 1, 0;
  EXPECT_EQ(unskew(m), Vec3(1, 2, 3));
}

TEST(Unskew, RejectsSymmetricPart) {
  Mat3 m = skew(Vec3(1, 2, 3));
  m(0, 0) = 1e-3;
  try {
    unskew(m);
    FAIL();
  } catch (const rg::Error& e) {
    EXPECT_EQ(e.kind(), rg::ErrorKind::NotAntisymmetric);
  }
}

TEST(ProjComplement, Examples) {
  EXPECT_TRUE(proj_complement(Vec3(1, 0, 0)).isApprox(Vec3(0, 1, 1).asDiagonal().toDenseMatrix()));
  EXPECT_TRUE(proj_complement(Vec3(0, 2, 0)).isApprox(Vec3(1, 0, 1).asDiagonal().toDenseMatrix()));
  Mat3 expected;
  expected << 0.5, -0.5, 0, -0.5, 0.5, 0, 0, 0, 1;
  EXPECT_LT((proj_complement(Vec3(Vec3(1, 1, 0) / std::sqrt(2.0))) - expected).norm(), 1e-15);
}

TEST(ProjComplement, AnnihilatesAndIsIdempotent) {
  auto rng = rg::testing::rng(3);
  for (int k = 0; k < 20; ++k) {
    const VecX x = rg::verify::gaussian(rng, 5);
    const MatX p = proj_complement(x);
    EXPECT_LT((p * x).norm(), 1e-12);
    EXPECT_LT((p * p - p).norm(), 1e-12);
  }
}

TEST(ProjComplement, ZeroVectorRejected) {
  EXPECT_THROW(proj_complement(Vec3(1e-13, 0, 0)), rg::Error);
  EXPECT_THROW(proj_complement(VecX(VecX::Zero(4))), rg::Error);
}

namespace {

void expect_penrose(const MatX& a, const MatX& x) {
  const double scale = std::max(1.0, a.norm() * x.norm());
  EXPECT_LT((a * x * a - a).norm() / std::max(1.0, a.norm()), 1e-8 * scale);
  EXPECT_LT((x * a * x - x).norm() / std::max(1.0, x.norm()), 1e-8 * scale);
  EXPECT_LT(((a * x).transpose() - a * x).norm(), 1e-8 * scale);
  EXPECT_LT(((x * a).transpose() - x * a).norm(), 1e-8 * scale);
}

}  // namespace

TEST(Pinv, DiagonalAndIdentity) {
  MatX d = MatX::Zero(2, 2);
  d(0, 0) = 2.0;
  MatX expected = MatX::Zero(2, 2);
  expected(0, 0) = 0.5;
  EXPECT_TRUE(pinv(d).isApprox(expected));
  EXPECT_TRUE(pinv(MatX::Identity(6, 6)).isApprox(MatX::Identity(6, 6)));
}

TEST(Pinv, FullRowRankRightInverse) {
  auto rng = rg::testing::rng(11);
  const MatX a = rg::verify::gaussian_matrix(rng, 6, 24);
  EXPECT_LT((a * pinv(a) - MatX::Identity(6, 6)).norm(), 1e-9);
}

TEST(Pinv, PenroseIdentitiesOnRandomMatrices) {
  auto rng = rg::testing::rng(12);
  for (int rows : {1, 5, 17, 42}) {
    for (int cols : {3, 24, 42}) {
      const MatX full = rg::verify::gaussian_matrix(rng, rows, cols);
      expect_penrose(full, pinv(full));
      // rank-deficient product
      const int r = std::max(1, std::min(rows, cols) / 2);
      const MatX low = rg::verify::gaussian_matrix(rng, rows, r) * rg::verify::gaussian_matrix(rng, r, cols);
      expect_penrose(low, pinv(low));
      EXPECT_EQ(numerical_rank(low), r);
    }
  }
}

TEST(Pinv, TransposeFormForFullRowRank) {
  auto rng = rg::testing::rng(13);
  for (int k = 0; k < 5; ++k) {
    const MatX h = rg::verify::gaussian_matrix(rng, 6, 18);
    const MatX lhs = pinv(h);
    const MatX rhs = h.transpose() * pinv(h * h.transpose());
    EXPECT_LT((lhs - rhs).norm() / lhs.norm(), 1e-8);
  }
}

TEST(NullspaceBasis, Examples) {
  const auto z = nullspace_basis(MatX::Zero(3, 3));
  EXPECT_EQ(z.dimension(), 3);
  EXPECT_LT((z.columns.transpose() * z.columns - MatX::Identity(3, 3)).norm(), 1e-12);

  MatX row(1, 2);
  row << 1, 1;
  const auto n = nullspace_basis(row);
  ASSERT_EQ(n.dimension(), 1);
  EXPECT_NEAR(std::abs(n.columns(0, 0)), 1.0 / std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(n.columns(0, 0), -n.columns(1, 0), 1e-12);

  const MatX g = rg::grasp::grasp_matrix(rg::testing::canonical3());
  EXPECT_EQ(nullspace_basis(g).dimension(), 12);
}

TEST(NullspaceBasis, RankNullityAndOrthonormality) {
  auto rng = rg::testing::rng(14);
  for (int k = 0; k < 10; ++k) {
    const MatX a = rg::verify::gaussian_matrix(rng, 7, 3) * rg::verify::gaussian_matrix(rng, 3, 12);
    const auto null = nullspace_basis(a);
    const auto row = row_space_basis(a);
    EXPECT_EQ(null.dimension() + row.dimension(), a.cols());
    EXPECT_LT((a * null.columns).norm(), 1e-10 * a.norm());
    EXPECT_LT((null.columns.transpose() * null.columns - MatX::Identity(9, 9)).norm(), 1e-9);
    EXPECT_LT((null.columns.transpose() * row.columns).norm(), 1e-9);
  }
}

TEST(SubspacesEqual, Examples) {
  const SubspaceBasis e1{VecX::Unit(3, 0), 1e-10};
  const SubspaceBasis e2{VecX::Unit(3, 1), 1e-10};
  EXPECT_TRUE(subspaces_equal(e1, e1));
  EXPECT_FALSE(subspaces_equal(e1, e2));
  EXPECT_NEAR(max_principal_angle(e1, e2), std::numbers::pi / 2, 1e-12);

  const auto gc = rg::testing::canonical3();
  const auto r = rg::rigidity::rigidity_jacobian(gc.framework());
  EXPECT_TRUE(subspaces_equal(row_space_basis(r), nullspace_basis(rg::grasp::grasp_matrix(gc))));
}

TEST(SubspacesEqual, DifferentDimensionsAreUnequal) {
  const SubspaceBasis plane{MatX::Identity(3, 2), 1e-10};
  const SubspaceBasis line{VecX::Unit(3, 0), 1e-10};
  EXPECT_FALSE(subspaces_equal(plane, line));
}

TEST(SubspacesEqual, AmbientMismatchThrows) {
  const SubspaceBasis a{VecX::Unit(3, 0), 1e-10};
  const SubspaceBasis b{VecX::Unit(4, 0), 1e-10};
  try {
    subspaces_equal(a, b);
    FAIL();
  } catch (const rg::Error& e) {
    EXPECT_EQ(e.kind(), rg::ErrorKind::DimensionMismatch);
  }
}

TEST(RotExp, Examples) {
  const Mat3 r = rot_exp(Vec3(0, 0, std::numbers::pi / 2), 1.0);
  EXPECT_LT((r * Vec3::UnitX() - Vec3::UnitY()).norm(), 1e-15);
  EXPECT_EQ(rot_exp(Vec3::Zero(), 1.0), Mat3::Identity());
  EXPECT_LT((rot_exp(Vec3(1, 1, 1) / std::sqrt(3.0), 2 * std::numbers::pi) - Mat3::Identity()).norm(), 1e-9);
  EXPECT_THROW(rot_exp(Vec3::UnitX(), -1.0), rg::Error);
}

TEST(RotExp, StaysOrthonormalAndInvertsLog) {
  auto rng = rg::testing::rng(15);
  for (int k = 0; k < 50; ++k) {
    const Vec3 w = rg::verify::gaussian(rng, 3);
    const Mat3 r = orthonormalize(rot_exp(w, 0.7));
    EXPECT_LT((r.transpose() * r - Mat3::Identity()).norm(), 1e-12);
    EXPECT_TRUE(is_rotation(r));
    if ((0.7 * w).norm() < 3.0) {
      EXPECT_LT((rot_log(r) - 0.7 * w).norm(), 1e-9);
    }
  }
}

TEST(EulerToRot, Examples) {
  EXPECT_TRUE(euler_to_rot(Vec3::Zero()).isApprox(Mat3::Identity()));
  EXPECT_LT((euler_to_rot(Vec3(0, 0, std::numbers::pi / 2)) * Vec3::UnitX() - Vec3::UnitY()).norm(), 1e-15);
  const Mat3 expected = Eigen::AngleAxisd(0.3, Vec3::UnitZ()).toRotationMatrix() *
                        Eigen::AngleAxisd(0.2, Vec3::UnitY()).toRotationMatrix() *
                        Eigen::AngleAxisd(0.1, Vec3::UnitX()).toRotationMatrix();
  EXPECT_LT((euler_to_rot(Vec3(0.1, 0.2, 0.3)) - expected).norm(), 1e-15);
}

TEST(So3DexpInv, MatchesFiniteDifferenceOfExponentialCurve) {
  // If theta' = dexp_inv(theta) omega then d/dt exp(S(theta)) = S(omega) exp(S(theta)).
  auto rng = rg::testing::rng(16);
  for (double scale : {1e-6, 1e-3, 0.5, 2.0}) {
    const Vec3 theta = scale * rg::verify::gaussian(rng, 3).normalized();
    const Vec3 omega = rg::verify::gaussian(rng, 3);
    const Vec3 rate = so3_dexp_inv(theta, omega);
    const double h = 1e-6;
    const Mat3 fd = (rot_exp(theta + h * rate) - rot_exp(theta - h * rate)) / (2 * h);
    const Mat3 expected = skew(omega) * rot_exp(theta);
    EXPECT_LT((fd - expected).norm(), 1e-7) << "scale " << scale;
  }
}

TEST(SpdRoots, SquareAndInverse) {
  auto rng = rg::testing::rng(17);
  const MatX a = rg::verify::gaussian_matrix(rng, 6, 6);
  const MatX m = a * a.transpose() + MatX::Identity(6, 6);
  const auto r = spd_roots(m);
  EXPECT_LT((r.sqrt * r.sqrt - m).norm(), 1e-10 * m.norm());
  EXPECT_LT((r.sqrt * r.inv_sqrt - MatX::Identity(6, 6)).norm(), 1e-10);
  EXPECT_TRUE(is_spd(m));
  EXPECT_FALSE(is_spd(-m));
  EXPECT_THROW(spd_roots(-m), rg::Error);
}
