#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"

namespace rg = rigidgrasp;
using rg::Mat3;
using rg::MatX;
using rg::Twist6;
using rg::Vec3;
using rg::VecX;
using namespace rg::sim;

namespace {

/// Wrenches that produce zero object acceleration: G u = C_c v_O + g_c.
VecX zero_acceleration_input(const rg::dynamics::SystemSnapshot& s) {
  const auto c = s.coupled();
  const MatX gs = rg::grasp::right_inverse(s.G, s.agents.M, rg::grasp::RightInverseKind::InertiaWeighted);
  return gs * (c.C * s.object_twist + c.g);
}

Scenario short_paper(double duration, rg::grasp::RightInverseKind kind = rg::grasp::RightInverseKind::InertiaWeighted) {
  auto sc = Scenario::paper(kind);
  sc.duration = duration;
  return sc;
}

}  // namespace

TEST(Step, GravityCompensationHoldsStill) {
  const auto sc = Scenario::paper();
  CoupledState s = sc.initial;
  const auto hold = [](const rg::dynamics::SystemSnapshot& snap, double) { return zero_acceleration_input(snap); };
  for (int k = 0; k < 100; ++k) {
    const auto next = step(sc.plant, s, hold, 1e-3);
    EXPECT_LT((next.pose.position - s.pose.position).norm(), 1e-10);
    EXPECT_LT((next.pose.rotation - s.pose.rotation).norm(), 1e-10);
    EXPECT_LT(next.twist.norm(), 1e-10);
    s = next;
  }
}

TEST(Step, ConstantTwistMatchesExactFlow) {
  const auto sc = Scenario::paper();
  CoupledState s = sc.initial;
  s.twist << 0.1, -0.05, 0.02, 0.3, -0.2, 0.5;
  const CoupledState start = s;
  const auto coast = [](const rg::dynamics::SystemSnapshot& snap, double) { return zero_acceleration_input(snap); };
  const double dt = 1e-3;
  const int steps = 5000;
  for (int k = 0; k < steps; ++k) s = step(sc.plant, s, coast, dt);
  const double t = steps * dt;
  EXPECT_NEAR(s.t, t, 1e-9);
  EXPECT_LT((s.twist - start.twist).norm(), 1e-9);
  EXPECT_LT((s.pose.position - (start.pose.position + t * start.twist.head<3>())).norm(), 1e-9);
  const Mat3 exact = rg::linalg::rot_exp(start.twist.tail<3>(), t) * start.pose.rotation;
  EXPECT_LT((s.pose.rotation - exact).norm(), 1e-9);
  EXPECT_LT((s.pose.rotation.transpose() * s.pose.rotation - Mat3::Identity()).norm(), 1e-12);
  EXPECT_NEAR(s.pose.rotation.determinant(), 1.0, 1e-12);
}

TEST(Step, RejectsInvalidStep) {
  const auto sc = Scenario::paper();
  const auto zero = [](const rg::dynamics::SystemSnapshot& snap, double) { return VecX(VecX::Zero(snap.G.cols())); };
  for (double dt : {0.0, -1e-3, 0.02, std::nan("")}) {
    EXPECT_THROW(step(sc.plant, sc.initial, zero, dt), rg::Error);
  }
  EXPECT_NO_THROW(step(sc.plant, sc.initial, zero, kMaxStep));
}

TEST(Step, NonFiniteStateIsReported) {
  const auto sc = Scenario::paper();
  const auto blowup = [](const rg::dynamics::SystemSnapshot& snap, double) {
    return VecX(VecX::Constant(snap.G.cols(), std::numeric_limits<double>::infinity()));
  };
  try {
    step(sc.plant, sc.initial, blowup, 1e-3);
    FAIL();
  } catch (const rg::Error& e) {
    EXPECT_EQ(e.kind(), rg::ErrorKind::NumericFailure);
  }
}

TEST(Integrate, FourthOrderConvergence) {
  auto sc = Scenario::paper();
  sc.initial.pose.position += Vec3(0.02, -0.01, 0.03);
  sc.initial.twist << 0.05, 0.0, -0.05, 0.1, 0.2, -0.1;
  const double horizon = 0.24;
  const auto reference = integrate(sc, horizon, 5e-4);
  const auto error = [&](double dt) {
    const auto s = integrate(sc, horizon, dt);
    return (s.pose.position - reference.pose.position).norm() +
           rg::linalg::rot_log(s.pose.rotation.transpose() * reference.pose.rotation).norm() +
           (s.twist - reference.twist).norm();
  };
  const double coarse = error(8e-3);
  const double fine = error(4e-3);
  EXPECT_GT(std::log2(coarse / fine), 3.5);
}

TEST(RunScenario, SampleCountAndStride) {
  auto sc = short_paper(0.0);
  EXPECT_EQ(run_scenario(sc).samples.size(), 1u);
  sc.duration = 0.01;
  sc.log_stride = 3;
  const auto log = run_scenario(sc);
  ASSERT_EQ(log.samples.size(), 4u);
  EXPECT_NEAR(log.samples.back().t, 0.009, 1e-15);
  sc.log_stride = 1;
  EXPECT_EQ(run_scenario(sc).samples.size(), 11u);
}

TEST(RunScenario, IsDeterministic) {
  const auto sc = short_paper(0.05);
  const auto a = run_scenario(sc);
  const auto b = run_scenario(sc);
  ASSERT_EQ(a.samples.size(), b.samples.size());
  for (std::size_t k = 0; k < a.samples.size(); ++k) {
    EXPECT_EQ(a.samples[k].V, b.samples[k].V);
    EXPECT_EQ(a.samples[k].u_norms, b.samples[k].u_norms);
  }
}

TEST(RunScenario, ConsistencyAlongShortRun) {
  for (auto kind : {rg::grasp::RightInverseKind::InertiaWeighted, rg::grasp::RightInverseKind::MoorePenrose}) {
    const auto sc = short_paper(0.5, kind);
    const auto log = run_scenario(sc);
    ASSERT_EQ(log.samples.size(), 501u);
    for (std::size_t k = 0; k < log.samples.size(); ++k) {
      const auto& s = log.samples[k];
      EXPECT_LT(s.constraint_residual, 1e-10);
      EXPECT_LT(s.h_int_discrepancy, 1e-6 * std::max(1.0, s.h_int_norm));
      EXPECT_LT(s.e_O, 2.0);
      if (kind == rg::grasp::RightInverseKind::InertiaWeighted) {
        EXPECT_LT(s.h_int_norm, 1e-6);
      }
      if (k > 0) {
        EXPECT_LE(s.V - log.samples[k - 1].V, 1e-8 + 10 * std::pow(sc.dt, 4));
      }
    }
    if (kind == rg::grasp::RightInverseKind::MoorePenrose) {
      EXPECT_GT(log.samples.back().h_int_norm, 1e-3);
    }
  }
}

TEST(RunScenario, TracksDesiredInternalForce) {
  auto sc = short_paper(0.3);
  const MatX g_body = rg::grasp::grasp_matrix(sc.plant.configuration({Vec3::Zero(), Mat3::Identity()}));
  const MatX z = rg::linalg::nullspace_basis(g_body).columns;
  auto rng = rg::testing::rng(81);
  sc.desired_internal_force = VecX(5.0 * (z * rg::verify::gaussian(rng, z.cols())).normalized());
  const auto log = run_scenario(sc);
  for (const auto& s : log.samples) {
    EXPECT_LT(s.h_int_desired_error, 5e-5);
    EXPECT_NEAR(s.h_int_norm, 5.0, 5e-5);
  }

  sc.desired_internal_force = VecX::Ones(24);
  EXPECT_THROW(sc.validate(), rg::Error);
}

TEST(WorldInternalForce, StaysInNullspace) {
  const auto sc = Scenario::paper();
  const MatX g_body = rg::grasp::grasp_matrix(sc.plant.configuration({Vec3::Zero(), Mat3::Identity()}));
  const VecX body = rg::linalg::nullspace_basis(g_body).columns.col(3);
  auto rng = rg::testing::rng(82);
  const Mat3 r = rg::verify::random_rotation(rng);
  const MatX g = rg::grasp::grasp_matrix(sc.plant.configuration({Vec3(1, 2, 3), r}));
  EXPECT_LT((g * world_internal_force(body, r)).norm(), 1e-12);
}

TEST(Plant, Validation) {
  auto sc = Scenario::paper();
  EXPECT_NO_THROW(sc.validate());
  auto two = sc;
  two.plant.agents.resize(2);
  two.plant.offsets.resize(2);
  try {
    two.validate();
    FAIL();
  } catch (const rg::Error& e) {
    EXPECT_EQ(e.kind(), rg::ErrorKind::DegenerateConfiguration);
    EXPECT_NE(std::string(e.what()).find("N=2"), std::string::npos);
  }
  auto collinear = sc;
  for (int i = 0; i < 4; ++i) collinear.plant.offsets[static_cast<std::size_t>(i)] = {Vec3(0.1 * (i + 1), 0, 0), Mat3::Identity()};
  EXPECT_THROW(collinear.validate(), rg::Error);
  auto bad_dt = sc;
  bad_dt.dt = 0.05;
  EXPECT_THROW(bad_dt.validate(), rg::Error);
}
