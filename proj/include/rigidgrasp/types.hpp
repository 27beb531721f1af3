#pragma once

#include <Eigen/Dense>

namespace rigidgrasp {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

/// Linear velocity stacked over angular velocity, both in the inertial frame.
using Twist6 = Vec6;
/// Force stacked over torque, both in the inertial frame.
using Wrench6 = Vec6;

/// Position in R^3 plus rotation matrix; the configuration of one body.
struct PoseSE3 {
  Vec3 position = Vec3::Zero();
  Mat3 rotation = Mat3::Identity();
};

}  // namespace rigidgrasp
