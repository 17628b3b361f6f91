// Copyright 2026 The nfpose Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "nfpose/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/SVD>

#include "nfpose/error.hpp"

namespace nfpose {

bool ImagePoint::valid(double fov_limit) const {
  return std::isfinite(x) && std::isfinite(y) && std::abs(x) <= fov_limit &&
         std::abs(y) <= fov_limit;
}

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0) || !std::isfinite(cx) || !std::isfinite(cy)) {
    std::ostringstream os;
    os << "intrinsics need fx > 0 and fy > 0 (got fx=" << fx << ", fy=" << fy << ")";
    throw Error(ErrorCode::kInvalidArgument, os.str());
  }
}

Rotation Rotation::from_matrix(const Mat3& m, double tol) {
  if (!m.allFinite()) throw Error(ErrorCode::kInvalidArgument, "rotation has non-finite entries");
  const double ortho = (m.transpose() * m - Mat3::Identity()).cwiseAbs().maxCoeff();
  const double det = m.determinant();
  if (ortho > tol || std::abs(det - 1.0) > tol) {
    std::ostringstream os;
    os << "matrix is not a rotation (|R^T R - I| = " << ortho << ", det = " << det << ")";
    throw Error(ErrorCode::kInvalidArgument, os.str());
  }
  return Rotation(m);
}

Rotation Rotation::nearest(const Mat3& m) {
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 d = Mat3::Identity();
  if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0) d(2, 2) = -1.0;
  return Rotation(svd.matrixU() * d * svd.matrixV().transpose());
}

Rotation Rotation::from_quaternion(const Eigen::Quaterniond& q) {
  return Rotation(q.normalized().toRotationMatrix());
}

Eigen::Quaterniond Rotation::quaternion() const {
  Eigen::Quaterniond q(m_);
  q.normalize();
  // Canonical hemisphere keeps serialized output stable.
  if (q.w() < 0.0) q.coeffs() *= -1.0;
  return q;
}

double Rotation::angle() const {
  const double c = std::clamp((m_.trace() - 1.0) / 2.0, -1.0, 1.0);
  return std::acos(c);
}

Eigen::Matrix<double, 6, 1> CameraMotion::stacked() const {
  Eigen::Matrix<double, 6, 1> p;
  p << linear, angular;
  return p;
}

CameraMotion CameraMotion::from_stacked(const Eigen::Matrix<double, 6, 1>& p) {
  return {p.head<3>(), p.tail<3>()};
}

Trajectory::Trajectory(std::vector<AbsolutePose> poses) : poses_(std::move(poses)) {
  if (poses_.empty()) throw Error(ErrorCode::kInvalidArgument, "trajectory needs at least one pose");
  for (std::size_t i = 0; i < poses_.size(); ++i) {
    if (!std::isfinite(poses_[i].timestamp) || !poses_[i].translation.allFinite()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "pose " + std::to_string(i) + " has non-finite fields");
    }
    if (i > 0 && !(poses_[i].timestamp > poses_[i - 1].timestamp)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "timestamps must be strictly increasing (pose " + std::to_string(i) + ")");
    }
  }
}

Mat3 skew(const Vec3& w) {
  Mat3 m;
  m << 0.0, -w.z(), w.y(),
       w.z(), 0.0, -w.x(),
       -w.y(), w.x(), 0.0;
  return m;
}

Vec3 unskew(const Mat3& m) {
  return 0.5 * Vec3(m(2, 1) - m(1, 2), m(0, 2) - m(2, 0), m(1, 0) - m(0, 1));
}

Rotation so3_exp(const Vec3& omega) {
  const double theta2 = omega.squaredNorm();
  const double theta = std::sqrt(theta2);
  const Mat3 w = skew(omega);
  double a;  // sin(t)/t
  double b;  // (1-cos(t))/t^2
  if (theta < 1e-4) {
    a = 1.0 - theta2 / 6.0 + theta2 * theta2 / 120.0;
    b = 0.5 - theta2 / 24.0 + theta2 * theta2 / 720.0;
  } else {
    a = std::sin(theta) / theta;
    b = (1.0 - std::cos(theta)) / theta2;
  }
  return Rotation(Mat3::Identity() + a * w + b * w * w);
}

Vec3 so3_log(const Rotation& r) {
  const Mat3& m = r.matrix();
  const double tr = m.trace();
  if (tr <= -1.0 + 1e-6) {
    throw Error(ErrorCode::kAngleNearPi, "rotation angle too close to pi for the principal log");
  }
  const Vec3 v = unskew(m);  // sin(theta) * axis
  const double s = v.norm();
  const double c = (tr - 1.0) / 2.0;
  const double theta = std::atan2(s, c);
  if (s < 1e-10) {
    // theta ~ s here; first-order series of theta / sin(theta)
    return (1.0 + s * s / 6.0) * v;
  }
  return (theta / s) * v;
}

InteractionMatrices interaction_matrices(const ImagePoint& p) {
  const double x = p.x;
  const double y = p.y;
  InteractionMatrices m;
  m.translational << -1.0, 0.0, x,
                     0.0, -1.0, y;
  m.rotational << x * y, -(x * x + 1.0), y,
                  y * y + 1.0, -x * y, -x;
  return m;
}

CameraMotion relative_motion(const AbsolutePose& p0, const AbsolutePose& p1) {
  const double dt = p1.timestamp - p0.timestamp;
  if (!(dt > 0.0)) {
    throw Error(ErrorCode::kNonPositiveDt, "relative motion needs t1 > t0");
  }
  CameraMotion m;
  m.linear = (p1.translation - p0.translation) / dt;
  m.angular = so3_log(p0.rotation.inverse() * p1.rotation) / dt;
  return m;
}

AbsolutePose integrate_motion(const AbsolutePose& p0, const CameraMotion& motion, double dt) {
  if (!(dt > 0.0)) throw Error(ErrorCode::kNonPositiveDt, "integration step must be positive");
  AbsolutePose p1;
  p1.translation = p0.translation + motion.linear * dt;
  p1.rotation = p0.rotation * so3_exp(motion.angular * dt);
  p1.timestamp = p0.timestamp + dt;
  return p1;
}

ImagePoint pixel_to_normalized(const Vec2& px, const CameraIntrinsics& k) {
  return {(px.x() - k.cx) / k.fx, (px.y() - k.cy) / k.fy};
}

Vec2 normalized_to_pixel(const ImagePoint& p, const CameraIntrinsics& k) {
  return {p.x * k.fx + k.cx, p.y * k.fy + k.cy};
}

Vec2 pixel_gradient_to_normalized(const Vec2& grad_px, const CameraIntrinsics& k) {
  return {grad_px.x() * k.fx, grad_px.y() * k.fy};
}

Vec2 pixel_direction_to_normalized(const Vec2& dir_px, const CameraIntrinsics& k) {
  const Vec2 g = pixel_gradient_to_normalized(dir_px, k);
  const double n = g.norm();
  if (!(n > 0.0)) throw Error(ErrorCode::kZeroGradient, "cannot normalize a zero direction");
  return g / n;
}

Rotation rotation_from_euler_xyz(const Vec3& abc) {
  const Eigen::Quaterniond q = Eigen::AngleAxisd(abc.x(), Vec3::UnitX()) *
                               Eigen::AngleAxisd(abc.y(), Vec3::UnitY()) *
                               Eigen::AngleAxisd(abc.z(), Vec3::UnitZ());
  return Rotation::from_quaternion(q);
}

Vec3 euler_xyz_from_rotation(const Rotation& r) {
  const Mat3& m = r.matrix();
  const double b = std::asin(std::clamp(m(0, 2), -1.0, 1.0));
  const double a = std::atan2(-m(1, 2), m(2, 2));
  const double c = std::atan2(-m(0, 1), m(0, 0));
  return {a, b, c};
}

}  // namespace nfpose
