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

#pragma once

// Differential-motion geometry in calibrated (focal-length-1) image
// coordinates: rotation utilities, pose/velocity conversions and the
// per-pixel interaction matrices that map camera velocity to image motion.

#include <cstddef>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace nfpose {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat23 = Eigen::Matrix<double, 2, 3>;

inline constexpr double kDefaultFovLimit = 1.5;

struct ImagePoint {
  double x = 0.0;
  double y = 0.0;

  Vec2 vec() const { return {x, y}; }
  bool valid(double fov_limit = kDefaultFovLimit) const;
  friend bool operator==(const ImagePoint&, const ImagePoint&) = default;
};

struct CameraIntrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;

  /// Throws kInvalidArgument unless fx > 0 and fy > 0.
  void validate() const;
  static CameraIntrinsics identity() { return {}; }
  friend bool operator==(const CameraIntrinsics&, const CameraIntrinsics&) = default;
};

/// Element of SO(3), stored as a matrix.
class Rotation {
 public:
  Rotation() : m_(Mat3::Identity()) {}

  /// Accepts `m` if it is orthonormal with det +1 within `tol`.
  static Rotation from_matrix(const Mat3& m, double tol = 1e-9);
  /// Nearest rotation in the Frobenius sense (SVD projection).
  static Rotation nearest(const Mat3& m);
  static Rotation from_quaternion(const Eigen::Quaterniond& q);
  static Rotation identity() { return {}; }

  const Mat3& matrix() const { return m_; }
  Eigen::Quaterniond quaternion() const;
  Rotation inverse() const { return Rotation(m_.transpose()); }
  /// Rotation angle in [0, pi].
  double angle() const;

  Rotation operator*(const Rotation& o) const { return Rotation(m_ * o.m_); }
  Vec3 operator*(const Vec3& v) const { return m_ * v; }

 private:
  explicit Rotation(const Mat3& m) : m_(m) {}
  friend Rotation so3_exp(const Vec3& omega);

  Mat3 m_;
};

struct AbsolutePose {
  Rotation rotation;
  Vec3 translation = Vec3::Zero();
  double timestamp = 0.0;
};

/// Instantaneous camera motion: translational velocity V and rotational
/// velocity Omega (rad per unit time).
struct CameraMotion {
  Vec3 linear = Vec3::Zero();
  Vec3 angular = Vec3::Zero();

  bool finite() const { return linear.allFinite() && angular.allFinite(); }
  Eigen::Matrix<double, 6, 1> stacked() const;
  static CameraMotion from_stacked(const Eigen::Matrix<double, 6, 1>& p);
};

/// Time-ordered sequence of absolute poses; never empty, timestamps
/// strictly increasing.
class Trajectory {
 public:
  explicit Trajectory(std::vector<AbsolutePose> poses);

  std::size_t size() const { return poses_.size(); }
  const AbsolutePose& operator[](std::size_t i) const { return poses_[i]; }
  const std::vector<AbsolutePose>& poses() const { return poses_; }
  auto begin() const { return poses_.begin(); }
  auto end() const { return poses_.end(); }

 private:
  std::vector<AbsolutePose> poses_;
};

Mat3 skew(const Vec3& w);
/// Inverse of skew() for the antisymmetric part of `m`.
Vec3 unskew(const Mat3& m);

Rotation so3_exp(const Vec3& omega);
/// Principal-branch logarithm. Throws kAngleNearPi when
/// trace(R) <= -1 + 1e-6.
Vec3 so3_log(const Rotation& r);

/// Translational (A) and rotational (B) interaction matrices at a point.
struct InteractionMatrices {
  Mat23 translational;
  Mat23 rotational;
};
InteractionMatrices interaction_matrices(const ImagePoint& p);

/// Finite-difference velocity between two poses (linear velocity
/// assumption). Throws kNonPositiveDt, or kAngleNearPi from so3_log.
CameraMotion relative_motion(const AbsolutePose& p0, const AbsolutePose& p1);

/// Inverse of relative_motion: advances `p0` by `motion` over `dt`.
AbsolutePose integrate_motion(const AbsolutePose& p0, const CameraMotion& motion, double dt);

ImagePoint pixel_to_normalized(const Vec2& px, const CameraIntrinsics& k);
Vec2 normalized_to_pixel(const ImagePoint& p, const CameraIntrinsics& k);

/// Converts a pixel-space intensity gradient to normalized coordinates
/// (chain rule: dI/dx = fx * dI/du). The result is not re-normalized.
Vec2 pixel_gradient_to_normalized(const Vec2& grad_px, const CameraIntrinsics& k);
/// Unit gradient direction expressed in normalized coordinates.
Vec2 pixel_direction_to_normalized(const Vec2& dir_px, const CameraIntrinsics& k);

// X-Y-Z Euler angles, R = Rx(a) * Ry(b) * Rz(c). I/O only.
Rotation rotation_from_euler_xyz(const Vec3& abc);
Vec3 euler_xyz_from_rotation(const Rotation& r);

}  // namespace nfpose
