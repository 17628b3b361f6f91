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

#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "nfpose/error.hpp"
#include "nfpose/geometry.hpp"

namespace nfpose {
namespace {

constexpr double kPi = std::numbers::pi;

Mat3 rot_z(double a) { return Eigen::AngleAxisd(a, Vec3::UnitZ()).toRotationMatrix(); }

TEST(Skew, ZeroIsZero) { EXPECT_TRUE(skew(Vec3::Zero()).isZero(0.0)); }

TEST(Skew, Layout) {
  Mat3 expected;
  expected << 0, -3, 2, 3, 0, -1, -2, 1, 0;
  EXPECT_EQ(skew(Vec3(1, 2, 3)), expected);
  Mat3 ez;
  ez << 0, -1, 0, 1, 0, 0, 0, 0, 0;
  EXPECT_EQ(skew(Vec3(0, 0, 1)), ez);
}

TEST(Skew, CrossProductAndAntisymmetry) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> nd;
  for (int i = 0; i < 100; ++i) {
    const Vec3 w(nd(rng), nd(rng), nd(rng)), v(nd(rng), nd(rng), nd(rng));
    EXPECT_LT((skew(w) * v - w.cross(v)).norm(), 1e-12);
    EXPECT_TRUE((skew(w).transpose() + skew(w)).isZero(0.0));
    EXPECT_LT((unskew(skew(w)) - w).norm(), 1e-15);
  }
}

TEST(So3, ExpOfZeroIsIdentity) { EXPECT_TRUE(so3_exp(Vec3::Zero()).matrix().isIdentity(0.0)); }

TEST(So3, LogOfQuarterTurn) {
  const Vec3 w = so3_log(Rotation::from_matrix(rot_z(kPi / 2)));
  EXPECT_LT((w - Vec3(0, 0, kPi / 2)).norm(), 1e-12);
}

TEST(So3, RoundTripAndInvariants) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> mag(0.0, 3.0);
  for (int i = 0; i < 1000; ++i) {
    const Vec3 w = Vec3(nd(rng), nd(rng), nd(rng)).normalized() * mag(rng);
    const Rotation r = so3_exp(w);
    EXPECT_LT((r.matrix().transpose() * r.matrix() - Mat3::Identity()).norm(), 1e-12);
    EXPECT_NEAR(r.matrix().determinant(), 1.0, 1e-12);
    EXPECT_LT((so3_log(r) - w).norm(), 1e-9) << w.transpose();
    EXPECT_NEAR(so3_log(r).norm(), r.angle(), 1e-9);
  }
}

TEST(So3, TinyAnglesAreAccurate) {
  const Vec3 w(1e-9, -2e-9, 3e-10);
  EXPECT_LT((so3_log(so3_exp(w)) - w).norm(), 1e-20);
  EXPECT_LT((so3_exp(w).matrix() - (Mat3::Identity() + skew(w))).norm(), 1e-17);
}

TEST(So3, LogNearPiIsRejected) {
  const Rotation r = Rotation::from_matrix(Eigen::AngleAxisd(kPi, Vec3::UnitX()).toRotationMatrix());
  try {
    so3_log(r);
    FAIL() << "expected AngleNearPi";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kAngleNearPi);
  }
}

TEST(RotationType, RejectsNonOrthonormal) {
  Mat3 m = Mat3::Identity();
  m(0, 1) = 1e-3;
  EXPECT_THROW(Rotation::from_matrix(m), Error);
  EXPECT_THROW(Rotation::from_matrix(-Mat3::Identity()), Error);
  EXPECT_LT((Rotation::nearest(m).matrix() - Mat3::Identity()).norm(), 1e-3);
}

TEST(RotationType, QuaternionRoundTrip) {
  const Rotation r = so3_exp(Vec3(0.3, -0.2, 1.1));
  const Rotation back = Rotation::from_quaternion(r.quaternion());
  EXPECT_LT((back.matrix() - r.matrix()).norm(), 1e-14);
  EXPECT_GE(r.quaternion().w(), 0.0);
}

TEST(InteractionMatrices, Origin) {
  const InteractionMatrices m = interaction_matrices({0, 0});
  Mat23 a, b;
  a << -1, 0, 0, 0, -1, 0;
  b << 0, -1, 0, 1, 0, 0;
  EXPECT_EQ(m.translational, a);
  EXPECT_EQ(m.rotational, b);
}

TEST(InteractionMatrices, UnitPoint) {
  const InteractionMatrices m = interaction_matrices({1, 1});
  Mat23 a, b;
  a << -1, 0, 1, 0, -1, 1;
  b << 1, -2, 1, 2, -1, -1;
  EXPECT_EQ(m.translational, a);
  EXPECT_EQ(m.rotational, b);
}

TEST(InteractionMatrices, TranslationalHasFullRank) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int i = 0; i < 100; ++i) {
    const Mat23 a = interaction_matrices({u(rng), u(rng)}).translational;
    EXPECT_EQ(Eigen::FullPivLU<Mat23>(a).rank(), 2);
  }
}

TEST(RelativeMotion, IdenticalPosesGiveZero) {
  AbsolutePose p0, p1;
  p1.timestamp = 1.0;
  const CameraMotion m = relative_motion(p0, p1);
  EXPECT_TRUE(m.linear.isZero(0.0));
  EXPECT_TRUE(m.angular.isZero(0.0));
}

TEST(RelativeMotion, PureTranslation) {
  AbsolutePose p0, p1;
  p1.translation = Vec3(0, 0, 1);
  p1.timestamp = 1.0;
  const CameraMotion m = relative_motion(p0, p1);
  EXPECT_EQ(m.linear, Vec3(0, 0, 1));
  EXPECT_TRUE(m.angular.isZero(0.0));
}

TEST(RelativeMotion, RotationOverHalfInterval) {
  AbsolutePose p0, p1;
  p1.rotation = Rotation::from_matrix(rot_z(0.1));
  p1.timestamp = 0.5;
  EXPECT_LT((relative_motion(p0, p1).angular - Vec3(0, 0, 0.2)).norm(), 1e-12);
}

TEST(RelativeMotion, NonPositiveDt) {
  AbsolutePose p0, p1;
  try {
    relative_motion(p0, p1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNonPositiveDt);
  }
}

TEST(RelativeMotion, RecoversIntegratedConstantMotion) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> dtd(0.01, 2.0);
  for (int i = 0; i < 200; ++i) {
    AbsolutePose p0;
    p0.rotation = so3_exp(Vec3(nd(rng), nd(rng), nd(rng)) * 0.5);
    p0.translation = Vec3(nd(rng), nd(rng), nd(rng));
    p0.timestamp = nd(rng);
    const CameraMotion m{Vec3(nd(rng), nd(rng), nd(rng)), Vec3(nd(rng), nd(rng), nd(rng)) * 0.3};
    const double dt = dtd(rng);
    const CameraMotion back = relative_motion(p0, integrate_motion(p0, m, dt));
    EXPECT_LT((back.linear - m.linear).norm(), 1e-9);
    EXPECT_LT((back.angular - m.angular).norm(), 1e-9);
  }
}

TEST(Normalization, PrincipalPointAndFocalOffset) {
  const CameraIntrinsics k{500, 400, 320, 240};
  const ImagePoint c = pixel_to_normalized({320, 240}, k);
  EXPECT_EQ(c.x, 0.0);
  EXPECT_EQ(c.y, 0.0);
  const ImagePoint u = pixel_to_normalized({820, 240}, k);
  EXPECT_EQ(u.x, 1.0);
  EXPECT_EQ(u.y, 0.0);
}

TEST(Normalization, RoundTrip) {
  const CameraIntrinsics k{718.856, 718.856, 607.1928, 185.2157};
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.2, 1.2);
  for (int i = 0; i < 100; ++i) {
    const ImagePoint p{u(rng), u(rng)};
    const ImagePoint q = pixel_to_normalized(normalized_to_pixel(p, k), k);
    EXPECT_NEAR(q.x, p.x, 1e-12);
    EXPECT_NEAR(q.y, p.y, 1e-12);
  }
}

TEST(Normalization, AnisotropicGradientIsRenormalized) {
  const CameraIntrinsics k{2.0, 1.0, 0.0, 0.0};
  // I(u, v) = u + v  ->  in normalized coords I = 2x + y
  const Vec2 g = pixel_gradient_to_normalized(Vec2(1, 1), k);
  EXPECT_LT((g - Vec2(2, 1)).norm(), 1e-15);
  const Vec2 d = pixel_direction_to_normalized(Vec2(1, 1).normalized(), k);
  EXPECT_NEAR(d.norm(), 1.0, 1e-15);
  EXPECT_LT((d - Vec2(2, 1).normalized()).norm(), 1e-15);
}

TEST(Intrinsics, Validation) {
  EXPECT_THROW((CameraIntrinsics{0, 1, 0, 0}.validate()), Error);
  EXPECT_THROW((CameraIntrinsics{1, -1, 0, 0}.validate()), Error);
  EXPECT_NO_THROW(CameraIntrinsics::identity().validate());
}

TEST(ImagePointType, FovLimit) {
  EXPECT_TRUE((ImagePoint{1.5, -1.5}.valid()));
  EXPECT_FALSE((ImagePoint{1.6, 0}.valid()));
  EXPECT_FALSE((ImagePoint{std::nan(""), 0}.valid()));
  EXPECT_TRUE((ImagePoint{1.6, 0}.valid(2.0)));
}

TEST(EulerXyz, RoundTrip) {
  const Vec3 abc(0.1, -0.4, 0.7);
  const Rotation r = rotation_from_euler_xyz(abc);
  const Mat3 expected = (Eigen::AngleAxisd(0.1, Vec3::UnitX()) * Eigen::AngleAxisd(-0.4, Vec3::UnitY()) *
                         Eigen::AngleAxisd(0.7, Vec3::UnitZ()))
                            .toRotationMatrix();
  EXPECT_LT((r.matrix() - expected).norm(), 1e-14);
  EXPECT_LT((euler_xyz_from_rotation(r) - abc).norm(), 1e-12);
}

TEST(TrajectoryType, Invariants) {
  EXPECT_THROW(Trajectory({}), Error);
  AbsolutePose a, b;
  b.timestamp = 0.0;
  EXPECT_THROW(Trajectory({a, b}), Error);
  b.timestamp = 1.0;
  EXPECT_EQ(Trajectory({a, b}).size(), 2u);
}

}  // namespace
}  // namespace nfpose
