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
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "nfpose/bilevel.hpp"
#include "nfpose/error.hpp"
#include "nfpose/scenario.hpp"
#include "families.hpp"
#include "oracles.hpp"

namespace nfpose {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

using testing::rel_err;
using testing::tight_solver;

TEST(RefinementLoss, ZeroAtTruth) {
  const CameraMotion m = testing::random_motion(31);
  const NormalFlowField f = testing::random_field(300, 31, m);
  const RefinementLoss l = refinement_loss(CoarsePose{m}, RefinedPose{m}, f);
  EXPECT_LT(l.value, 1e-28);
  EXPECT_LT(l.grad.norm(), 1e-12);
}

TEST(RefinementLoss, PositiveForRotationOffset) {
  const CameraMotion m = testing::random_motion(32);
  const NormalFlowField f = testing::random_field(300, 32, m);
  CameraMotion pc = m;
  pc.angular += Vec3(0, 0, 0.01);
  EXPECT_GT(refinement_loss(CoarsePose{pc}, RefinedPose{m}, f).value, 1e-8);
}

TEST(RefinementLoss, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(33);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 100; ++trial) {
    const CameraMotion m = testing::random_motion(500 + trial);
    const NormalFlowField f = testing::random_field(80, 500 + trial, m);
    const CameraMotion pr{(m.linear + 0.1 * Vec3(nd(rng), nd(rng), nd(rng))).normalized(), m.angular};
    const CameraMotion pc{Vec3(nd(rng), nd(rng), nd(rng)), Vec3(nd(rng), nd(rng), nd(rng)) * 0.05};
    const RefinementLoss l = refinement_loss(CoarsePose{pc}, RefinedPose{pr}, f);
    const VectorXd fd = testing::fd_gradient(
        [&](const VectorXd& x) {
          return refinement_loss(CoarsePose{CameraMotion::from_stacked(x)}, RefinedPose{pr}, f).value;
        },
        pc.stacked());
    EXPECT_LT(rel_err(l.grad, fd), 1e-5) << "trial " << trial;
  }
}

TEST(RefinementLoss, AllDegenerate) {
  FlowSample s;
  s.point = {0, 0};
  s.g = {0, 1};
  s.n = 0.1;
  const CameraMotion pr{Vec3(1, 0, 0), Vec3::Zero()};
  try {
    refinement_loss(CoarsePose{pr}, RefinedPose{pr}, NormalFlowField({s}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kAllSamplesDegenerate);
  }
}

LowerLevelObjective squared_distance() {
  LowerLevelObjective o;
  o.value = [](const VectorXd& z, const VectorXd& t, VectorXd& g) {
    g = 2.0 * (z - t);
    return (z - t).squaredNorm();
  };
  o.hessian_zz = [](const VectorXd& z, const VectorXd&) { return MatrixXd(2.0 * MatrixXd::Identity(z.size(), z.size())); };
  o.hessian_ztheta = [](const VectorXd& z, const VectorXd&) { return MatrixXd(-2.0 * MatrixXd::Identity(z.size(), z.size())); };
  return o;
}

TEST(ImplicitGradient, SquaredDistanceIsIdentity) {
  const ArgminLayer layer(squared_distance(), tight_solver());
  VectorXd theta(3);
  theta << 0.3, -1.0, 2.0;
  const ArgminResult r = layer.solve(theta, VectorXd::Zero(3));
  const ImplicitGradient ig = implicit_gradient(layer, r.z, theta);
  EXPECT_LT((ig.jacobian - MatrixXd::Identity(3, 3)).norm(), 1e-10);
}

TEST(ImplicitGradient, QuadraticMatchesClosedForm) {
  std::mt19937_64 rng(34);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 2 + trial % 5;
    MatrixXd m(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) m(i, j) = nd(rng);
    const MatrixXd q = m * m.transpose() + MatrixXd::Identity(d, d);
    VectorXd theta(d);
    for (int i = 0; i < d; ++i) theta[i] = nd(rng);
    const ArgminLayer layer(testing::linear_quadratic(q), tight_solver());
    const ArgminResult r = layer.solve(theta, VectorXd::Zero(d));
    ASSERT_LT(r.gradient_norm, kStationarityTolerance);
    const ImplicitGradient ig = implicit_gradient(layer, r.z, theta);
    EXPECT_LT((ig.jacobian - q.inverse()).norm(), 1e-10);
    EXPECT_GE(ig.condition_number, 1.0);
  }
}

TEST(ImplicitGradient, SmoothFamilyMatchesResolveDifferences) {
  std::mt19937_64 rng(35);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 30; ++trial) {
    const int d = 2 + trial % 4;
    const testing::SmoothFamily p = testing::random_smooth_family(d, rng);
    VectorXd theta(d);
    for (int i = 0; i < d; ++i) theta[i] = nd(rng);

    const ArgminLayer layer(testing::smooth_family(p), tight_solver());
    const VectorXd z0 = VectorXd::Zero(d);
    const ArgminResult r = layer.solve(theta, z0);
    ASSERT_LT(r.gradient_norm, kStationarityTolerance);
    const ImplicitGradient ig = implicit_gradient(layer, r.z, theta);

    const double h = 1e-4;
    MatrixXd fd(d, d);
    for (int j = 0; j < d; ++j) {
      VectorXd tp = theta, tm = theta;
      tp[j] += h;
      tm[j] -= h;
      fd.col(j) = (layer.solve(tp, r.z).z - layer.solve(tm, r.z).z) / (2 * h);
    }
    EXPECT_LT(rel_err(ig.jacobian, fd), 1e-3) << "trial " << trial;
  }
}

TEST(ImplicitGradient, RejectsNonStationaryPoint) {
  const ArgminLayer layer(squared_distance(), tight_solver());
  try {
    implicit_gradient(layer, VectorXd::Ones(2), VectorXd::Zero(2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNotStationary);
  }
}

TEST(ImplicitGradient, SingularHessian) {
  LowerLevelObjective o;
  o.value = [](const VectorXd& z, const VectorXd& t, VectorXd& g) {
    g = VectorXd::Zero(2);
    g[0] = 2.0 * (z[0] - t[0]);
    return (z[0] - t[0]) * (z[0] - t[0]);
  };
  o.hessian_zz = [](const VectorXd&, const VectorXd&) {
    MatrixXd h = MatrixXd::Zero(2, 2);
    h(0, 0) = 2.0;
    return h;
  };
  o.hessian_ztheta = [](const VectorXd&, const VectorXd&) { return MatrixXd(-2.0 * MatrixXd::Identity(2, 2)); };
  const ArgminLayer layer(o, tight_solver());
  try {
    implicit_gradient(layer, VectorXd::Zero(2), VectorXd::Zero(2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSingularHessian);
  }
}

TEST(CheiralityRotationLayer, HessiansMatchGradientDifferences) {
  for (unsigned seed = 0; seed < 10; ++seed) {
    const CameraMotion m = testing::random_motion(600 + seed);
    const NormalFlowField f = testing::random_field(60, 600 + seed, m);
    const LowerLevelObjective o = cheirality_rotation_objective(f, seed % 2 == 0 ? 1.0 : 30.0);
    const VectorXd z = m.angular + Vec3(0.01, -0.02, 0.005);
    const VectorXd theta = (m.linear + Vec3(0.1, 0.0, -0.1)).normalized();
    auto grad_z = [&](const VectorXd& zz, const VectorXd& tt) {
      VectorXd g(3);
      o.value(zz, tt, g);
      return g;
    };
    const double h = 1e-6;
    MatrixXd hzz(3, 3), hzt(3, 3);
    for (int j = 0; j < 3; ++j) {
      VectorXd zp = z, zm = z, tp = theta, tm = theta;
      zp[j] += h;
      zm[j] -= h;
      tp[j] += h;
      tm[j] -= h;
      hzz.col(j) = (grad_z(zp, theta) - grad_z(zm, theta)) / (2 * h);
      hzt.col(j) = (grad_z(z, tp) - grad_z(z, tm)) / (2 * h);
    }
    EXPECT_LT(rel_err(o.hessian_zz(z, theta), hzz), 1e-5);
    EXPECT_LT(rel_err(o.hessian_ztheta(z, theta), hzt), 1e-5);
    // value gradient agrees with the pose objective's rotation gradient
    VectorXd g(3);
    const double v = o.value(z, theta, g);
    const CheiralityObjective co = cheirality_objective(f, {theta, z}, seed % 2 == 0 ? 1.0 : 30.0);
    EXPECT_NEAR(v, co.value, 1e-15);
    EXPECT_LT((g - co.grad_angular).norm(), 1e-15);
  }
}

ScenarioConfig acceptance_scene() {
  ScenarioConfig cfg;
  cfg.seed = 1;
  cfg.motion.kind = MotionSpec::Kind::kConstant;
  cfg.motion.constant = {Vec3(0, 0, 1), Vec3(0.01, -0.02, 0.005)};
  return cfg;
}

CameraMotion perturbed_truth(const CameraMotion& m, double degrees) {
  return {so3_exp(Vec3::UnitX() * (degrees * M_PI / 180.0)) * m.linear, m.angular};
}

TEST(Refine, StationaryAtTruth) {
  const Scenario sc = generate_scenario(acceptance_scene());
  const RefineTrace t = refine(CoarsePose{sc.motions[0]}, sc.fields[0], 10, 0.1);
  ASSERT_EQ(t.losses.size(), 11u);
  for (double l : t.losses) EXPECT_LE(l, 1e-12);
}

TEST(Refine, PerturbedInitReducesLoss) {
  const Scenario sc = generate_scenario(acceptance_scene());
  const RefineTrace t = refine(CoarsePose{perturbed_truth(sc.motions[0], 5.0)}, sc.fields[0], 50, 0.1);
  ASSERT_EQ(t.losses.size(), 51u);
  ASSERT_GT(t.losses.front(), 0.0);
  EXPECT_LT(t.losses.back(), t.losses.front() / 10.0);
}

TEST(Refine, SmallStepsAreMonotone) {
  const Scenario sc = generate_scenario(acceptance_scene());
  const RefineTrace t = refine(CoarsePose{perturbed_truth(sc.motions[0], 5.0)}, sc.fields[0], 30, 1e-2);
  for (std::size_t k = 1; k < t.losses.size(); ++k) EXPECT_LE(t.losses[k], t.losses[k - 1]) << "step " << k;
}

TEST(Refine, RequiresAStep) {
  const Scenario sc = generate_scenario(acceptance_scene());
  EXPECT_THROW(refine(CoarsePose{sc.motions[0]}, sc.fields[0], 0, 0.1), Error);
  EXPECT_THROW(refine(CoarsePose{sc.motions[0]}, sc.fields[0], 5, 0.0), Error);
}

}  // namespace
}  // namespace nfpose
