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

// Independent reference implementations used as test oracles. They favor
// the most direct formulation (4x4 homogeneous matrices, explicit loops,
// Eigen's own alignment) over anything shared with the library.

#include <functional>
#include <vector>

#include <Eigen/Core>

#include "nfpose/flowfield.hpp"
#include "nfpose/geometry.hpp"
#include "nfpose/metrics.hpp"

namespace nfpose::testing {

Eigen::Matrix4d homogeneous(const AbsolutePose& p);

/// Central differences of a scalar function.
Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                            const Eigen::VectorXd& x, double h = 1e-6);

/// ATE via Eigen::umeyama and explicit E_t = Q_t^-1 S P_t.
double brute_ate(const Trajectory& est, const Trajectory& ref, AlignmentMode mode);

struct BruteRpe {
  double t_rel = 0.0;
  double r_rel = 0.0;
  std::size_t pairs = 0;
};
/// Frame-interval RPE: RMSE of |trans F| and mean angle (degrees).
BruteRpe brute_rpe(const Trajectory& est, const Trajectory& ref, int delta);
/// Segment RPE (percent, degrees per 100 m) over every start frame.
BruteRpe brute_rpe_segments(const Trajectory& est, const Trajectory& ref,
                            const std::vector<double>& lengths);

/// mean |n_gt - proj_grad(u)| with vector-valued normal flow.
double brute_pee(const std::vector<Vec2>& flow, const std::vector<Vec2>& grads,
                 const std::vector<Vec2>& gt_normal_flow);

/// Normal flow from the full optical flow model of a point at depth z.
Vec2 optical_flow(const ImagePoint& p, double z, const CameraMotion& m);

/// Random trajectory of `n` poses with smooth-ish motion.
Trajectory random_trajectory(std::size_t n, unsigned seed, double step = 1.0);

/// Random field of `n` samples with depths in [zmin, zmax] at `motion`.
NormalFlowField random_field(std::size_t n, unsigned seed, const CameraMotion& motion,
                             double zmin = 1.0, double zmax = 50.0,
                             std::vector<double>* depths = nullptr);

CameraMotion random_motion(unsigned seed, double max_rotation = 0.05);

}  // namespace nfpose::testing
