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

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nfpose/flowfield.hpp"
#include "nfpose/geometry.hpp"

namespace nfpose {

enum class AlignmentMode { kNone, kRigid, kRigidScale };

/// Similarity S mapping estimated positions onto reference positions:
/// ref ~ scale * R * est + t.
struct AlignmentResult {
  Rotation rotation;
  Vec3 translation = Vec3::Zero();
  double scale = 1.0;
  double residual_rmse = 0.0;

  Vec3 apply(const Vec3& p) const { return scale * (rotation * p) + translation; }
};

/// Closed-form absolute orientation (unit-quaternion method) on the
/// translation components, associated by index. Needs equal lengths
/// (kSampleSetMismatch) and at least 3 poses (kDegenerateConfiguration).
AlignmentResult horn_align(const Trajectory& estimated, const Trajectory& reference,
                           AlignmentMode mode);

/// Absolute trajectory error: RMSE over all poses of |trans(Q_t^-1 S P_t)|.
double ate(const Trajectory& estimated, const Trajectory& reference,
           AlignmentMode mode = AlignmentMode::kRigidScale);

struct RpePair {
  std::size_t from = 0;
  std::size_t to = 0;
  double translation_error = 0.0;  // |trans(F)|
  double rotation_error = 0.0;     // angle(rot(F)), radians
  double segment_length = 0.0;     // 0 in frame-interval mode
};

struct MetricReport {
  double ate_rmse = 0.0;
  /// Frame-interval mode: RMSE of |trans(F)|. Segment mode: mean relative
  /// translation error in percent.
  double t_rel = 0.0;
  /// Frame-interval mode: mean rotation angle in degrees. Segment mode:
  /// degrees per 100 m.
  double r_rel = 0.0;
  int delta = 1;
  bool segment_mode = false;
  std::vector<RpePair> pairs;
};

inline const std::vector<double> kKittiSegmentLengths = {100, 200, 300, 400, 500, 600, 700, 800};

/// Relative pose error. Without segment lengths: over the n - delta frame
/// pairs (t, t + delta). With segment lengths: every start frame and every
/// length L, paired with the first frame whose traveled reference distance
/// exceeds L (KITTI odometry convention). Throws kTrajectoryTooShort when
/// no pair can be formed.
MetricReport rpe(const Trajectory& estimated, const Trajectory& reference, int delta,
                 const std::optional<std::vector<double>>& segment_lengths = std::nullopt);

/// JSON object with the fixed keys ate_rmse_m, t_rel_pct,
/// r_rel_deg_per_100m, delta, n_pairs (plus "units").
std::string metric_report_to_json(const MetricReport& report);

/// Projection endpoint error for flow vectors: mean over samples of
/// |n_gt - ((grad.u) / |grad|^2) grad|.
double pee(std::span<const Vec2> predicted_flow, std::span<const Vec2> gradients,
           std::span<const Vec2> ground_truth_normal_flow);

/// Scalar form against a ground-truth field: mean |n_gt - g.u|.
double pee(std::span<const Vec2> predicted_flow, const NormalFlowField& ground_truth);

/// Scalar form for two fields on the same sample set (same points, same
/// gradient directions): mean |n_gt - n_pred|.
double pee(const NormalFlowField& predicted, const NormalFlowField& ground_truth);

}  // namespace nfpose
