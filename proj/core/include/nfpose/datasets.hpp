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

// Ground-truth trajectory formats.
//
// TUM RGB-D: one pose per line, "timestamp tx ty tz qx qy qz qw", lines
// starting with '#' are comments.
// KITTI odometry: one pose per line, 12 numbers, the row-major 3x4 [R|T];
// files carry no timestamps, so they are synthesized as index * frame_dt.

#include <string>
#include <string_view>
#include <vector>

#include "nfpose/geometry.hpp"

namespace nfpose {

inline constexpr double kDefaultKittiFrameDt = 0.1;

struct ParseDiagnostics {
  std::vector<std::string> warnings;
};

/// Quaternions within 1e-3 of unit norm are normalized; others raise
/// kNonUnitQuaternion. Poses are returned sorted by timestamp.
Trajectory parse_tum_trajectory(std::string_view text, ParseDiagnostics* diag = nullptr);
std::string serialize_tum_trajectory(const Trajectory& trajectory);

/// Rotations drifting more than 1e-6 from orthonormal are projected back
/// (with a warning); |det - 1| > 1e-2 raises kNonRotationMatrix.
Trajectory parse_kitti_poses(std::string_view text, double frame_dt = kDefaultKittiFrameDt,
                             ParseDiagnostics* diag = nullptr);
std::string serialize_kitti_poses(const Trajectory& trajectory);

}  // namespace nfpose
