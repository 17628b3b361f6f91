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

// Seeded synthetic scenes: random image points and gradient directions,
// uniform depths, and normal flow rendered with the forward model for a
// known motion sequence.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "nfpose/flowfield.hpp"
#include "nfpose/geometry.hpp"

namespace nfpose {

enum class GradientDistribution { kUniform, kAxisBiased };

struct MotionSpec {
  enum class Kind { kConstant, kSequence, kRandom };
  Kind kind = Kind::kRandom;
  CameraMotion constant;                // kConstant
  std::vector<CameraMotion> sequence;   // kSequence, one per frame pair
  double max_rotation = 0.05;           // kRandom: |Omega| <= this, V uniform on the sphere
};

struct ScenarioConfig {
  std::uint64_t seed = 0;
  std::size_t sample_count = 500;
  double depth_min = 1.0;
  double depth_max = 50.0;
  int frames = 2;  // poses; frames - 1 flow fields
  double frame_dt = 1.0;
  MotionSpec motion;
  double noise_pct = 0.0;
  GradientDistribution gradients = GradientDistribution::kUniform;
  /// Axis-biased: dominant-to-other mixture ratio and the dominant axis
  /// (0 = x, 1 = y).
  double axis_ratio = 10.0;
  int dominant_axis = 0;
  double fov_limit = 1.0;

  /// Throws kInvalidConfig.
  void validate() const;
};

ScenarioConfig scenario_config_from_json(std::string_view text);
std::string scenario_config_to_json(const ScenarioConfig& cfg);

struct Scenario {
  std::vector<NormalFlowField> fields;
  std::vector<DepthMap> depths;
  /// Per-frame-pair motion (velocities; the flow uses motion * frame_dt).
  std::vector<CameraMotion> motions;
  Trajectory ground_truth;
};

/// Deterministic in cfg.seed. Each frame pair draws from its own keyed
/// stream, so pairs can be generated independently.
Scenario generate_scenario(const ScenarioConfig& cfg);

/// Half-width of the jitter around the dominant axis in axis-biased mode.
inline constexpr double kAxisJitterDeg = 10.0;

/// Sampler for one gradient direction; `u1`, `u2`, `u3` are uniforms in [0,1).
Vec2 sample_gradient_direction(const ScenarioConfig& cfg, double u1, double u2, double u3);

}  // namespace nfpose
