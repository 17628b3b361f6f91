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

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "nfpose/geometry.hpp"

namespace nfpose {

/// One normal-flow measurement: image point, unit gradient direction g and
/// the signed flow magnitude n along g (normalized units per frame).
struct FlowSample {
  ImagePoint point;
  Vec2 g = Vec2::UnitX();
  double n = 0.0;
  double weight = 1.0;
};

/// Location and gradient direction of a sample, without a measurement.
struct SampleSite {
  ImagePoint point;
  Vec2 g = Vec2::UnitX();
};

struct FramePair {
  int from = 0;
  int to = 1;
  friend bool operator==(const FramePair&, const FramePair&) = default;
};

/// Sparse normal-flow field between two frames. Construction validates:
/// at least one sample, unit gradients (1e-9), finite magnitudes,
/// nonnegative weights, no repeated image points.
class NormalFlowField {
 public:
  NormalFlowField(std::vector<FlowSample> samples, FramePair frame_pair = {});

  std::span<const FlowSample> samples() const { return samples_; }
  std::size_t size() const { return samples_.size(); }
  const FlowSample& operator[](std::size_t i) const { return samples_[i]; }
  const FramePair& frame_pair() const { return frame_pair_; }

 private:
  std::vector<FlowSample> samples_;
  FramePair frame_pair_;
};

/// Per-sample positive depths aligned with a sample list.
struct DepthMap {
  std::vector<double> depths;

  /// Throws kInvalidArgument on non-positive or non-finite entries.
  void validate() const;
};

/// Spatial (pixel units) and temporal intensity derivatives. Rows index
/// image v, columns index image u.
struct ImagePairDerivatives {
  Eigen::MatrixXd ix;
  Eigen::MatrixXd iy;
  Eigen::MatrixXd it;

  void validate() const;
};

inline constexpr double kDefaultGradientThreshold = 0.05;

/// Central spatial differences of the mean frame and a two-frame temporal
/// difference. Border pixels get zero spatial gradient.
ImagePairDerivatives image_derivatives(const Eigen::MatrixXd& frame0,
                                       const Eigen::MatrixXd& frame1);

/// Classical normal flow n = -I_t / |grad I| along grad I / |grad I|, one
/// sample per pixel whose pixel-gradient norm reaches `grad_threshold`.
/// Output is in normalized coordinates. Throws kEmptyField when no pixel
/// qualifies.
NormalFlowField normal_flow_from_derivatives(const ImagePairDerivatives& d,
                                             const CameraIntrinsics& k,
                                             double grad_threshold = kDefaultGradientThreshold,
                                             FramePair frame_pair = {});

/// Forward model: n = (1/Z) (g.A) V + (g.B) Omega at every site.
NormalFlowField synthesize_normal_flow(const CameraMotion& motion, const DepthMap& depths,
                                       std::span<const SampleSite> sites,
                                       FramePair frame_pair = {});

struct FlowProjection {
  Vec2 vector;       // ((u.grad) / |grad|^2) grad
  double magnitude;  // u.g, signed
};

/// Projects an optical-flow vector onto the gradient direction. Throws
/// kZeroGradient for a zero gradient.
FlowProjection project_optical_flow(const Vec2& flow, const Vec2& grad);

/// Adds Uniform(-b, b) noise to every n, b = (epsilon_pct / 100) * mean|n|.
/// Gradient directions are untouched. Each sample draws from a generator
/// keyed by (seed, sample index), so the result does not depend on
/// evaluation order.
NormalFlowField inject_noise(const NormalFlowField& field, double epsilon_pct,
                             std::uint64_t seed);

/// Uniform double in [0, 1) from a counter-based generator.
double keyed_uniform(std::uint64_t seed, std::uint64_t counter);
/// Mixes several integers into one 64-bit key.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

}  // namespace nfpose
