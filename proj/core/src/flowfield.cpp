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

#include "nfpose/flowfield.hpp"

#include <algorithm>
#include <cmath>

#include "nfpose/error.hpp"

namespace nfpose {

NormalFlowField::NormalFlowField(std::vector<FlowSample> samples, FramePair frame_pair)
    : samples_(std::move(samples)), frame_pair_(frame_pair) {
  if (samples_.empty()) throw Error(ErrorCode::kEmptyField, "normal flow field has no samples");
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    const FlowSample& s = samples_[i];
    if (!std::isfinite(s.point.x) || !std::isfinite(s.point.y) || !std::isfinite(s.n) ||
        !s.g.allFinite()) {
      throw Error(ErrorCode::kInvalidArgument, "sample " + std::to_string(i) + " is not finite");
    }
    if (std::abs(s.g.norm() - 1.0) > 1e-9) {
      throw Error(ErrorCode::kInvalidArgument,
                  "sample " + std::to_string(i) + " gradient direction is not unit length");
    }
    if (!(s.weight >= 0.0) || !std::isfinite(s.weight)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "sample " + std::to_string(i) + " has a negative weight");
    }
  }
  std::vector<std::pair<double, double>> pts;
  pts.reserve(samples_.size());
  for (const FlowSample& s : samples_) pts.emplace_back(s.point.x, s.point.y);
  std::sort(pts.begin(), pts.end());
  if (std::adjacent_find(pts.begin(), pts.end()) != pts.end()) {
    throw Error(ErrorCode::kDuplicatePoint, "normal flow field repeats an image point");
  }
}

void DepthMap::validate() const {
  for (std::size_t i = 0; i < depths.size(); ++i) {
    if (!(depths[i] > 0.0) || !std::isfinite(depths[i])) {
      throw Error(ErrorCode::kInvalidArgument,
                  "depth " + std::to_string(i) + " must be positive and finite");
    }
  }
}

void ImagePairDerivatives::validate() const {
  if (ix.rows() != iy.rows() || ix.cols() != iy.cols() || ix.rows() != it.rows() ||
      ix.cols() != it.cols()) {
    throw Error(ErrorCode::kInvalidArgument, "derivative rasters differ in size");
  }
  if (!ix.allFinite() || !iy.allFinite() || !it.allFinite()) {
    throw Error(ErrorCode::kInvalidArgument, "derivative rasters contain non-finite values");
  }
}

ImagePairDerivatives image_derivatives(const Eigen::MatrixXd& frame0,
                                       const Eigen::MatrixXd& frame1) {
  if (frame0.rows() != frame1.rows() || frame0.cols() != frame1.cols()) {
    throw Error(ErrorCode::kInvalidArgument, "frames differ in size");
  }
  const Eigen::Index rows = frame0.rows();
  const Eigen::Index cols = frame0.cols();
  const Eigen::MatrixXd mean = 0.5 * (frame0 + frame1);

  ImagePairDerivatives d;
  d.ix = Eigen::MatrixXd::Zero(rows, cols);
  d.iy = Eigen::MatrixXd::Zero(rows, cols);
  d.it = frame1 - frame0;
  for (Eigen::Index v = 1; v + 1 < rows; ++v) {
    for (Eigen::Index u = 1; u + 1 < cols; ++u) {
      d.ix(v, u) = 0.5 * (mean(v, u + 1) - mean(v, u - 1));
      d.iy(v, u) = 0.5 * (mean(v + 1, u) - mean(v - 1, u));
    }
  }
  return d;
}

NormalFlowField normal_flow_from_derivatives(const ImagePairDerivatives& d,
                                             const CameraIntrinsics& k, double grad_threshold,
                                             FramePair frame_pair) {
  d.validate();
  k.validate();
  if (!(grad_threshold > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "gradient threshold must be positive");
  }
  std::vector<FlowSample> samples;
  for (Eigen::Index v = 0; v < d.ix.rows(); ++v) {
    for (Eigen::Index u = 0; u < d.ix.cols(); ++u) {
      const Vec2 grad_px(d.ix(v, u), d.iy(v, u));
      if (grad_px.norm() < grad_threshold) continue;
      const Vec2 grad = pixel_gradient_to_normalized(grad_px, k);
      const double mag = grad.norm();
      FlowSample s;
      s.point = pixel_to_normalized(Vec2(static_cast<double>(u), static_cast<double>(v)), k);
      s.g = grad / mag;
      s.n = -d.it(v, u) / mag;
      samples.push_back(s);
    }
  }
  if (samples.empty()) {
    throw Error(ErrorCode::kEmptyField, "no pixel passes the gradient threshold");
  }
  return NormalFlowField(std::move(samples), frame_pair);
}

NormalFlowField synthesize_normal_flow(const CameraMotion& motion, const DepthMap& depths,
                                       std::span<const SampleSite> sites, FramePair frame_pair) {
  depths.validate();
  if (depths.depths.size() != sites.size()) {
    throw Error(ErrorCode::kInvalidArgument, "depth count does not match site count");
  }
  std::vector<FlowSample> samples;
  samples.reserve(sites.size());
  for (std::size_t i = 0; i < sites.size(); ++i) {
    const InteractionMatrices m = interaction_matrices(sites[i].point);
    const double trans = sites[i].g.dot(m.translational * motion.linear);
    const double rot = sites[i].g.dot(m.rotational * motion.angular);
    FlowSample s;
    s.point = sites[i].point;
    s.g = sites[i].g;
    s.n = trans / depths.depths[i] + rot;
    samples.push_back(s);
  }
  return NormalFlowField(std::move(samples), frame_pair);
}

FlowProjection project_optical_flow(const Vec2& flow, const Vec2& grad) {
  const double n2 = grad.squaredNorm();
  if (!(n2 > 0.0)) throw Error(ErrorCode::kZeroGradient, "cannot project onto a zero gradient");
  const double along = flow.dot(grad);
  return {(along / n2) * grad, along / std::sqrt(n2)};
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  // splitmix64 finalizer over a combined word
  std::uint64_t z = a * 0x9E3779B97F4A7C15ULL + b + 0x632BE59BD9B4E019ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double keyed_uniform(std::uint64_t seed, std::uint64_t counter) {
  return static_cast<double>(mix_seed(seed, counter) >> 11) * 0x1.0p-53;
}

NormalFlowField inject_noise(const NormalFlowField& field, double epsilon_pct,
                             std::uint64_t seed) {
  if (!(epsilon_pct >= 0.0) || !std::isfinite(epsilon_pct)) {
    throw Error(ErrorCode::kInvalidArgument, "noise percentage must be nonnegative");
  }
  std::vector<FlowSample> out(field.samples().begin(), field.samples().end());
  if (epsilon_pct == 0.0) return NormalFlowField(std::move(out), field.frame_pair());

  double mean_abs = 0.0;
  for (const FlowSample& s : out) mean_abs += std::abs(s.n);
  mean_abs /= static_cast<double>(out.size());
  const double bound = epsilon_pct / 100.0 * mean_abs;

  for (std::size_t i = 0; i < out.size(); ++i) {
    const double u = keyed_uniform(seed, i);
    out[i].n += bound * (2.0 * u - 1.0);
  }
  return NormalFlowField(std::move(out), field.frame_pair());
}

}  // namespace nfpose
