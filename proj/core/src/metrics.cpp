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

#include "nfpose/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>
#include <json.hpp>

#include "nfpose/error.hpp"

namespace nfpose {
namespace {

constexpr double kRadToDeg = 180.0 / std::numbers::pi;

void require_same_length(const Trajectory& a, const Trajectory& b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::kSampleSetMismatch,
                "trajectories differ in length (" + std::to_string(a.size()) + " vs " +
                    std::to_string(b.size()) + ")");
  }
}

// Relative motion P_i^-1 P_j as (rotation, translation).
struct Rel {
  Mat3 r;
  Vec3 t;
};

Rel between(const AbsolutePose& a, const AbsolutePose& b) {
  const Mat3 rt = a.rotation.matrix().transpose();
  return {rt * b.rotation.matrix(), rt * (b.translation - a.translation)};
}

// F = (Q_i^-1 Q_j)^-1 (P_i^-1 P_j)
Rel relative_error(const Trajectory& est, const Trajectory& ref, std::size_t i, std::size_t j) {
  const Rel q = between(ref[i], ref[j]);
  const Rel p = between(est[i], est[j]);
  const Mat3 qrt = q.r.transpose();
  return {qrt * p.r, qrt * (p.t - q.t)};
}

double rotation_angle(const Mat3& r) {
  return std::acos(std::clamp((r.trace() - 1.0) / 2.0, -1.0, 1.0));
}

}  // namespace

AlignmentResult horn_align(const Trajectory& estimated, const Trajectory& reference,
                           AlignmentMode mode) {
  require_same_length(estimated, reference);
  const std::size_t n = estimated.size();
  AlignmentResult out;
  if (mode != AlignmentMode::kNone && n < 3) {
    throw Error(ErrorCode::kDegenerateConfiguration, "alignment needs at least 3 poses");
  }

  if (mode != AlignmentMode::kNone) {
    Vec3 mu_e = Vec3::Zero();
    Vec3 mu_r = Vec3::Zero();
    for (std::size_t i = 0; i < n; ++i) {
      mu_e += estimated[i].translation;
      mu_r += reference[i].translation;
    }
    mu_e /= static_cast<double>(n);
    mu_r /= static_cast<double>(n);

    Mat3 m = Mat3::Zero();
    double sq_e = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const Vec3 x = estimated[i].translation - mu_e;
      const Vec3 y = reference[i].translation - mu_r;
      m += x * y.transpose();
      sq_e += x.squaredNorm();
    }

    // Symmetric 4x4 whose top eigenvector is the optimal unit quaternion.
    const double sxx = m(0, 0), sxy = m(0, 1), sxz = m(0, 2);
    const double syx = m(1, 0), syy = m(1, 1), syz = m(1, 2);
    const double szx = m(2, 0), szy = m(2, 1), szz = m(2, 2);
    Eigen::Matrix4d nm;
    nm << sxx + syy + szz, syz - szy, szx - sxz, sxy - syx,
          syz - szy, sxx - syy - szz, sxy + syx, szx + sxz,
          szx - sxz, sxy + syx, -sxx + syy - szz, syz + szy,
          sxy - syx, szx + sxz, syz + szy, -sxx - syy + szz;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> eig(nm);
    const Eigen::Vector4d q = eig.eigenvectors().col(3);
    out.rotation = Rotation::from_quaternion(Eigen::Quaterniond(q(0), q(1), q(2), q(3)));

    if (mode == AlignmentMode::kRigidScale) {
      if (!(sq_e > 0.0)) {
        throw Error(ErrorCode::kDegenerateConfiguration,
                    "estimated positions coincide; scale is undefined");
      }
      double num = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        num += (reference[i].translation - mu_r).dot(out.rotation * (estimated[i].translation - mu_e));
      }
      out.scale = num / sq_e;
      if (!(out.scale > 0.0)) {
        throw Error(ErrorCode::kDegenerateConfiguration, "alignment produced a nonpositive scale");
      }
    }
    out.translation = mu_r - out.scale * (out.rotation * mu_e);
  }

  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sum += (out.apply(estimated[i].translation) - reference[i].translation).squaredNorm();
  }
  out.residual_rmse = std::sqrt(sum / static_cast<double>(n));
  return out;
}

double ate(const Trajectory& estimated, const Trajectory& reference, AlignmentMode mode) {
  const AlignmentResult s = horn_align(estimated, reference, mode);
  double sum = 0.0;
  for (std::size_t i = 0; i < estimated.size(); ++i) {
    // trans(Q^-1 S P) = R_Q^T (s R T_P + t - T_Q)
    const Vec3 e = reference[i].rotation.matrix().transpose() *
                   (s.apply(estimated[i].translation) - reference[i].translation);
    sum += e.squaredNorm();
  }
  return std::sqrt(sum / static_cast<double>(estimated.size()));
}

MetricReport rpe(const Trajectory& estimated, const Trajectory& reference, int delta,
                 const std::optional<std::vector<double>>& segment_lengths) {
  require_same_length(estimated, reference);
  if (delta < 1) throw Error(ErrorCode::kInvalidArgument, "RPE interval must be >= 1");
  const std::size_t n = estimated.size();
  MetricReport out;
  out.delta = delta;

  if (!segment_lengths) {
    if (n <= static_cast<std::size_t>(delta)) {
      throw Error(ErrorCode::kTrajectoryTooShort,
                  "trajectory of " + std::to_string(n) + " poses is too short for delta " +
                      std::to_string(delta));
    }
    double sum_t = 0.0;
    double sum_r = 0.0;
    for (std::size_t i = 0; i + delta < n; ++i) {
      const Rel f = relative_error(estimated, reference, i, i + delta);
      RpePair p{i, i + delta, f.t.norm(), rotation_angle(f.r), 0.0};
      sum_t += p.translation_error * p.translation_error;
      sum_r += p.rotation_error;
      out.pairs.push_back(p);
    }
    const double m = static_cast<double>(out.pairs.size());
    out.t_rel = std::sqrt(sum_t / m);
    out.r_rel = sum_r / m * kRadToDeg;
    return out;
  }

  out.segment_mode = true;
  std::vector<double> dist(n, 0.0);
  for (std::size_t i = 1; i < n; ++i) {
    dist[i] = dist[i - 1] + (reference[i].translation - reference[i - 1].translation).norm();
  }
  double sum_t = 0.0;
  double sum_r = 0.0;
  for (std::size_t first = 0; first < n; ++first) {
    for (double len : *segment_lengths) {
      if (!(len > 0.0)) throw Error(ErrorCode::kInvalidArgument, "segment lengths must be positive");
      std::size_t last = first;
      while (last < n && !(dist[last] > dist[first] + len)) ++last;
      if (last >= n) continue;
      const Rel f = relative_error(estimated, reference, first, last);
      RpePair p{first, last, f.t.norm(), rotation_angle(f.r), len};
      sum_t += p.translation_error / len;
      sum_r += p.rotation_error / len;
      out.pairs.push_back(p);
    }
  }
  if (out.pairs.empty()) {
    throw Error(ErrorCode::kTrajectoryTooShort, "no segment of the requested lengths fits");
  }
  const double m = static_cast<double>(out.pairs.size());
  out.t_rel = 100.0 * sum_t / m;
  out.r_rel = 100.0 * sum_r / m * kRadToDeg;
  return out;
}

std::string metric_report_to_json(const MetricReport& report) {
  nlohmann::ordered_json j;
  j["ate_rmse_m"] = report.ate_rmse;
  j["t_rel_pct"] = report.t_rel;
  j["r_rel_deg_per_100m"] = report.r_rel;
  j["delta"] = report.delta;
  j["n_pairs"] = report.pairs.size();
  j["units"] = report.segment_mode ? "segment" : "frame";
  return j.dump(2);
}

double pee(std::span<const Vec2> predicted_flow, std::span<const Vec2> gradients,
           std::span<const Vec2> ground_truth_normal_flow) {
  if (predicted_flow.size() != gradients.size() ||
      predicted_flow.size() != ground_truth_normal_flow.size() || predicted_flow.empty()) {
    throw Error(ErrorCode::kSampleSetMismatch, "flow, gradient and ground-truth counts differ");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < predicted_flow.size(); ++i) {
    const double g2 = gradients[i].squaredNorm();
    if (!(g2 > 0.0)) throw Error(ErrorCode::kZeroGradient, "zero gradient in PEE input");
    const Vec2 projected = (gradients[i].dot(predicted_flow[i]) / g2) * gradients[i];
    sum += (ground_truth_normal_flow[i] - projected).norm();
  }
  return sum / static_cast<double>(predicted_flow.size());
}

double pee(std::span<const Vec2> predicted_flow, const NormalFlowField& ground_truth) {
  if (predicted_flow.size() != ground_truth.size()) {
    throw Error(ErrorCode::kSampleSetMismatch, "flow count differs from ground-truth samples");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < predicted_flow.size(); ++i) {
    sum += std::abs(ground_truth[i].n - ground_truth[i].g.dot(predicted_flow[i]));
  }
  return sum / static_cast<double>(predicted_flow.size());
}

double pee(const NormalFlowField& predicted, const NormalFlowField& ground_truth) {
  if (predicted.size() != ground_truth.size()) {
    throw Error(ErrorCode::kSampleSetMismatch, "fields have different sample counts");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const FlowSample& p = predicted[i];
    const FlowSample& g = ground_truth[i];
    if (!(p.point == g.point) || (p.g - g.g).norm() > 1e-9) {
      throw Error(ErrorCode::kSampleSetMismatch,
                  "sample " + std::to_string(i) + " differs in position or gradient direction");
    }
    sum += std::abs(g.n - p.n);
  }
  return sum / static_cast<double>(predicted.size());
}

}  // namespace nfpose
