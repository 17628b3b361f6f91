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

#include "oracles.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Geometry>

namespace nfpose::testing {
namespace {

double angle_of(const Eigen::Matrix3d& r) {
  const double c = std::clamp((r.trace() - 1.0) / 2.0, -1.0, 1.0);
  return std::acos(c);
}

Eigen::Matrix<double, 3, Eigen::Dynamic> positions(const Trajectory& t) {
  Eigen::Matrix<double, 3, Eigen::Dynamic> m(3, t.size());
  for (std::size_t i = 0; i < t.size(); ++i) m.col(static_cast<Eigen::Index>(i)) = t[i].translation;
  return m;
}

}  // namespace

Eigen::Matrix4d homogeneous(const AbsolutePose& p) {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = p.rotation.matrix();
  m.topRightCorner<3, 1>() = p.translation;
  return m;
}

Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                            const Eigen::VectorXd& x, double h) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Eigen::VectorXd xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    g[i] = (f(xp) - f(xm)) / (2.0 * h);
  }
  return g;
}

double brute_ate(const Trajectory& est, const Trajectory& ref, AlignmentMode mode) {
  Eigen::Matrix4d s = Eigen::Matrix4d::Identity();
  if (mode != AlignmentMode::kNone) {
    s = Eigen::umeyama(positions(est), positions(ref), mode == AlignmentMode::kRigidScale);
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < est.size(); ++i) {
    const Eigen::Matrix4d e = homogeneous(ref[i]).inverse() * s * homogeneous(est[i]);
    sum += e.topRightCorner<3, 1>().squaredNorm();
  }
  return std::sqrt(sum / static_cast<double>(est.size()));
}

BruteRpe brute_rpe(const Trajectory& est, const Trajectory& ref, int delta) {
  BruteRpe out;
  double sum_t = 0.0, sum_r = 0.0;
  for (std::size_t i = 0; i + delta < est.size(); ++i) {
    const std::size_t j = i + delta;
    const Eigen::Matrix4d q = homogeneous(ref[i]).inverse() * homogeneous(ref[j]);
    const Eigen::Matrix4d p = homogeneous(est[i]).inverse() * homogeneous(est[j]);
    const Eigen::Matrix4d f = q.inverse() * p;
    sum_t += f.topRightCorner<3, 1>().squaredNorm();
    sum_r += angle_of(f.topLeftCorner<3, 3>());
    ++out.pairs;
  }
  out.t_rel = std::sqrt(sum_t / out.pairs);
  out.r_rel = sum_r / out.pairs * 180.0 / std::numbers::pi;
  return out;
}

BruteRpe brute_rpe_segments(const Trajectory& est, const Trajectory& ref,
                            const std::vector<double>& lengths) {
  const std::size_t n = ref.size();
  BruteRpe out;
  double sum_t = 0.0, sum_r = 0.0;
  for (std::size_t first = 0; first < n; ++first) {
    for (double len : lengths) {
      // walk forward accumulating traveled distance from `first`
      double traveled = 0.0;
      std::size_t last = first;
      bool found = false;
      for (std::size_t k = first + 1; k < n; ++k) {
        traveled += (ref[k].translation - ref[k - 1].translation).norm();
        if (traveled > len) {
          last = k;
          found = true;
          break;
        }
      }
      if (!found) continue;
      const Eigen::Matrix4d q = homogeneous(ref[first]).inverse() * homogeneous(ref[last]);
      const Eigen::Matrix4d p = homogeneous(est[first]).inverse() * homogeneous(est[last]);
      const Eigen::Matrix4d f = q.inverse() * p;
      sum_t += f.topRightCorner<3, 1>().norm() / len;
      sum_r += angle_of(f.topLeftCorner<3, 3>()) / len;
      ++out.pairs;
    }
  }
  out.t_rel = 100.0 * sum_t / out.pairs;
  out.r_rel = 100.0 * sum_r / out.pairs * 180.0 / std::numbers::pi;
  return out;
}

double brute_pee(const std::vector<Vec2>& flow, const std::vector<Vec2>& grads,
                 const std::vector<Vec2>& gt_normal_flow) {
  double sum = 0.0;
  for (std::size_t i = 0; i < flow.size(); ++i) {
    const double gx = grads[i].x(), gy = grads[i].y();
    const double k = (flow[i].x() * gx + flow[i].y() * gy) / (gx * gx + gy * gy);
    const double dx = gt_normal_flow[i].x() - k * gx;
    const double dy = gt_normal_flow[i].y() - k * gy;
    sum += std::sqrt(dx * dx + dy * dy);
  }
  return sum / static_cast<double>(flow.size());
}

Vec2 optical_flow(const ImagePoint& p, double z, const CameraMotion& m) {
  // Standard instantaneous motion field in calibrated coordinates.
  const double x = p.x, y = p.y;
  const Vec3& v = m.linear;
  const Vec3& w = m.angular;
  const double u = (-v.x() + x * v.z()) / z + x * y * w.x() - (x * x + 1) * w.y() + y * w.z();
  const double vv = (-v.y() + y * v.z()) / z + (y * y + 1) * w.x() - x * y * w.y() - x * w.z();
  return {u, vv};
}

Trajectory random_trajectory(std::size_t n, unsigned seed, double step) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::vector<AbsolutePose> poses;
  AbsolutePose p;
  p.rotation = so3_exp(Vec3(nd(rng), nd(rng), nd(rng)) * 0.5);
  p.translation = Vec3(nd(rng), nd(rng), nd(rng));
  for (std::size_t i = 0; i < n; ++i) {
    p.timestamp = static_cast<double>(i) * 0.1;
    poses.push_back(p);
    p.translation += p.rotation * Vec3(0.2 * nd(rng), 0.2 * nd(rng), step);
    p.rotation = p.rotation * so3_exp(Vec3(nd(rng), nd(rng), nd(rng)) * 0.05);
  }
  return Trajectory(std::move(poses));
}

NormalFlowField random_field(std::size_t n, unsigned seed, const CameraMotion& motion, double zmin,
                             double zmax, std::vector<double>* depths) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(-1.0, 1.0);
  std::uniform_real_distribution<double> ang(0.0, 2.0 * std::numbers::pi);
  std::uniform_real_distribution<double> depth(zmin, zmax);
  std::vector<FlowSample> samples;
  if (depths) depths->clear();
  for (std::size_t i = 0; i < n; ++i) {
    FlowSample s;
    s.point = {coord(rng), coord(rng)};
    const double a = ang(rng);
    s.g = {std::cos(a), std::sin(a)};
    const double z = depth(rng);
    s.n = optical_flow(s.point, z, motion).dot(s.g);
    samples.push_back(s);
    if (depths) depths->push_back(z);
  }
  return NormalFlowField(std::move(samples));
}

CameraMotion random_motion(unsigned seed, double max_rotation) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Vec3 v(nd(rng), nd(rng), nd(rng));
  Vec3 w(nd(rng), nd(rng), nd(rng));
  return {v.normalized(), w.normalized() * max_rotation * u(rng)};
}

}  // namespace nfpose::testing
