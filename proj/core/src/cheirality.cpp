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

#include "nfpose/cheirality.hpp"

#include <cmath>
#include <numbers>

#include "nfpose/error.hpp"

namespace nfpose {
namespace {

double normal_pdf(double t) { return std::exp(-0.5 * t * t) / std::sqrt(2.0 * std::numbers::pi); }
double normal_cdf(double t) { return 0.5 * std::erfc(-t / std::numbers::sqrt2); }

// a = A^T g and b = B^T g for every sample, computed once per solve.
struct Prepared {
  std::vector<Vec3> a;
  std::vector<Vec3> b;
  std::vector<double> n;
  std::vector<double> w;
  double weight_sum = 0.0;
};

Prepared prepare(const NormalFlowField& field) {
  Prepared p;
  p.a.reserve(field.size());
  p.b.reserve(field.size());
  for (const FlowSample& s : field.samples()) {
    const InteractionMatrices m = interaction_matrices(s.point);
    p.a.push_back(m.translational.transpose() * s.g);
    p.b.push_back(m.rotational.transpose() * s.g);
    p.n.push_back(s.n);
    p.w.push_back(s.weight);
    p.weight_sum += s.weight;
  }
  if (!(p.weight_sum > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "sample weights sum to zero");
  }
  return p;
}

CheiralityObjective evaluate(const Prepared& p, const Vec3& v, const Vec3& omega, double s) {
  CheiralityObjective out;
  for (std::size_t i = 0; i < p.n.size(); ++i) {
    const double trans = p.a[i].dot(v);
    const double derot = p.n[i] - p.b[i].dot(omega);
    const double r = trans * derot;
    const double w = p.w[i];
    out.value += w * gelu(-s * r) / s;
    const double dr = -w * gelu_derivative(-s * r);  // d/d rho
    out.grad_linear += (dr * derot) * p.a[i];
    out.grad_angular -= (dr * trans) * p.b[i];
  }
  out.value /= p.weight_sum;
  out.grad_linear /= p.weight_sum;
  out.grad_angular /= p.weight_sum;
  return out;
}

}  // namespace

double gelu(double t) { return t * normal_cdf(t); }

double gelu_derivative(double t) { return normal_cdf(t) + t * normal_pdf(t); }

double gelu_second_derivative(double t) { return normal_pdf(t) * (2.0 - t * t); }

double rho(const FlowSample& sample, const CameraMotion& motion) {
  const InteractionMatrices m = interaction_matrices(sample.point);
  const double trans = sample.g.dot(m.translational * motion.linear);
  const double rot = sample.g.dot(m.rotational * motion.angular);
  return trans * (sample.n - rot);
}

CheiralityObjective cheirality_objective(const NormalFlowField& field, const CameraMotion& motion,
                                         double sharpness) {
  if (!(sharpness > 0.0)) throw Error(ErrorCode::kInvalidArgument, "sharpness must be positive");
  return evaluate(prepare(field), motion.linear, motion.angular, sharpness);
}

PoseEstimate solve_pose(const CheiralityProblem& problem) {
  const NormalFlowField& field = problem.field;
  if (field.size() < kMinCheiralitySamples) {
    throw Error(ErrorCode::kTooFewSamples, "cheirality solve needs at least " +
                                               std::to_string(kMinCheiralitySamples) +
                                               " samples, got " + std::to_string(field.size()));
  }
  if (!problem.init.finite() || !(problem.init.linear.norm() > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "initial motion must be finite with nonzero V");
  }
  if (problem.max_outer_rounds <= 0 || !(problem.sharpness > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "outer rounds and sharpness must be positive");
  }
  problem.optimizer_cfg.validate();

  const Prepared prep = prepare(field);
  const double s = problem.sharpness;
  Vec3 v = problem.init.linear.normalized();
  Vec3 omega = problem.init.angular;

  double max_trans = 0.0;
  for (const Vec3& a : prep.a) max_trans = std::max(max_trans, std::abs(a.dot(v)));
  if (max_trans < 1e-9) {
    throw Error(ErrorCode::kDegenerateField,
                "translational flow component vanishes for the initial V");
  }

  const OptimizerConfig& cfg = problem.optimizer_cfg;
  PoseEstimate est;
  double f = evaluate(prep, v, omega, s).value;
  est.round_objectives.push_back(f);

  const Objective over_v = [&](const Eigen::VectorXd& x, Eigen::VectorXd& grad) {
    const CheiralityObjective o = evaluate(prep, x, omega, s);
    grad = o.grad_linear;
    return o.value;
  };
  const Objective over_omega = [&](const Eigen::VectorXd& x, Eigen::VectorXd& grad) {
    const CheiralityObjective o = evaluate(prep, v, x, s);
    grad = o.grad_angular;
    return o.value;
  };

  // max(f, 0) < tol, which for tol > 0 also stops on a negative plateau.
  auto below_tolerance = [&](double value) { return std::max(value, 0.0) < cfg.objective_tolerance; };

  while (!below_tolerance(f) && est.rounds < problem.max_outer_rounds) {
    SolveReport rv = minimize_on_sphere(over_v, Eigen::VectorXd(v), cfg);
    v = rv.x_final;
    est.reports.push_back(std::move(rv));

    if (!below_tolerance(est.reports.back().f_final)) {
      SolveReport ro = minimize(over_omega, Eigen::VectorXd(omega), cfg);
      omega = ro.x_final;
      est.reports.push_back(std::move(ro));
    }

    const double f_new = evaluate(prep, v, omega, s).value;
    ++est.rounds;
    est.round_objectives.push_back(f_new);
    const double change = std::abs(f - f_new);
    f = f_new;
    if (change < problem.outer_tolerance) break;
  }

  est.motion = {v, omega};
  est.objective_value = f;
  return est;
}

std::optional<double> depth_from_pose(const FlowSample& sample, const CameraMotion& motion) {
  const InteractionMatrices m = interaction_matrices(sample.point);
  const double trans = sample.g.dot(m.translational * motion.linear);
  const double denom = sample.n - sample.g.dot(m.rotational * motion.angular);
  if (std::abs(denom) <= 1e-9) return std::nullopt;
  return trans / denom;
}

}  // namespace nfpose
