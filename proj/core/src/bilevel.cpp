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

#include "nfpose/bilevel.hpp"

#include <cmath>
#include <limits>
#include <memory>

#include <Eigen/Cholesky>
#include <Eigen/SVD>

#include "nfpose/error.hpp"

namespace nfpose {

namespace {
constexpr int kNewtonPolishSteps = 8;
}  // namespace

RefinementLoss refinement_loss(const CoarsePose& pc, const RefinedPose& pr,
                               const NormalFlowField& field) {
  RefinementLoss out;
  double weight_sum = 0.0;
  for (const FlowSample& s : field.samples()) {
    const InteractionMatrices m = interaction_matrices(s.point);
    const Vec3 a = m.translational.transpose() * s.g;
    const Vec3 b = m.rotational.transpose() * s.g;
    const double trans_r = a.dot(pr.motion.linear);
    if (std::abs(trans_r) < 1e-9) continue;
    const double zeta = (s.n - b.dot(pr.motion.angular)) / trans_r;
    const double model = zeta * a.dot(pc.motion.linear) + b.dot(pc.motion.angular);
    const double r = s.n - model;
    out.value += s.weight * r * r;
    out.grad.head<3>() += (-2.0 * s.weight * r * zeta) * a;
    out.grad.tail<3>() += (-2.0 * s.weight * r) * b;
    weight_sum += s.weight;
    ++out.used_samples;
  }
  if (out.used_samples == 0 || !(weight_sum > 0.0)) {
    throw Error(ErrorCode::kAllSamplesDegenerate,
                "refined translation has no flow component at any sample");
  }
  out.value /= weight_sum;
  out.grad /= weight_sum;
  return out;
}

ArgminLayer::ArgminLayer(LowerLevelObjective objective, OptimizerConfig solver)
    : objective_(std::move(objective)), solver_(solver) {
  if (!objective_.value || !objective_.hessian_zz || !objective_.hessian_ztheta) {
    throw Error(ErrorCode::kInvalidArgument, "lower-level objective is incomplete");
  }
  solver_.validate();
}

ArgminResult ArgminLayer::solve(const Eigen::VectorXd& theta,
                                const Eigen::VectorXd& z_init) const {
  const Objective f = [&](const Eigen::VectorXd& z, Eigen::VectorXd& grad) {
    return objective_.value(z, theta, grad);
  };
  ArgminResult out;
  out.report = minimize(f, z_init, solver_);
  out.z = out.report.x_final;
  Eigen::VectorXd g = Eigen::VectorXd::Zero(out.z.size());
  objective_.value(out.z, theta, g);

  // L-BFGS stalls once f stops resolving decrease; Newton steps on the
  // analytic Hessian drive the gradient to roundoff. A step is kept only
  // if it shrinks the gradient.
  for (int it = 0; it < kNewtonPolishSteps && g.norm() > 0.0; ++it) {
    const Eigen::MatrixXd h = objective_.hessian_zz(out.z, theta);
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(h);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) break;
    const Eigen::VectorXd step = ldlt.solve(g);
    if (!step.allFinite()) break;
    const Eigen::VectorXd z_next = out.z - step;
    Eigen::VectorXd g_next = Eigen::VectorXd::Zero(out.z.size());
    const double f_next = objective_.value(z_next, theta, g_next);
    if (!std::isfinite(f_next) || !(g_next.norm() < g.norm())) break;
    out.z = z_next;
    g = g_next;
  }
  out.gradient_norm = g.norm();
  return out;
}

ImplicitGradient implicit_gradient(const ArgminLayer& layer, const Eigen::VectorXd& z_star,
                                   const Eigen::VectorXd& theta) {
  const LowerLevelObjective& obj = layer.objective();
  Eigen::VectorXd g = Eigen::VectorXd::Zero(z_star.size());
  obj.value(z_star, theta, g);
  if (!(g.norm() < kStationarityTolerance)) {
    throw Error(ErrorCode::kNotStationary,
                "z is not a stationary point of the lower level (|grad| = " +
                    std::to_string(g.norm()) + ")");
  }
  const Eigen::MatrixXd h = obj.hessian_zz(z_star, theta);
  const Eigen::MatrixXd h_mixed = obj.hessian_ztheta(z_star, theta);
  if (h.rows() != z_star.size() || h.cols() != z_star.size() || h_mixed.rows() != z_star.size() ||
      h_mixed.cols() != theta.size()) {
    throw Error(ErrorCode::kInvalidArgument, "Hessian blocks have the wrong shape");
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(h, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double smax = sv(0);
  const double smin = sv(sv.size() - 1);
  const double cond = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
  if (!(cond <= kMaxHessianCondition)) {
    throw Error(ErrorCode::kSingularHessian,
                "lower-level Hessian condition number " + std::to_string(cond));
  }
  ImplicitGradient out;
  out.jacobian = -svd.solve(h_mixed);
  out.condition_number = cond;
  return out;
}

LowerLevelObjective cheirality_rotation_objective(const NormalFlowField& field, double sharpness) {
  if (!(sharpness > 0.0)) throw Error(ErrorCode::kInvalidArgument, "sharpness must be positive");
  struct Data {
    std::vector<Vec3> a, b;
    std::vector<double> n, w;
    double weight_sum = 0.0;
    double s = 1.0;
  };
  auto d = std::make_shared<Data>();
  d->s = sharpness;
  for (const FlowSample& smp : field.samples()) {
    const InteractionMatrices m = interaction_matrices(smp.point);
    d->a.push_back(m.translational.transpose() * smp.g);
    d->b.push_back(m.rotational.transpose() * smp.g);
    d->n.push_back(smp.n);
    d->w.push_back(smp.weight);
    d->weight_sum += smp.weight;
  }

  // rho = (a.V)(n - b.Omega):  d rho/dOmega = -(a.V) b,  d2 rho/dOmega dV = -b a^T.
  // R(rho) = GELU(-s rho)/s:   R' = -GELU'(-s rho),      R'' = s GELU''(-s rho).
  LowerLevelObjective obj;
  obj.value = [d](const Eigen::VectorXd& omega, const Eigen::VectorXd& v, Eigen::VectorXd& grad) {
    double value = 0.0;
    grad.setZero(3);
    for (std::size_t i = 0; i < d->n.size(); ++i) {
      const double trans = d->a[i].dot(v);
      const double r = trans * (d->n[i] - d->b[i].dot(omega));
      value += d->w[i] * gelu(-d->s * r) / d->s;
      grad += (d->w[i] * gelu_derivative(-d->s * r) * trans) * d->b[i];
    }
    grad /= d->weight_sum;
    return value / d->weight_sum;
  };
  obj.hessian_zz = [d](const Eigen::VectorXd& omega, const Eigen::VectorXd& v) {
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(3, 3);
    for (std::size_t i = 0; i < d->n.size(); ++i) {
      const double trans = d->a[i].dot(v);
      const double r = trans * (d->n[i] - d->b[i].dot(omega));
      const double r2 = d->s * gelu_second_derivative(-d->s * r);
      h += (d->w[i] * r2 * trans * trans) * (d->b[i] * d->b[i].transpose());
    }
    return Eigen::MatrixXd(h / d->weight_sum);
  };
  obj.hessian_ztheta = [d](const Eigen::VectorXd& omega, const Eigen::VectorXd& v) {
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(3, 3);
    for (std::size_t i = 0; i < d->n.size(); ++i) {
      const double trans = d->a[i].dot(v);
      const double derot = d->n[i] - d->b[i].dot(omega);
      const double r = trans * derot;
      const double r1 = -gelu_derivative(-d->s * r);
      const double r2 = d->s * gelu_second_derivative(-d->s * r);
      // d/dV of [R'(rho) * (-(a.V) b)]
      h += d->w[i] * (r2 * (-trans) * derot * (d->b[i] * d->a[i].transpose()) -
                      r1 * (d->b[i] * d->a[i].transpose()));
    }
    return Eigen::MatrixXd(h / d->weight_sum);
  };
  return obj;
}

RefineTrace refine(const CoarsePose& pc0, const NormalFlowField& field, int steps,
                   double step_size, const RefineOptions& options) {
  if (steps < 1) throw Error(ErrorCode::kInvalidArgument, "refine needs at least one step");
  if (!(step_size > 0.0) || !std::isfinite(step_size)) {
    throw Error(ErrorCode::kInvalidArgument, "step size must be positive");
  }
  RefineTrace trace;
  CoarsePose pc = pc0;
  for (int k = 0; k <= steps; ++k) {
    CheiralityProblem lower{field, pc.motion, options.optimizer_cfg, options.max_outer_rounds,
                            options.outer_tolerance, options.sharpness};
    const PoseEstimate est = solve_pose(lower);
    const RefinedPose pr{est.motion};
    const RefinementLoss loss = refinement_loss(pc, pr, field);
    trace.coarse.push_back(pc);
    trace.refined.push_back(pr);
    trace.losses.push_back(loss.value);
    if (k == steps) break;
    pc.motion = CameraMotion::from_stacked(pc.motion.stacked() - step_size * loss.grad);
  }
  return trace;
}

}  // namespace nfpose
