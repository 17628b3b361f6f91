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

// Bi-level refinement of a coarse pose against the cheirality-refined pose,
// and a generic differentiable argmin layer (implicit differentiation of
// z*(theta) = argmin_z L(z; theta)).

#include <functional>
#include <vector>

#include <Eigen/Core>

#include "nfpose/cheirality.hpp"
#include "nfpose/flowfield.hpp"
#include "nfpose/optimizer.hpp"

namespace nfpose {

using Vec6 = Eigen::Matrix<double, 6, 1>;

/// Free motion parameters (V_c, Omega_c) being refined.
struct CoarsePose {
  CameraMotion motion;
};

/// Output of the cheirality layer; |V_r| = 1.
struct RefinedPose {
  CameraMotion motion;
};

struct RefinementLoss {
  double value = 0.0;
  Vec6 grad = Vec6::Zero();  // d value / d (V_c, Omega_c)
  std::size_t used_samples = 0;
};

/// Normal-flow consistency of the coarse motion using the inverse depth
/// implied by the refined motion:
///   zeta = (n - b.Omega_r) / (a.V_r),   m = zeta (a.V_c) + b.Omega_c,
///   value = weighted mean of (n - m)^2.
/// Samples with |a.V_r| < 1e-9 are skipped; kAllSamplesDegenerate when
/// none remain.
RefinementLoss refinement_loss(const CoarsePose& pc, const RefinedPose& pr,
                               const NormalFlowField& field);

/// Lower-level objective L(z; theta) with analytic derivatives.
struct LowerLevelObjective {
  /// Value; writes grad_z into `grad` (pre-sized to z.size()).
  std::function<double(const Eigen::VectorXd& z, const Eigen::VectorXd& theta,
                       Eigen::VectorXd& grad)>
      value;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd& z, const Eigen::VectorXd& theta)>
      hessian_zz;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd& z, const Eigen::VectorXd& theta)>
      hessian_ztheta;
};

struct ArgminResult {
  Eigen::VectorXd z;
  double gradient_norm = 0.0;
  SolveReport report;
};

struct ImplicitGradient {
  Eigen::MatrixXd jacobian;  // dz*/dtheta, dim(z) x dim(theta)
  double condition_number = 0.0;
};

inline constexpr double kMaxHessianCondition = 1e12;
inline constexpr double kStationarityTolerance = 1e-8;

class ArgminLayer {
 public:
  ArgminLayer(LowerLevelObjective objective, OptimizerConfig solver);

  /// Minimizes L(.; theta) from `z_init`.
  ArgminResult solve(const Eigen::VectorXd& theta, const Eigen::VectorXd& z_init) const;

  const LowerLevelObjective& objective() const { return objective_; }
  const OptimizerConfig& solver() const { return solver_; }

 private:
  LowerLevelObjective objective_;
  OptimizerConfig solver_;
};

/// dz*/dtheta = -[d2L/dz2]^-1 d2L/dz dtheta at (z_star, theta).
/// Throws kNotStationary if |grad_z L| >= 1e-8 there and kSingularHessian
/// if the Hessian condition number exceeds 1e12.
ImplicitGradient implicit_gradient(const ArgminLayer& layer, const Eigen::VectorXd& z_star,
                                   const Eigen::VectorXd& theta);

/// The rotation sub-problem of the cheirality solve as an argmin layer:
/// z = Omega, theta = V, L = weighted mean of GELU(-s rho)/s.
LowerLevelObjective cheirality_rotation_objective(const NormalFlowField& field,
                                                  double sharpness = kDefaultSharpness);

struct RefineOptions {
  OptimizerConfig optimizer_cfg;
  int max_outer_rounds = 20;
  double outer_tolerance = 1e-10;
  double sharpness = kDefaultSharpness;
};

/// One entry per evaluated coarse pose: steps + 1 in total (the last entry
/// is the pose after the final update).
struct RefineTrace {
  std::vector<CoarsePose> coarse;
  std::vector<RefinedPose> refined;
  std::vector<double> losses;
};

/// Gradient descent on the coarse pose. Each step solves the cheirality
/// lower level warm-started at the current coarse pose, evaluates the
/// refinement loss and moves the coarse pose against its gradient (the
/// refined pose is held constant within a step).
RefineTrace refine(const CoarsePose& pc0, const NormalFlowField& field, int steps,
                   double step_size, const RefineOptions& options = {});

}  // namespace nfpose
