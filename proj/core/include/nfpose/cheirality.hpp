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

// Cheirality (depth positivity) constraint on normal flow.
//
// For a sample with a = A^T g and b = B^T g the flow model is
//   n = (a.V) / Z + b.Omega,
// so with Z > 0 the product rho = (a.V) (n - b.Omega) is nonnegative at the
// true motion. Motion is estimated by minimizing the weighted mean of
// R(rho) = GELU(-s rho) / s, where s is a sharpness factor (s = 1 is the
// bare GELU; larger s approaches a hinge on the violation -rho).

#include <optional>
#include <vector>

#include "nfpose/flowfield.hpp"
#include "nfpose/geometry.hpp"
#include "nfpose/optimizer.hpp"

namespace nfpose {

/// Sharpness used when none is given. Chosen so that rho values of
/// normalized-coordinate flow (typically 1e-4 .. 1) fall in the hinge-like
/// part of the GELU.
inline constexpr double kDefaultSharpness = 1e4;
inline constexpr std::size_t kMinCheiralitySamples = 6;

double gelu(double t);
double gelu_derivative(double t);
double gelu_second_derivative(double t);

/// Cheirality product for one sample.
double rho(const FlowSample& sample, const CameraMotion& motion);

struct CheiralityObjective {
  double value = 0.0;
  Vec3 grad_linear = Vec3::Zero();
  Vec3 grad_angular = Vec3::Zero();
};

/// Weighted mean of GELU(-s rho)/s and its exact gradient.
CheiralityObjective cheirality_objective(const NormalFlowField& field, const CameraMotion& motion,
                                         double sharpness = kDefaultSharpness);

struct CheiralityProblem {
  NormalFlowField field;
  CameraMotion init;
  OptimizerConfig optimizer_cfg;
  int max_outer_rounds = 20;
  double outer_tolerance = 1e-10;
  double sharpness = kDefaultSharpness;
};

struct PoseEstimate {
  CameraMotion motion;  // |linear| == 1
  double objective_value = 0.0;
  int rounds = 0;
  /// Objective at the start and after each completed round.
  std::vector<double> round_objectives;
  /// Inner solves in order: V, Omega, V, Omega, ...
  std::vector<SolveReport> reports;
};

/// Alternating minimization: V on the unit sphere with Omega fixed, then
/// Omega with V fixed, until the objective drops below the optimizer's
/// objective tolerance, changes by less than outer_tolerance, or
/// max_outer_rounds is reached.
///
/// Throws kTooFewSamples (< 6 samples) and kDegenerateField when
/// (g.A) V vanishes at every sample for the initial V.
PoseEstimate solve_pose(const CheiralityProblem& problem);

/// Depth implied by the motion: Z = (a.V) / (n - b.Omega). Empty when the
/// denominator is within 1e-9 of zero. The sign is not checked.
std::optional<double> depth_from_pose(const FlowSample& sample, const CameraMotion& motion);

}  // namespace nfpose
