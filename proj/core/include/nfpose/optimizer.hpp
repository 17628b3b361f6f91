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

// Limited-memory BFGS with a strong Wolfe line search, in plain Euclidean
// space and on the unit sphere (projected gradient + renormalization).

#include <functional>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace nfpose {

struct OptimizerConfig {
  int memory = 10;
  int max_iterations = 300;
  double objective_tolerance = 1e-20;
  /// Stop once the (tangent) gradient norm falls to this value.
  double gradient_tolerance = 1e-10;
  double gradient_clip_norm = 100.0;
  int line_search_max_steps = 100;
  double wolfe_c1 = 1e-4;
  double wolfe_c2 = 0.9;

  /// Throws kInvalidArgument unless 0 < c1 < c2 < 1 and counts are positive.
  void validate() const;
};

enum class Termination {
  kObjectiveTolerance,
  kMaxIterations,
  kGradientVanished,
  kLineSearchFailed,
};

std::string_view to_string(Termination t);

/// Line-search data for one accepted step along the search curve
/// phi(a) = f(x(a)): value and slope at a = 0 and at the accepted a.
struct LineSearchRecord {
  double step = 0.0;
  double f0 = 0.0;
  double slope0 = 0.0;
  double f = 0.0;
  double slope = 0.0;
};

struct SolveReport {
  Eigen::VectorXd x_final;
  double f_final = 0.0;
  int iterations = 0;
  int evaluations = 0;
  Termination termination = Termination::kMaxIterations;
  /// Objective at the start point and after every accepted step.
  std::vector<double> objective_trace;
  std::vector<LineSearchRecord> steps;
};

/// Returns f(x) and writes the gradient into `grad` (already sized).
/// Must be re-entrant.
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;

/// Throws kNonFiniteObjective if f or its gradient is not finite at x0.
SolveReport minimize(const Objective& f, const Eigen::VectorXd& x0,
                     const OptimizerConfig& cfg = {});

/// Same solver restricted to the unit sphere. `x0` must have unit norm
/// (1e-9); every iterate is renormalized.
SolveReport minimize_on_sphere(const Objective& f, const Eigen::VectorXd& x0,
                               const OptimizerConfig& cfg = {});

}  // namespace nfpose
