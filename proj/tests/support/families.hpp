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

// Problem families shared by the unit tests and the acceptance checks.

#include <random>

#include <Eigen/Core>

#include "nfpose/bilevel.hpp"
#include "nfpose/optimizer.hpp"

namespace nfpose::testing {

/// Random SPD matrix with eigenvalues spread log-uniformly over [1, cond].
Eigen::MatrixXd random_spd(int d, std::mt19937_64& rng, double cond = 50.0);

/// Quadratic plus cosine and log ripples; smooth, bounded below.
struct SmoothProblem {
  Objective f;
  Eigen::VectorXd x0;
};
SmoothProblem random_smooth_problem(std::mt19937_64& rng);

/// Number of accepted steps violating the strong Wolfe conditions.
int strong_wolfe_violations(const SolveReport& r, const OptimizerConfig& cfg);

/// L = 1/2 z'Qz - theta'z, so z* = Q^-1 theta.
LowerLevelObjective linear_quadratic(const Eigen::MatrixXd& q);

/// L = 1/2 z'Qz - (M theta)'z + sum c_i log cosh(z_i - theta_i)
struct SmoothFamily {
  Eigen::MatrixXd q, m;
  Eigen::VectorXd c;
};
SmoothFamily random_smooth_family(int d, std::mt19937_64& rng);
LowerLevelObjective smooth_family(const SmoothFamily& p);

/// Converges to machine precision instead of stopping on small objectives.
OptimizerConfig tight_solver();

double rel_err(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

}  // namespace nfpose::testing
