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

#include "families.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/QR>

namespace nfpose::testing {

using Eigen::MatrixXd;
using Eigen::VectorXd;

MatrixXd random_spd(int d, std::mt19937_64& rng, double cond) {
  std::normal_distribution<double> nd;
  MatrixXd m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = nd(rng);
  const Eigen::HouseholderQR<MatrixXd> qr(m);
  const MatrixXd u = qr.householderQ();
  VectorXd ev(d);
  for (int i = 0; i < d; ++i) ev[i] = std::pow(cond, d > 1 ? double(i) / (d - 1) : 0.0);
  return u * ev.asDiagonal() * u.transpose();
}

SmoothProblem random_smooth_problem(std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  const int d = std::uniform_int_distribution<int>(2, 12)(rng);
  const MatrixXd q = random_spd(d, rng, 100.0);
  VectorXd c(d), alpha(d), x0(d);
  for (int i = 0; i < d; ++i) {
    c[i] = nd(rng);
    alpha[i] = 0.5 * nd(rng);
    x0[i] = 3.0 * nd(rng);
  }
  Objective f = [q, c, alpha, d](const VectorXd& x, VectorXd& g) {
    const VectorXd e = x - c;
    g = q * e;
    double v = 0.5 * e.dot(q * e);
    for (int i = 0; i < d; ++i) {
      v += alpha[i] * std::cos(x[i]) + std::log(1.0 + x[i] * x[i]);
      g[i] += -alpha[i] * std::sin(x[i]) + 2.0 * x[i] / (1.0 + x[i] * x[i]);
    }
    return v;
  };
  return {std::move(f), x0};
}

int strong_wolfe_violations(const SolveReport& r, const OptimizerConfig& cfg) {
  int bad = 0;
  for (const auto& s : r.steps) {
    const bool ok = s.slope0 < 0.0 && s.step > 0.0 &&
                    s.f <= s.f0 + cfg.wolfe_c1 * s.step * s.slope0 + 1e-12 * std::abs(s.f0) &&
                    std::abs(s.slope) <= cfg.wolfe_c2 * std::abs(s.slope0) * (1 + 1e-9);
    if (!ok) ++bad;
  }
  return bad;
}

LowerLevelObjective linear_quadratic(const MatrixXd& q) {
  LowerLevelObjective o;
  o.value = [q](const VectorXd& z, const VectorXd& t, VectorXd& g) {
    g = q * z - t;
    return 0.5 * z.dot(q * z) - t.dot(z);
  };
  o.hessian_zz = [q](const VectorXd&, const VectorXd&) { return q; };
  o.hessian_ztheta = [](const VectorXd& z, const VectorXd&) {
    return MatrixXd(-MatrixXd::Identity(z.size(), z.size()));
  };
  return o;
}

SmoothFamily random_smooth_family(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> u(0.5, 3.0);
  SmoothFamily p{MatrixXd(d, d), MatrixXd(d, d), VectorXd(d)};
  MatrixXd a(d, d);
  for (int i = 0; i < d; ++i) {
    p.c[i] = u(rng);
    for (int j = 0; j < d; ++j) {
      a(i, j) = nd(rng);
      p.m(i, j) = nd(rng);
    }
  }
  p.q = a * a.transpose() + 0.5 * MatrixXd::Identity(d, d);
  return p;
}

LowerLevelObjective smooth_family(const SmoothFamily& p) {
  LowerLevelObjective o;
  o.value = [p](const VectorXd& z, const VectorXd& t, VectorXd& g) {
    const VectorXd e = z - t;
    g = p.q * z - p.m * t + p.c.cwiseProduct(e.array().tanh().matrix());
    double v = 0.5 * z.dot(p.q * z) - (p.m * t).dot(z);
    for (Eigen::Index i = 0; i < z.size(); ++i) v += p.c[i] * std::log(std::cosh(e[i]));
    return v;
  };
  auto sech2 = [](const VectorXd& e) { return VectorXd((1.0 / e.array().cosh().square()).matrix()); };
  o.hessian_zz = [p, sech2](const VectorXd& z, const VectorXd& t) {
    return MatrixXd(p.q + p.c.cwiseProduct(sech2(z - t)).asDiagonal().toDenseMatrix());
  };
  o.hessian_ztheta = [p, sech2](const VectorXd& z, const VectorXd& t) {
    return MatrixXd(-p.m - p.c.cwiseProduct(sech2(z - t)).asDiagonal().toDenseMatrix());
  };
  return o;
}

OptimizerConfig tight_solver() {
  OptimizerConfig cfg;
  cfg.objective_tolerance = -std::numeric_limits<double>::infinity();
  cfg.gradient_tolerance = 1e-12;
  cfg.max_iterations = 1000;
  return cfg;
}

double rel_err(const MatrixXd& a, const MatrixXd& b) {
  return (a - b).norm() / std::max(1e-300, std::max(a.norm(), b.norm()));
}

}  // namespace nfpose::testing
