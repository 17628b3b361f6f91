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

#include "nfpose/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <optional>

#include "nfpose/error.hpp"

namespace nfpose {

using Eigen::VectorXd;

void OptimizerConfig::validate() const {
  if (memory <= 0 || max_iterations <= 0 || line_search_max_steps <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "optimizer counts must be positive");
  }
  if (!(wolfe_c1 > 0.0 && wolfe_c1 < wolfe_c2 && wolfe_c2 < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "need 0 < c1 < c2 < 1");
  }
  if (!(gradient_clip_norm > 0.0) || !(gradient_tolerance >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "clip norm must be positive");
  }
}

std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::kObjectiveTolerance: return "ObjectiveTolerance";
    case Termination::kMaxIterations: return "MaxIterations";
    case Termination::kGradientVanished: return "GradientVanished";
    case Termination::kLineSearchFailed: return "LineSearchFailed";
  }
  return "Unknown";
}

namespace {

// Search-space geometry. On the sphere the search curve is
// x(a) = (x + a d) / |x + a d| with d tangent at x.
struct Space {
  bool sphere = false;

  VectorXd retract(const VectorXd& x, const VectorXd& d, double a) const {
    VectorXd y = x + a * d;
    if (sphere) y.normalize();
    return y;
  }

  VectorXd tangent(const VectorXd& x, const VectorXd& g) const {
    if (!sphere) return g;
    return g - g.dot(x) * x;
  }

  // d/da f(x(a)) given the full gradient at y = x(a).
  double slope(const VectorXd& x, const VectorXd& d, double a, const VectorXd& y,
               const VectorXd& grad_y) const {
    if (!sphere) return grad_y.dot(d);
    const double r = (x + a * d).norm();
    return grad_y.dot(d - y.dot(d) * y) / r;
  }
};

struct Point {
  VectorXd x;
  double f = 0.0;
  VectorXd grad;  // full gradient
};

class Evaluator {
 public:
  Evaluator(const Objective& f, Eigen::Index dim) : f_(f), scratch_(dim) {}

  // Non-finite values are reported as +inf so the line search backs off.
  Point operator()(const VectorXd& x) {
    ++count;
    scratch_.setZero();
    Point p{x, f_(x, scratch_), scratch_};
    if (!std::isfinite(p.f) || !p.grad.allFinite()) p.f = std::numeric_limits<double>::infinity();
    return p;
  }

  int count = 0;

 private:
  const Objective& f_;
  VectorXd scratch_;
};

struct LineSearchResult {
  Point point;
  LineSearchRecord record;
};

double cubic_min(double a, double fa, double da, double b, double fb, double db) {
  // Minimizer of the cubic interpolating (a, fa, da), (b, fb, db).
  const double d1 = da + db - 3.0 * (fa - fb) / (a - b);
  const double disc = d1 * d1 - da * db;
  if (disc < 0.0) return 0.5 * (a + b);
  const double d2 = std::copysign(std::sqrt(disc), b - a);
  const double t = b - (b - a) * ((db + d2 - d1) / (db - da + 2.0 * d2));
  return t;
}

// Strong Wolfe line search (bracketing + zoom with safeguarded cubic
// interpolation).
std::optional<LineSearchResult> strong_wolfe(const Space& space, Evaluator& eval,
                                             const Point& start, const VectorXd& d,
                                             double alpha0, const OptimizerConfig& cfg) {
  const double f0 = start.f;
  const double slope0 = space.slope(start.x, d, 0.0, start.x, start.grad);
  if (!(slope0 < 0.0)) return std::nullopt;

  int budget = cfg.line_search_max_steps;
  struct Trial {
    double a;
    Point p;
    double slope;
  };
  auto trial = [&](double a) {
    --budget;
    Point p = eval(space.retract(start.x, d, a));
    const double s = std::isfinite(p.f) ? space.slope(start.x, d, a, p.x, p.grad)
                                        : std::numeric_limits<double>::quiet_NaN();
    return Trial{a, std::move(p), s};
  };
  auto armijo_ok = [&](const Trial& t) {
    return std::isfinite(t.p.f) && t.p.f <= f0 + cfg.wolfe_c1 * t.a * slope0;
  };
  auto curvature_ok = [&](const Trial& t) {
    return std::abs(t.slope) <= -cfg.wolfe_c2 * slope0;
  };
  auto accept = [&](Trial&& t) {
    // One interpolation step toward the exact line minimizer; exact on
    // quadratics, which keeps the finite-termination property there.
    if (budget > 0 && std::abs(t.slope) > 1e-3 * std::abs(slope0)) {
      const double c = cubic_min(0.0, f0, slope0, t.a, t.p.f, t.slope);
      if (std::isfinite(c) && c > 0.0 && std::abs(c - t.a) > 1e-12 * t.a) {
        Trial r = trial(c);
        if (armijo_ok(r) && curvature_ok(r) && r.p.f <= t.p.f) t = std::move(r);
      }
    }
    LineSearchRecord rec{t.a, f0, slope0, t.p.f, t.slope};
    return std::optional<LineSearchResult>(LineSearchResult{std::move(t.p), rec});
  };

  auto zoom = [&](Trial lo, Trial hi) -> std::optional<LineSearchResult> {
    while (budget > 0) {
      const double left = std::min(lo.a, hi.a);
      const double right = std::max(lo.a, hi.a);
      const double width = right - left;
      if (width <= std::numeric_limits<double>::epsilon() * std::max(1.0, right)) break;
      double a = 0.5 * (lo.a + hi.a);
      if (std::isfinite(hi.p.f) && std::isfinite(hi.slope)) {
        const double c = cubic_min(lo.a, lo.p.f, lo.slope, hi.a, hi.p.f, hi.slope);
        // keep the trial well inside the bracket
        if (std::isfinite(c) && c > left + 0.1 * width && c < right - 0.1 * width) a = c;
      }
      Trial t = trial(a);
      if (!armijo_ok(t) || t.p.f >= lo.p.f) {
        hi = std::move(t);
      } else {
        if (curvature_ok(t)) return accept(std::move(t));
        if (t.slope * (hi.a - lo.a) >= 0.0) hi = lo;
        lo = std::move(t);
      }
    }
    return std::nullopt;
  };

  Trial prev{0.0, start, slope0};
  double a = alpha0;
  for (int i = 0; budget > 0; ++i) {
    Trial t = trial(a);
    if (!armijo_ok(t) || (i > 0 && t.p.f >= prev.p.f)) return zoom(std::move(prev), std::move(t));
    if (curvature_ok(t)) return accept(std::move(t));
    if (t.slope >= 0.0) return zoom(std::move(t), std::move(prev));
    prev = std::move(t);
    a *= 2.0;
    if (a > 1e10) break;
  }
  return std::nullopt;
}

VectorXd clipped(const VectorXd& g, double clip) {
  const double n = g.norm();
  return n > clip ? VectorXd(g * (clip / n)) : g;
}

struct History {
  std::deque<VectorXd> s;
  std::deque<VectorXd> y;
  std::deque<double> rho;

  void clear() {
    s.clear();
    y.clear();
    rho.clear();
  }

  void push(VectorXd si, VectorXd yi, int memory) {
    const double sy = si.dot(yi);
    if (!(sy > 1e-12 * si.norm() * yi.norm()) || !(sy > 0.0)) return;
    s.push_back(std::move(si));
    y.push_back(std::move(yi));
    rho.push_back(1.0 / sy);
    while (static_cast<int>(s.size()) > memory) {
      s.pop_front();
      y.pop_front();
      rho.pop_front();
    }
  }

  // Two-loop recursion: returns -H g.
  VectorXd direction(const VectorXd& g) const {
    VectorXd q = g;
    const std::size_t m = s.size();
    std::vector<double> alpha(m);
    for (std::size_t k = m; k-- > 0;) {
      alpha[k] = rho[k] * s[k].dot(q);
      q -= alpha[k] * y[k];
    }
    if (m > 0) q *= s.back().dot(y.back()) / y.back().squaredNorm();
    for (std::size_t k = 0; k < m; ++k) {
      const double beta = rho[k] * y[k].dot(q);
      q += (alpha[k] - beta) * s[k];
    }
    return -q;
  }
};

SolveReport run(const Space& space, const Objective& f, const VectorXd& x0,
                const OptimizerConfig& cfg) {
  cfg.validate();
  if (!x0.allFinite()) throw Error(ErrorCode::kInvalidArgument, "start point is not finite");

  Evaluator eval(f, x0.size());
  Point cur = eval(x0);
  if (!std::isfinite(cur.f)) {
    throw Error(ErrorCode::kNonFiniteObjective, "objective or gradient not finite at start");
  }

  SolveReport report;
  report.objective_trace.push_back(cur.f);
  auto finish = [&](Termination t) {
    report.x_final = cur.x;
    report.f_final = cur.f;
    report.termination = t;
    report.evaluations = eval.count;
    return report;
  };

  VectorXd g = space.tangent(cur.x, cur.grad);
  if (cur.f < cfg.objective_tolerance) return finish(Termination::kObjectiveTolerance);
  if (g.norm() <= cfg.gradient_tolerance) return finish(Termination::kGradientVanished);

  History hist;
  VectorXd gc = clipped(g, cfg.gradient_clip_norm);
  while (report.iterations < cfg.max_iterations) {
    std::optional<LineSearchResult> ls;
    bool steepest = hist.s.empty();
    for (int attempt = 0; attempt < 2 && !ls; ++attempt) {
      VectorXd d = steepest ? VectorXd(-gc) : hist.direction(gc);
      d = space.tangent(cur.x, d);
      if (!(d.dot(g) < 0.0)) {
        steepest = true;
        d = -gc;
      }
      const double alpha0 = steepest ? std::min(1.0, 1.0 / gc.norm()) : 1.0;
      ls = strong_wolfe(space, eval, cur, d, alpha0, cfg);
      if (!ls) {
        if (steepest) break;
        // fall back to steepest descent once
        hist.clear();
        steepest = true;
      }
    }
    if (!ls) return finish(Termination::kLineSearchFailed);

    Point next = std::move(ls->point);
    const VectorXd g_next = space.tangent(next.x, next.grad);
    const VectorXd gc_next = clipped(g_next, cfg.gradient_clip_norm);
    VectorXd s = next.x - cur.x;
    VectorXd y = gc_next - space.tangent(next.x, gc);
    if (space.sphere) s = space.tangent(next.x, s);
    hist.push(std::move(s), std::move(y), cfg.memory);

    cur = std::move(next);
    g = g_next;
    gc = gc_next;
    ++report.iterations;
    report.objective_trace.push_back(cur.f);
    report.steps.push_back(ls->record);

    if (cur.f < cfg.objective_tolerance) return finish(Termination::kObjectiveTolerance);
    if (g.norm() <= cfg.gradient_tolerance) return finish(Termination::kGradientVanished);
  }
  return finish(Termination::kMaxIterations);
}

}  // namespace

SolveReport minimize(const Objective& f, const VectorXd& x0, const OptimizerConfig& cfg) {
  return run(Space{false}, f, x0, cfg);
}

SolveReport minimize_on_sphere(const Objective& f, const VectorXd& x0,
                               const OptimizerConfig& cfg) {
  if (std::abs(x0.norm() - 1.0) > 1e-9) {
    throw Error(ErrorCode::kInvalidArgument, "sphere start point must have unit norm");
  }
  return run(Space{true}, f, x0.normalized(), cfg);
}

}  // namespace nfpose
