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

#include <cmath>
#include <vector>

#include <benchmark/benchmark.h>

#include "nfpose/nfpose.hpp"

namespace nfpose {
namespace {

ScenarioConfig scene(std::size_t samples) {
  ScenarioConfig cfg;
  cfg.seed = 42;
  cfg.sample_count = samples;
  cfg.motion.kind = MotionSpec::Kind::kConstant;
  cfg.motion.constant = {Vec3(0.1, -0.05, 1.0).normalized(), Vec3(0.01, -0.02, 0.005)};
  return cfg;
}

void BM_CheiralityObjective(benchmark::State& state) {
  const Scenario sc = generate_scenario(scene(static_cast<std::size_t>(state.range(0))));
  const CameraMotion m{Vec3(0.0, 0.0, 1.0), Vec3::Zero()};
  for (auto _ : state) benchmark::DoNotOptimize(cheirality_objective(sc.fields[0], m));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_CheiralityObjective)->Arg(500)->Arg(5000)->Arg(50000);

void BM_SolvePose(benchmark::State& state) {
  const Scenario sc = generate_scenario(scene(static_cast<std::size_t>(state.range(0))));
  // 10 degrees off the truth with no rotation guess
  const Vec3 init = so3_exp(Vec3(0.0, 10.0 * M_PI / 180.0, 0.0)) * sc.motions[0].linear;
  const CheiralityProblem p{sc.fields[0], {init, Vec3::Zero()}, {}};
  for (auto _ : state) benchmark::DoNotOptimize(solve_pose(p));
}
BENCHMARK(BM_SolvePose)->Arg(500)->Arg(5000)->Unit(benchmark::kMillisecond);

void BM_RefinementLoss(benchmark::State& state) {
  const Scenario sc = generate_scenario(scene(500));
  const CameraMotion truth = sc.motions[0];
  const CoarsePose pc{{truth.linear * 1.1, truth.angular + Vec3(0.001, 0.0, 0.0)}};
  for (auto _ : state) benchmark::DoNotOptimize(refinement_loss(pc, RefinedPose{truth}, sc.fields[0]));
}
BENCHMARK(BM_RefinementLoss);

Trajectory circle(std::size_t n, double wobble) {
  std::vector<AbsolutePose> poses;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = 0.01 * static_cast<double>(i);
    AbsolutePose p;
    p.translation = Vec3(50.0 * std::cos(t), 50.0 * std::sin(t), wobble * std::sin(7.0 * t));
    p.rotation = so3_exp(Vec3(0.0, 0.0, t + wobble * std::cos(3.0 * t)));
    p.timestamp = 0.1 * static_cast<double>(i);
    poses.push_back(p);
  }
  return Trajectory(std::move(poses));
}

void BM_Ate(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  const Trajectory ref = circle(n, 0.0), est = circle(n, 0.05);
  for (auto _ : state) benchmark::DoNotOptimize(ate(est, ref, AlignmentMode::kRigidScale));
}
BENCHMARK(BM_Ate)->Arg(1000)->Arg(10000);

void BM_RpeFrames(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  const Trajectory ref = circle(n, 0.0), est = circle(n, 0.05);
  for (auto _ : state) benchmark::DoNotOptimize(rpe(est, ref, 1));
}
BENCHMARK(BM_RpeFrames)->Arg(1000)->Arg(10000);

void BM_RpeSegments(benchmark::State& state) {
  const Trajectory ref = circle(4000, 0.0), est = circle(4000, 0.05);
  const std::vector<double> lengths{100, 200, 300, 400, 500, 600, 700, 800};
  for (auto _ : state) benchmark::DoNotOptimize(rpe(est, ref, 1, lengths));
}
BENCHMARK(BM_RpeSegments)->Unit(benchmark::kMillisecond);

void BM_GenerateScenario(benchmark::State& state) {
  ScenarioConfig cfg = scene(500);
  cfg.frames = 11;
  for (auto _ : state) benchmark::DoNotOptimize(generate_scenario(cfg));
}
BENCHMARK(BM_GenerateScenario)->Unit(benchmark::kMicrosecond);

}  // namespace
}  // namespace nfpose

// the packaged benchmark_main archive is LTO-only and tied to another GCC
BENCHMARK_MAIN();
