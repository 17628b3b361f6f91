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

#include "nfpose/scenario.hpp"

#include <cmath>
#include <numbers>

#include <json.hpp>

#include "nfpose/error.hpp"

namespace nfpose {
namespace {

using nlohmann::json;

// Counter-based uniform stream over keyed_uniform().
class Stream {
 public:
  explicit Stream(std::uint64_t key) : key_(key) {}
  double uniform() { return keyed_uniform(key_, counter_++); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal() {
    // Box-Muller; 1 - u keeps the log argument in (0, 1]
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }
  Vec3 unit3() {
    while (true) {
      const Vec3 v(normal(), normal(), normal());
      const double n = v.norm();
      if (n > 1e-12) return v / n;
    }
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

Vec3 vec3_from(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()}; }
json to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

CameraMotion motion_from(const json& j) { return {vec3_from(j.at("V")), vec3_from(j.at("omega"))}; }
json to_json(const CameraMotion& m) { return {{"V", to_json(m.linear)}, {"omega", to_json(m.angular)}}; }

}  // namespace

void ScenarioConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::kInvalidConfig, what); };
  if (!(depth_min > 0.0) || !(depth_max >= depth_min) || !std::isfinite(depth_max)) {
    fail("depth range must satisfy 0 < min <= max");
  }
  if (sample_count < 6) fail("sample_count must be at least 6");
  if (frames < 2) fail("frames must be at least 2");
  if (!(frame_dt > 0.0)) fail("frame_dt must be positive");
  if (!(noise_pct >= 0.0)) fail("noise_pct must be nonnegative");
  if (!(fov_limit > 0.0) || fov_limit > kDefaultFovLimit) fail("fov_limit must be in (0, 1.5]");
  if (gradients == GradientDistribution::kAxisBiased && !(axis_ratio > 0.0)) {
    fail("axis_ratio must be positive");
  }
  if (dominant_axis != 0 && dominant_axis != 1) fail("dominant_axis must be 0 (x) or 1 (y)");
  switch (motion.kind) {
    case MotionSpec::Kind::kConstant:
      if (!motion.constant.finite()) fail("constant motion must be finite");
      break;
    case MotionSpec::Kind::kSequence:
      if (motion.sequence.size() != static_cast<std::size_t>(frames - 1)) {
        fail("motion sequence needs frames - 1 entries");
      }
      for (const auto& m : motion.sequence) {
        if (!m.finite()) fail("motion sequence entries must be finite");
      }
      break;
    case MotionSpec::Kind::kRandom:
      if (!(motion.max_rotation >= 0.0)) fail("max_rotation must be nonnegative");
      break;
  }
}

ScenarioConfig scenario_config_from_json(std::string_view text) {
  ScenarioConfig cfg;
  try {
    const json j = json::parse(text);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.sample_count = j.value("sample_count", cfg.sample_count);
    if (j.contains("depth_range")) {
      cfg.depth_min = j["depth_range"].at(0).get<double>();
      cfg.depth_max = j["depth_range"].at(1).get<double>();
    }
    cfg.frames = j.value("frames", cfg.frames);
    cfg.frame_dt = j.value("frame_dt", cfg.frame_dt);
    cfg.noise_pct = j.value("noise_pct", cfg.noise_pct);
    cfg.fov_limit = j.value("fov_limit", cfg.fov_limit);
    if (j.contains("motion")) {
      const json& m = j["motion"];
      const std::string type = m.value("type", "random");
      if (type == "constant") {
        cfg.motion.kind = MotionSpec::Kind::kConstant;
        cfg.motion.constant = motion_from(m);
      } else if (type == "sequence") {
        cfg.motion.kind = MotionSpec::Kind::kSequence;
        for (const json& step : m.at("steps")) cfg.motion.sequence.push_back(motion_from(step));
      } else if (type == "random") {
        cfg.motion.kind = MotionSpec::Kind::kRandom;
        cfg.motion.max_rotation = m.value("max_rotation", cfg.motion.max_rotation);
      } else {
        throw Error(ErrorCode::kInvalidConfig, "unknown motion type '" + type + "'");
      }
    }
    if (j.contains("gradients")) {
      const json& g = j["gradients"];
      const std::string type = g.value("type", "uniform");
      if (type == "uniform") {
        cfg.gradients = GradientDistribution::kUniform;
      } else if (type == "axis_biased") {
        cfg.gradients = GradientDistribution::kAxisBiased;
        cfg.axis_ratio = g.value("ratio", cfg.axis_ratio);
        const std::string axis = g.value("axis", "x");
        if (axis != "x" && axis != "y") throw Error(ErrorCode::kInvalidConfig, "axis must be x or y");
        cfg.dominant_axis = axis == "x" ? 0 : 1;
      } else {
        throw Error(ErrorCode::kInvalidConfig, "unknown gradient distribution '" + type + "'");
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, std::string("scenario config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

std::string scenario_config_to_json(const ScenarioConfig& cfg) {
  nlohmann::ordered_json j;
  j["seed"] = cfg.seed;
  j["sample_count"] = cfg.sample_count;
  j["depth_range"] = {cfg.depth_min, cfg.depth_max};
  j["frames"] = cfg.frames;
  j["frame_dt"] = cfg.frame_dt;
  j["noise_pct"] = cfg.noise_pct;
  j["fov_limit"] = cfg.fov_limit;
  switch (cfg.motion.kind) {
    case MotionSpec::Kind::kConstant: {
      json m = to_json(cfg.motion.constant);
      m["type"] = "constant";
      j["motion"] = m;
      break;
    }
    case MotionSpec::Kind::kSequence: {
      json steps = json::array();
      for (const auto& s : cfg.motion.sequence) steps.push_back(to_json(s));
      j["motion"] = {{"type", "sequence"}, {"steps", steps}};
      break;
    }
    case MotionSpec::Kind::kRandom:
      j["motion"] = {{"type", "random"}, {"max_rotation", cfg.motion.max_rotation}};
      break;
  }
  if (cfg.gradients == GradientDistribution::kUniform) {
    j["gradients"] = {{"type", "uniform"}};
  } else {
    j["gradients"] = {{"type", "axis_biased"},
                      {"ratio", cfg.axis_ratio},
                      {"axis", cfg.dominant_axis == 0 ? "x" : "y"}};
  }
  return j.dump(2) + "\n";
}

Vec2 sample_gradient_direction(const ScenarioConfig& cfg, double u1, double u2, double u3) {
  constexpr double kPi = std::numbers::pi;
  double angle;
  if (cfg.gradients == GradientDistribution::kAxisBiased &&
      u1 < cfg.axis_ratio / (cfg.axis_ratio + 1.0)) {
    const double jitter = (2.0 * u2 - 1.0) * kAxisJitterDeg * kPi / 180.0;
    const double base = cfg.dominant_axis == 0 ? 0.0 : kPi / 2.0;
    angle = base + jitter + (u3 < 0.5 ? 0.0 : kPi);
  } else {
    angle = 2.0 * kPi * u2;
  }
  return {std::cos(angle), std::sin(angle)};
}

Scenario generate_scenario(const ScenarioConfig& cfg) {
  cfg.validate();
  const int pairs = cfg.frames - 1;

  std::vector<CameraMotion> motions;
  motions.reserve(pairs);
  for (int k = 0; k < pairs; ++k) {
    switch (cfg.motion.kind) {
      case MotionSpec::Kind::kConstant:
        motions.push_back(cfg.motion.constant);
        break;
      case MotionSpec::Kind::kSequence:
        motions.push_back(cfg.motion.sequence[k]);
        break;
      case MotionSpec::Kind::kRandom: {
        Stream s(mix_seed(mix_seed(cfg.seed, 0x6d6f74696f6eULL), static_cast<std::uint64_t>(k)));
        CameraMotion m;
        m.linear = s.unit3();
        const Vec3 axis = s.unit3();
        m.angular = axis * (cfg.motion.max_rotation * std::cbrt(s.uniform()));
        motions.push_back(m);
        break;
      }
    }
  }

  std::vector<AbsolutePose> poses;
  poses.push_back(AbsolutePose{});
  for (int k = 0; k < pairs; ++k) poses.push_back(integrate_motion(poses.back(), motions[k], cfg.frame_dt));

  std::vector<NormalFlowField> fields;
  std::vector<DepthMap> depths;
  for (int k = 0; k < pairs; ++k) {
    Stream s(mix_seed(mix_seed(cfg.seed, 0x7363656e65ULL), static_cast<std::uint64_t>(k)));
    std::vector<SampleSite> sites(cfg.sample_count);
    DepthMap dm;
    dm.depths.resize(cfg.sample_count);
    for (std::size_t i = 0; i < cfg.sample_count; ++i) {
      sites[i].point = {s.uniform(-cfg.fov_limit, cfg.fov_limit),
                        s.uniform(-cfg.fov_limit, cfg.fov_limit)};
      const double u1 = s.uniform();
      const double u2 = s.uniform();
      const double u3 = s.uniform();
      sites[i].g = sample_gradient_direction(cfg, u1, u2, u3);
      dm.depths[i] = s.uniform(cfg.depth_min, cfg.depth_max);
    }
    const CameraMotion per_frame{motions[k].linear * cfg.frame_dt, motions[k].angular * cfg.frame_dt};
    NormalFlowField field = synthesize_normal_flow(per_frame, dm, sites, FramePair{k, k + 1});
    if (cfg.noise_pct > 0.0) {
      field = inject_noise(field, cfg.noise_pct,
                           mix_seed(mix_seed(cfg.seed, 0x6e6f697365ULL), static_cast<std::uint64_t>(k)));
    }
    fields.push_back(std::move(field));
    depths.push_back(std::move(dm));
  }
  return Scenario{std::move(fields), std::move(depths), std::move(motions), Trajectory(std::move(poses))};
}

}  // namespace nfpose
