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

#include "nfpose_cli/commands.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "nfpose/nfpose.hpp"
#include "nfpose_cli/manifest.hpp"
#include "nfpose_cli/worker_pool.hpp"

namespace nfpose::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

constexpr std::uint64_t kInitStream = 0x696e6974ULL;
constexpr std::uint64_t kNoiseStream = 0x6e6f697365ULL;

// Failures of the estimation itself, as opposed to bad inputs.
bool is_solver_error(ErrorCode c) {
  switch (c) {
    case ErrorCode::kDegenerateField:
    case ErrorCode::kTooFewSamples:
    case ErrorCode::kNonFiniteObjective:
    case ErrorCode::kAllSamplesDegenerate:
    case ErrorCode::kSingularHessian:
    case ErrorCode::kNotStationary:
    case ErrorCode::kAngleNearPi:
      return true;
    default:
      return false;
  }
}

int report_error(std::ostream& err, const Error& e) {
  err << "nfpose: error: " << e.what() << "\n";
  return is_solver_error(e.code()) ? kExitSolver : kExitUsage;
}

std::string pair_label(FramePair p) { return std::to_string(p.from) + "->" + std::to_string(p.to); }

ordered_json to_json(const Vec3& v) { return ordered_json::array({v.x(), v.y(), v.z()}); }

// --- inputs -----------------------------------------------------------------

struct FrameInput {
  fs::path path;
  NormalFlowField field;
};

// flow_*.csv sorted by frame pair; pairs must chain (k -> k + 1).
std::vector<FrameInput> load_flow_dir(const std::string& dir) {
  if (dir.empty()) throw Error(ErrorCode::kInvalidConfig, "--flow is required");
  if (!fs::is_directory(dir)) throw Error(ErrorCode::kIo, "not a directory: " + dir);
  std::vector<fs::path> paths;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (entry.is_regular_file() && name.starts_with("flow_") && name.ends_with(".csv")) {
      paths.push_back(entry.path());
    }
  }
  if (paths.empty()) throw Error(ErrorCode::kInvalidConfig, "no flow_*.csv files in " + dir);
  std::vector<FrameInput> frames;
  for (const auto& p : paths) frames.push_back({p, read_flow_field(p).field});
  std::sort(frames.begin(), frames.end(), [](const FrameInput& a, const FrameInput& b) {
    return a.field.frame_pair().from < b.field.frame_pair().from;
  });
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const FramePair fp = frames[i].field.frame_pair();
    if (fp.to != fp.from + 1 || (i > 0 && fp.from != frames[i - 1].field.frame_pair().to)) {
      throw Error(ErrorCode::kInvalidConfig,
                  "flow files must form a chain of consecutive frame pairs (" +
                      frames[i].path.filename().string() + ")");
    }
  }
  return frames;
}

Trajectory load_tum(const fs::path& path, std::ostream& err) {
  ParseDiagnostics diag;
  Trajectory t = parse_tum_trajectory(read_text_file(path), &diag);
  for (const auto& w : diag.warnings) err << "nfpose: warning: " << path.string() << ": " << w << "\n";
  return t;
}

std::vector<double> load_scales(const std::string& path, std::size_t expected) {
  std::vector<double> scales;
  std::istringstream in(read_text_file(path));
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    try {
      scales.push_back(parse_double(line));
    } catch (const Error&) {
      throw LineError(ErrorCode::kMalformedLine, line_no, "expected one number per line");
    }
  }
  if (scales.size() != expected) {
    throw Error(ErrorCode::kInvalidConfig, "scale file has " + std::to_string(scales.size()) +
                                               " entries, expected " + std::to_string(expected));
  }
  return scales;
}

// Motion over one frame interval (displacement and rotation vector).
CameraMotion frame_motion(const AbsolutePose& p0, const AbsolutePose& p1) {
  return {p1.translation - p0.translation, so3_log(p0.rotation.inverse() * p1.rotation)};
}

struct InitStrategy {
  enum class Kind { kForward, kPerturbed, kFile };
  Kind kind = Kind::kForward;
  double degrees = 0.0;
  std::string path;
};

InitStrategy parse_init(const std::string& text) {
  InitStrategy s;
  if (text == "forward") return s;
  if (text.starts_with("gt-perturbed:")) {
    s.kind = InitStrategy::Kind::kPerturbed;
    try {
      s.degrees = parse_double(text.substr(13));
    } catch (const Error&) {
      throw Error(ErrorCode::kInvalidConfig, "bad init '" + text + "'");
    }
    if (!(s.degrees >= 0.0) || s.degrees > 180.0) {
      throw Error(ErrorCode::kInvalidConfig, "perturbation must be in [0, 180] degrees");
    }
    return s;
  }
  if (text.starts_with("file:") && text.size() > 5) {
    s.kind = InitStrategy::Kind::kFile;
    s.path = text.substr(5);
    return s;
  }
  throw Error(ErrorCode::kInvalidConfig,
              "init must be forward, gt-perturbed:<deg> or file:<path>, got '" + text + "'");
}

/// Rotates the unit direction `v` by `degrees` about an axis perpendicular
/// to it, drawn from the (seed, index) stream.
Vec3 perturb_direction(const Vec3& v, double degrees, std::uint64_t seed, std::uint64_t index) {
  const std::uint64_t key = mix_seed(mix_seed(seed, kInitStream), index);
  Vec3 axis;
  for (std::uint64_t c = 0;; c += 3) {
    const Vec3 u(keyed_uniform(key, c) - 0.5, keyed_uniform(key, c + 1) - 0.5,
                 keyed_uniform(key, c + 2) - 0.5);
    axis = u.cross(v);
    if (axis.norm() > 1e-6) break;
  }
  return so3_exp(axis.normalized() * (degrees * std::numbers::pi / 180.0)) * v;
}

CameraMotion initial_motion(const InitStrategy& s, const Trajectory* gt, const Trajectory* file,
                            FramePair fp, std::uint64_t seed) {
  auto lookup = [&](const Trajectory& t, const char* what) {
    if (static_cast<std::size_t>(fp.to) >= t.size()) {
      throw Error(ErrorCode::kInvalidConfig,
                  std::string(what) + " trajectory has no pose for frame " + std::to_string(fp.to));
    }
    return frame_motion(t[fp.from], t[fp.to]);
  };
  switch (s.kind) {
    case InitStrategy::Kind::kForward:
      return {Vec3::UnitZ(), Vec3::Zero()};
    case InitStrategy::Kind::kPerturbed: {
      const CameraMotion m = lookup(*gt, "ground-truth");
      if (m.linear.norm() == 0.0) {
        throw Error(ErrorCode::kInvalidConfig, "ground truth has no translation for pair " + pair_label(fp));
      }
      return {perturb_direction(m.linear.normalized(), s.degrees, seed, static_cast<std::uint64_t>(fp.from)),
              Vec3::Zero()};
    }
    case InitStrategy::Kind::kFile: {
      CameraMotion m = lookup(*file, "init");
      if (m.linear.norm() == 0.0) {
        throw Error(ErrorCode::kInvalidConfig, "init trajectory has no translation for pair " + pair_label(fp));
      }
      m.linear.normalize();
      return m;
    }
  }
  return {};
}

// Everything estimate and refine need before solving.
struct PoseJob {
  std::vector<FrameInput> frames;
  std::vector<CameraMotion> inits;
  std::vector<double> scales;
  std::vector<double> timestamps;  // indexed by frame - first frame
  int first_frame = 0;
};

PoseJob prepare_pose_job(const GlobalOptions& g, const PoseInputOptions& o, std::ostream& err) {
  if (!(o.frame_dt > 0.0)) throw Error(ErrorCode::kInvalidConfig, "--frame-dt must be positive");
  if (o.sharpness < 0.0) throw Error(ErrorCode::kInvalidConfig, "--sharpness must be positive");
  PoseJob job;
  job.frames = load_flow_dir(o.flow_dir);
  const InitStrategy init = parse_init(o.init);

  fs::path gt_path = o.ground_truth;
  if (gt_path.empty() && fs::exists(fs::path(o.flow_dir) / "groundtruth.tum")) {
    gt_path = fs::path(o.flow_dir) / "groundtruth.tum";
  }
  std::optional<Trajectory> gt;
  if (!gt_path.empty()) gt = load_tum(gt_path, err);
  if (init.kind == InitStrategy::Kind::kPerturbed && !gt) {
    throw Error(ErrorCode::kInvalidConfig, "gt-perturbed init needs --gt or <flow>/groundtruth.tum");
  }
  std::optional<Trajectory> file;
  if (init.kind == InitStrategy::Kind::kFile) file = load_tum(init.path, err);

  for (const auto& f : job.frames) {
    job.inits.push_back(initial_motion(init, gt ? &*gt : nullptr, file ? &*file : nullptr,
                                       f.field.frame_pair(), g.seed));
  }
  job.scales = o.scale_file.empty() ? std::vector<double>(job.frames.size(), 1.0)
                                    : load_scales(o.scale_file, job.frames.size());

  job.first_frame = job.frames.front().field.frame_pair().from;
  const int last = job.frames.back().field.frame_pair().to;
  for (int k = job.first_frame; k <= last; ++k) {
    const bool from_gt = gt && static_cast<std::size_t>(last) < gt->size();
    job.timestamps.push_back(from_gt ? (*gt)[k].timestamp : k * o.frame_dt);
  }
  return job;
}

/// Chains per-pair motions (unit direction times scale) from the identity.
Trajectory integrate_pairs(const std::vector<CameraMotion>& motions, const std::vector<double>& scales,
                           const std::vector<double>& timestamps) {
  std::vector<AbsolutePose> poses;
  AbsolutePose p0;
  p0.timestamp = timestamps.front();
  poses.push_back(p0);
  for (std::size_t i = 0; i < motions.size(); ++i) {
    const double dt = timestamps[i + 1] - timestamps[i];
    const Vec3 dir = motions[i].linear.norm() > 0.0 ? Vec3(motions[i].linear.normalized()) : Vec3::Zero();
    const CameraMotion v{dir * (scales[i] / dt), motions[i].angular / dt};
    AbsolutePose p = integrate_motion(poses.back(), v, dt);
    p.timestamp = timestamps[i + 1];
    poses.push_back(p);
  }
  return Trajectory(std::move(poses));
}

std::optional<double> sharpness_or_default(double s) {
  return s > 0.0 ? std::optional<double>(s) : std::nullopt;
}

fs::path with_suffix(const fs::path& p, const std::string& suffix) {
  fs::path out = p;
  out.replace_extension();
  out += suffix;
  return out;
}

RunManifest start_manifest(std::string command, const GlobalOptions& g, const std::string& config) {
  RunManifest m;
  m.command = std::move(command);
  m.config_hash = fnv1a64(m.command + "\n" + config);
  m.seed = g.seed;
  m.tool_version = std::string(tool_version());
  m.started = std::chrono::system_clock::now();
  return m;
}

std::string describe(const PoseInputOptions& o) {
  std::ostringstream s;
  s << "flow=" << o.flow_dir << "\ninit=" << o.init << "\ngt=" << o.ground_truth
    << "\nscale=" << o.scale_file << "\nframe_dt=" << format_double(o.frame_dt)
    << "\nsharpness=" << format_double(o.sharpness) << "\n";
  return s.str();
}

std::string depths_to_csv(const DepthMap& d) {
  std::string out = "z\n";
  for (double z : d.depths) out += format_double(z) + "\n";
  return out;
}

std::string frame_name(const char* prefix, int k, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%04d%s", prefix, k, ext);
  return buf;
}

ordered_json solve_report_json(const SolveReport& r, const char* variable) {
  ordered_json j;
  j["variable"] = variable;
  j["iterations"] = r.iterations;
  j["evaluations"] = r.evaluations;
  j["termination"] = std::string(to_string(r.termination));
  j["f_final"] = r.f_final;
  j["objective_trace"] = r.objective_trace;
  return j;
}

}  // namespace

// --- commands ---------------------------------------------------------------

int cmd_synth(const GlobalOptions& g, const SynthOptions& o, std::ostream& out, std::ostream& err) {
  try {
    if (o.config.empty()) throw Error(ErrorCode::kInvalidConfig, "--config is required");
    if (g.out.empty()) throw Error(ErrorCode::kInvalidConfig, "--out directory is required");
    const std::string text = read_text_file(o.config);
    ScenarioConfig cfg = scenario_config_from_json(text);
    if (g.seed_given) cfg.seed = g.seed;
    GlobalOptions eff = g;
    eff.seed = cfg.seed;
    RunManifest manifest = start_manifest("synth", eff, scenario_config_to_json(cfg));

    const Scenario sc = generate_scenario(cfg);
    const fs::path dir = g.out;
    fs::create_directories(dir);
    for (std::size_t k = 0; k < sc.fields.size(); ++k) {
      const int idx = static_cast<int>(k);
      write_flow_field(dir / frame_name("flow", idx, ".csv"), sc.fields[k]);
      write_text_file(dir / frame_name("depth", idx, ".csv"), depths_to_csv(sc.depths[k]));
      manifest.outputs.push_back(frame_name("flow", idx, ".csv"));
      manifest.outputs.push_back(frame_name("flow", idx, ".json"));
      manifest.outputs.push_back(frame_name("depth", idx, ".csv"));
    }
    write_text_file(dir / "groundtruth.tum", serialize_tum_trajectory(sc.ground_truth));
    write_text_file(dir / "scenario.json", scenario_config_to_json(cfg));
    manifest.outputs.push_back("groundtruth.tum");
    manifest.outputs.push_back("scenario.json");
    write_manifest(dir / "manifest.json", manifest);
    out << dir.string() << "\n";
    return kExitOk;
  } catch (const Error& e) {
    return report_error(err, e);
  } catch (const fs::filesystem_error& e) {
    err << "nfpose: error: " << e.what() << "\n";
    return kExitUsage;
  }
}

int cmd_estimate(const GlobalOptions& g, const PoseInputOptions& o, std::ostream& out,
                 std::ostream& err) {
  try {
    if (g.out.empty()) throw Error(ErrorCode::kInvalidConfig, "--out trajectory path is required");
    RunManifest manifest = start_manifest("estimate", g, describe(o));
    const PoseJob job = prepare_pose_job(g, o, err);
    const std::size_t n = job.frames.size();

    std::vector<std::optional<PoseEstimate>> results(n);
    std::vector<std::string> failures(n);
    parallel_for(n, g.threads, [&](std::size_t i) {
      CheiralityProblem p{job.frames[i].field, job.inits[i], {}};
      if (auto s = sharpness_or_default(o.sharpness)) p.sharpness = *s;
      try {
        results[i] = solve_pose(p);
      } catch (const Error& e) {
        if (!is_solver_error(e.code())) throw;
        failures[i] = e.what();
      }
    });
    std::string failed;
    for (std::size_t i = 0; i < n; ++i) {
      if (failures[i].empty()) continue;
      err << "nfpose: error: pair " << pair_label(job.frames[i].field.frame_pair()) << ": " << failures[i] << "\n";
      failed += (failed.empty() ? "" : ",") + pair_label(job.frames[i].field.frame_pair());
    }
    if (!failed.empty()) {
      err << "nfpose: error: solver failed on frame pairs " << failed << "\n";
      return kExitSolver;
    }

    std::vector<CameraMotion> motions;
    ordered_json reports = ordered_json::array();
    for (std::size_t i = 0; i < n; ++i) {
      const PoseEstimate& e = *results[i];
      motions.push_back(e.motion);
      ordered_json j;
      const FramePair fp = job.frames[i].field.frame_pair();
      j["pair"] = {fp.from, fp.to};
      j["V"] = to_json(e.motion.linear);
      j["omega"] = to_json(e.motion.angular);
      j["objective"] = e.objective_value;
      j["rounds"] = e.rounds;
      j["round_objectives"] = e.round_objectives;
      ordered_json solves = ordered_json::array();
      for (std::size_t s = 0; s < e.reports.size(); ++s) {
        solves.push_back(solve_report_json(e.reports[s], s % 2 == 0 ? "V" : "omega"));
      }
      j["solves"] = solves;
      reports.push_back(j);
    }
    const Trajectory traj = integrate_pairs(motions, job.scales, job.timestamps);
    const fs::path out_path = g.out;
    if (out_path.has_parent_path()) fs::create_directories(out_path.parent_path());
    const fs::path report_path = with_suffix(out_path, ".reports.json");
    write_text_file(out_path, serialize_tum_trajectory(traj));
    write_text_file(report_path, reports.dump(2) + "\n");
    manifest.outputs = {out_path.filename().string(), report_path.filename().string()};
    write_manifest(with_suffix(out_path, ".manifest.json"), manifest);
    out << out_path.string() << "\n";
    return kExitOk;
  } catch (const Error& e) {
    return report_error(err, e);
  } catch (const fs::filesystem_error& e) {
    err << "nfpose: error: " << e.what() << "\n";
    return kExitUsage;
  }
}

int cmd_refine(const GlobalOptions& g, const RefineCliOptions& o, std::ostream& out,
               std::ostream& err) {
  try {
    if (o.steps < 1) throw Error(ErrorCode::kInvalidArgument, "--steps must be at least 1");
    if (!(o.lr > 0.0)) throw Error(ErrorCode::kInvalidArgument, "--lr must be positive");
    if (g.out.empty()) throw Error(ErrorCode::kInvalidConfig, "--out trajectory path is required");
    RunManifest manifest = start_manifest(
        "refine", g, describe(o.input) + "steps=" + std::to_string(o.steps) + "\nlr=" + format_double(o.lr) + "\n");
    const PoseJob job = prepare_pose_job(g, o.input, err);
    const std::size_t n = job.frames.size();

    RefineOptions ropt;
    if (auto s = sharpness_or_default(o.input.sharpness)) ropt.sharpness = *s;
    std::vector<std::optional<RefineTrace>> traces(n);
    std::vector<std::string> failures(n);
    parallel_for(n, g.threads, [&](std::size_t i) {
      try {
        traces[i] = refine(CoarsePose{job.inits[i]}, job.frames[i].field, o.steps, o.lr, ropt);
      } catch (const Error& e) {
        if (!is_solver_error(e.code())) throw;
        failures[i] = e.what();
      }
    });
    bool any_failed = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (failures[i].empty()) continue;
      any_failed = true;
      err << "nfpose: error: pair " << pair_label(job.frames[i].field.frame_pair()) << ": " << failures[i] << "\n";
    }
    if (any_failed) return kExitSolver;

    std::string loss_csv = "from,to,step,loss\n";
    std::vector<CameraMotion> motions;
    for (std::size_t i = 0; i < n; ++i) {
      const FramePair fp = job.frames[i].field.frame_pair();
      const RefineTrace& t = *traces[i];
      for (std::size_t s = 0; s < t.losses.size(); ++s) {
        loss_csv += std::to_string(fp.from) + "," + std::to_string(fp.to) + "," + std::to_string(s) + "," +
                    format_double(t.losses[s]) + "\n";
      }
      motions.push_back(t.coarse.back().motion);
    }
    const Trajectory traj = integrate_pairs(motions, job.scales, job.timestamps);
    const fs::path out_path = g.out;
    if (out_path.has_parent_path()) fs::create_directories(out_path.parent_path());
    const fs::path loss_path = with_suffix(out_path, ".loss.csv");
    write_text_file(out_path, serialize_tum_trajectory(traj));
    write_text_file(loss_path, loss_csv);
    manifest.outputs = {out_path.filename().string(), loss_path.filename().string()};
    write_manifest(with_suffix(out_path, ".manifest.json"), manifest);
    out << out_path.string() << "\n";
    return kExitOk;
  } catch (const Error& e) {
    return report_error(err, e);
  } catch (const fs::filesystem_error& e) {
    err << "nfpose: error: " << e.what() << "\n";
    return kExitUsage;
  }
}

int cmd_eval(const GlobalOptions& g, const EvalOptions& o, std::ostream& out, std::ostream& err) {
  try {
    if (o.estimated.empty() || o.reference.empty()) {
      throw Error(ErrorCode::kInvalidConfig, "--est and --ref are required");
    }
    AlignmentMode mode;
    if (o.mode == "none") {
      mode = AlignmentMode::kNone;
    } else if (o.mode == "rigid") {
      mode = AlignmentMode::kRigid;
    } else if (o.mode == "rigid-scale") {
      mode = AlignmentMode::kRigidScale;
    } else {
      throw Error(ErrorCode::kInvalidConfig, "--mode must be none, rigid or rigid-scale");
    }
    auto load = [&](const std::string& path) {
      if (o.format == "tum") return load_tum(path, err);
      if (o.format == "kitti") {
        ParseDiagnostics diag;
        Trajectory t = parse_kitti_poses(read_text_file(path), o.frame_dt, &diag);
        for (const auto& w : diag.warnings) err << "nfpose: warning: " << path << ": " << w << "\n";
        return t;
      }
      throw Error(ErrorCode::kInvalidConfig, "--format must be tum or kitti");
    };
    RunManifest manifest = start_manifest(
        "eval", g,
        "est=" + o.estimated + "\nref=" + o.reference + "\nformat=" + o.format + "\ndelta=" +
            std::to_string(o.delta) + "\nmode=" + o.mode + "\nsegments=" + (o.segments ? "1" : "0") + "\n");
    const Trajectory est = load(o.estimated);
    const Trajectory ref = load(o.reference);
    if (est.size() != ref.size()) {
      throw Error(ErrorCode::kSampleSetMismatch, "trajectories have " + std::to_string(est.size()) + " and " +
                                                     std::to_string(ref.size()) + " poses");
    }
    MetricReport report = rpe(est, ref, o.delta,
                              o.segments ? std::optional(kKittiSegmentLengths) : std::nullopt);
    report.ate_rmse = ate(est, ref, mode);
    const std::string json = metric_report_to_json(report) + "\n";
    out << json;
    if (!g.out.empty()) {
      const fs::path out_path = g.out;
      if (out_path.has_parent_path()) fs::create_directories(out_path.parent_path());
      write_text_file(out_path, json);
      manifest.outputs = {out_path.filename().string()};
      write_manifest(with_suffix(out_path, ".manifest.json"), manifest);
    }
    return kExitOk;
  } catch (const Error& e) {
    return report_error(err, e);
  } catch (const fs::filesystem_error& e) {
    err << "nfpose: error: " << e.what() << "\n";
    return kExitUsage;
  }
}

int cmd_pee(const GlobalOptions& g, const PeeOptions& o, std::ostream& out, std::ostream& err) {
  try {
    if (o.predicted.empty() || o.ground_truth.empty()) {
      throw Error(ErrorCode::kInvalidConfig, "--pred and --gt are required");
    }
    RunManifest manifest = start_manifest("pee", g, "pred=" + o.predicted + "\ngt=" + o.ground_truth + "\n");
    const NormalFlowField gt = read_flow_field(o.ground_truth).field;
    const std::string pred_text = read_text_file(o.predicted);
    double value;
    if (pred_text.starts_with("u,v")) {
      // Optical flow vectors, one row per ground-truth sample.
      std::vector<Vec2> flow;
      std::istringstream in(pred_text);
      std::string line;
      std::getline(in, line);
      int line_no = 1;
      while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw LineError(ErrorCode::kMalformedLine, line_no, "expected u,v");
        try {
          flow.emplace_back(parse_double(std::string_view(line).substr(0, comma)),
                            parse_double(std::string_view(line).substr(comma + 1)));
        } catch (const Error&) {
          throw LineError(ErrorCode::kMalformedLine, line_no, "expected u,v");
        }
      }
      value = pee(flow, gt);
    } else {
      value = pee(read_flow_field(o.predicted).field, gt);
    }
    ordered_json j;
    j["pee"] = value;
    j["n_samples"] = gt.size();
    const std::string json = j.dump(2) + "\n";
    out << json;
    if (!g.out.empty()) {
      const fs::path out_path = g.out;
      write_text_file(out_path, json);
      manifest.outputs = {out_path.filename().string()};
      write_manifest(with_suffix(out_path, ".manifest.json"), manifest);
    }
    return kExitOk;
  } catch (const Error& e) {
    return report_error(err, e);
  }
}

int cmd_robustness(const GlobalOptions& g, const RobustnessOptions& o, std::ostream& out,
                   std::ostream& err) {
  try {
    if (o.config.empty()) throw Error(ErrorCode::kInvalidConfig, "--config is required");
    if (g.out.empty()) throw Error(ErrorCode::kInvalidConfig, "--out csv path is required");
    if (o.trials < 1) throw Error(ErrorCode::kInvalidConfig, "--trials must be at least 1");
    if (o.eps.empty()) throw Error(ErrorCode::kInvalidConfig, "--eps list is empty");
    for (double e : o.eps) {
      if (!(e >= 0.0)) throw Error(ErrorCode::kInvalidConfig, "--eps values must be nonnegative");
    }
    const InitStrategy init = parse_init(o.init);
    if (init.kind == InitStrategy::Kind::kFile) {
      throw Error(ErrorCode::kInvalidConfig, "robustness supports forward and gt-perturbed inits");
    }
    const std::string text = read_text_file(o.config);
    ScenarioConfig base = scenario_config_from_json(text);
    const std::uint64_t seed = g.seed_given ? g.seed : base.seed;
    base.noise_pct = 0.0;
    GlobalOptions eff = g;
    eff.seed = seed;
    std::string eps_text;
    for (double e : o.eps) eps_text += format_double(e) + ",";
    RunManifest manifest = start_manifest(
        "robustness", eff,
        scenario_config_to_json(base) + "eps=" + eps_text + "\ntrials=" + std::to_string(o.trials) +
            "\ninit=" + o.init + "\nsharpness=" + format_double(o.sharpness) + "\n");

    // Scenes depend on the trial only, so every eps level sees the same
    // scenes and initializations.
    const std::size_t trials = static_cast<std::size_t>(o.trials);
    std::vector<std::optional<Scenario>> scenes(trials);
    parallel_for(trials, g.threads, [&](std::size_t t) {
      ScenarioConfig cfg = base;
      cfg.seed = mix_seed(seed, t);
      scenes[t] = generate_scenario(cfg);
    });

    struct Row {
      double t_rel = 0.0;
      double r_rel = 0.0;
      std::string failure;
    };
    const std::size_t n_rows = o.eps.size() * trials;
    std::vector<Row> rows(n_rows);
    parallel_for(n_rows, g.threads, [&](std::size_t r) {
      const double eps = o.eps[r / trials];
      const std::size_t t = r % trials;
      const Scenario& sc = *scenes[t];
      const std::uint64_t trial_seed = mix_seed(seed, t);
      const std::uint64_t noise_key =
          mix_seed(mix_seed(mix_seed(seed, kNoiseStream), std::bit_cast<std::uint64_t>(eps)), t);
      std::vector<CameraMotion> motions;
      std::vector<double> scales;
      std::vector<double> stamps;
      for (const auto& p : sc.ground_truth) stamps.push_back(p.timestamp);
      try {
        for (std::size_t k = 0; k < sc.fields.size(); ++k) {
          const CameraMotion truth = frame_motion(sc.ground_truth[k], sc.ground_truth[k + 1]);
          CheiralityProblem p{inject_noise(sc.fields[k], eps, mix_seed(noise_key, k)), {}, {}};
          if (init.kind == InitStrategy::Kind::kForward) {
            p.init = {Vec3::UnitZ(), Vec3::Zero()};
          } else {
            p.init = {perturb_direction(truth.linear.normalized(), init.degrees, trial_seed, k), Vec3::Zero()};
          }
          if (auto s = sharpness_or_default(o.sharpness)) p.sharpness = *s;
          motions.push_back(solve_pose(p).motion);
          scales.push_back(truth.linear.norm());
        }
        const MetricReport m = rpe(integrate_pairs(motions, scales, stamps), sc.ground_truth, 1);
        rows[r].t_rel = m.t_rel;
        rows[r].r_rel = m.r_rel;
      } catch (const Error& e) {
        if (!is_solver_error(e.code())) throw;
        rows[r].t_rel = rows[r].r_rel = std::numeric_limits<double>::quiet_NaN();
        rows[r].failure = e.what();
      }
    });

    std::string csv = "eps_pct,trial,t_rel,r_rel\n";
    bool any_failed = false;
    for (std::size_t r = 0; r < n_rows; ++r) {
      const double eps = o.eps[r / trials];
      const std::size_t t = r % trials;
      csv += format_double(eps) + "," + std::to_string(t) + "," + format_double(rows[r].t_rel) + "," +
             format_double(rows[r].r_rel) + "\n";
      if (!rows[r].failure.empty()) {
        any_failed = true;
        err << "nfpose: error: eps " << format_double(eps) << " trial " << t << ": " << rows[r].failure << "\n";
      }
    }
    const fs::path out_path = g.out;
    if (out_path.has_parent_path()) fs::create_directories(out_path.parent_path());
    write_text_file(out_path, csv);
    manifest.outputs = {out_path.filename().string()};
    write_manifest(with_suffix(out_path, ".manifest.json"), manifest);
    out << out_path.string() << "\n";
    return any_failed ? kExitSolver : kExitOk;
  } catch (const Error& e) {
    return report_error(err, e);
  } catch (const fs::filesystem_error& e) {
    err << "nfpose: error: " << e.what() << "\n";
    return kExitUsage;
  }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Camera motion from normal flow via the cheirality constraint", "nfpose"};
  app.set_version_flag("--version", std::string(tool_version()));
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  auto* seed_opt = app.add_option("--seed", g.seed, "Random seed (overrides config seeds)");
  app.add_option("--threads", g.threads, "Worker threads, 0 = all cores")->check(CLI::NonNegativeNumber);
  app.add_option("--out", g.out, "Output path (file or directory, per command)");

  SynthOptions synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic scenario");
  synth_cmd->add_option("--config", synth.config, "Scenario config JSON");

  auto add_pose_inputs = [](CLI::App* cmd, PoseInputOptions& o) {
    cmd->add_option("--flow", o.flow_dir, "Directory of flow_NNNN.csv files");
    cmd->add_option("--init", o.init, "forward | gt-perturbed:<deg> | file:<tum path>")->capture_default_str();
    cmd->add_option("--gt", o.ground_truth, "Ground-truth TUM trajectory");
    cmd->add_option("--scale-file", o.scale_file, "Per-pair translation magnitudes, one per line");
    cmd->add_option("--frame-dt", o.frame_dt, "Frame interval when no ground truth is given")->capture_default_str();
    cmd->add_option("--sharpness", o.sharpness, "Objective sharpness (default: library default)");
  };
  PoseInputOptions estimate;
  auto* estimate_cmd = app.add_subcommand("estimate", "Estimate per-pair motion and chain a trajectory");
  add_pose_inputs(estimate_cmd, estimate);

  RefineCliOptions refine_opts;
  auto* refine_cmd = app.add_subcommand("refine", "Bi-level refinement of coarse poses");
  add_pose_inputs(refine_cmd, refine_opts.input);
  refine_cmd->add_option("--steps", refine_opts.steps, "Gradient steps")->capture_default_str();
  refine_cmd->add_option("--lr", refine_opts.lr, "Step size")->capture_default_str();

  EvalOptions eval;
  auto* eval_cmd = app.add_subcommand("eval", "ATE/RPE of an estimated trajectory");
  eval_cmd->add_option("--est", eval.estimated, "Estimated trajectory");
  eval_cmd->add_option("--ref", eval.reference, "Reference trajectory");
  eval_cmd->add_option("--format", eval.format, "tum | kitti")->capture_default_str();
  eval_cmd->add_option("--delta", eval.delta, "RPE frame interval")->capture_default_str();
  eval_cmd->add_option("--mode", eval.mode, "ATE alignment: none | rigid | rigid-scale")->capture_default_str();
  eval_cmd->add_flag("--segments", eval.segments, "KITTI 100..800 m segment drift");
  eval_cmd->add_option("--frame-dt", eval.frame_dt, "KITTI frame interval")->capture_default_str();

  PeeOptions pee_opts;
  auto* pee_cmd = app.add_subcommand("pee", "Projection endpoint error against a ground-truth field");
  pee_cmd->add_option("--pred", pee_opts.predicted, "Predicted flow field CSV or u,v flow CSV");
  pee_cmd->add_option("--gt", pee_opts.ground_truth, "Ground-truth flow field CSV");

  RobustnessOptions rob;
  auto* rob_cmd = app.add_subcommand("robustness", "Noise sweep over seeded scenarios");
  rob_cmd->add_option("--config", rob.config, "Scenario config JSON");
  rob_cmd->add_option("--eps", rob.eps, "Noise levels in percent")->delimiter(',');
  rob_cmd->add_option("--trials", rob.trials, "Trials per noise level")->capture_default_str();
  rob_cmd->add_option("--init", rob.init, "forward | gt-perturbed:<deg>")->capture_default_str();
  rob_cmd->add_option("--sharpness", rob.sharpness, "Objective sharpness (default: library default)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }
  g.seed_given = seed_opt->count() > 0;

  if (synth_cmd->parsed()) return cmd_synth(g, synth, out, err);
  if (estimate_cmd->parsed()) return cmd_estimate(g, estimate, out, err);
  if (refine_cmd->parsed()) return cmd_refine(g, refine_opts, out, err);
  if (eval_cmd->parsed()) return cmd_eval(g, eval, out, err);
  if (pee_cmd->parsed()) return cmd_pee(g, pee_opts, out, err);
  return cmd_robustness(g, rob, out, err);
}

}  // namespace nfpose::cli
