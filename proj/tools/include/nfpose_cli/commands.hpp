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

// Subcommands of the nfpose tool. Each returns a process exit code:
// 0 success, 2 usage/configuration error, 3 solver failure.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace nfpose::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitSolver = 3;

struct GlobalOptions {
  std::uint64_t seed = 0;
  bool seed_given = false;
  int threads = 1;  // 0 = hardware concurrency
  std::string out;
};

struct SynthOptions {
  std::string config;
};

/// Shared by estimate and refine.
struct PoseInputOptions {
  std::string flow_dir;
  /// "forward", "gt-perturbed:<deg>" or "file:<path>".
  std::string init = "forward";
  /// Defaults to <flow_dir>/groundtruth.tum when that file exists.
  std::string ground_truth;
  std::string scale_file;
  double frame_dt = 1.0;
  double sharpness = 0.0;  // 0 = library default
};

struct RefineCliOptions {
  PoseInputOptions input;
  int steps = 50;
  double lr = 0.1;
};

struct EvalOptions {
  std::string estimated;
  std::string reference;
  std::string format = "tum";  // tum | kitti
  int delta = 1;
  std::string mode = "rigid-scale";  // none | rigid | rigid-scale
  bool segments = false;
  double frame_dt = 0.1;  // kitti only
};

struct PeeOptions {
  std::string predicted;
  std::string ground_truth;
};

struct RobustnessOptions {
  std::string config;
  std::vector<double> eps = {0, 5, 10, 15, 20};
  int trials = 20;
  std::string init = "gt-perturbed:10";
  double sharpness = 0.0;
};

int cmd_synth(const GlobalOptions& g, const SynthOptions& o, std::ostream& out, std::ostream& err);
int cmd_estimate(const GlobalOptions& g, const PoseInputOptions& o, std::ostream& out,
                 std::ostream& err);
int cmd_refine(const GlobalOptions& g, const RefineCliOptions& o, std::ostream& out,
               std::ostream& err);
int cmd_eval(const GlobalOptions& g, const EvalOptions& o, std::ostream& out, std::ostream& err);
int cmd_pee(const GlobalOptions& g, const PeeOptions& o, std::ostream& out, std::ostream& err);
int cmd_robustness(const GlobalOptions& g, const RobustnessOptions& o, std::ostream& out,
                   std::ostream& err);

/// Parses the command line and dispatches.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace nfpose::cli
