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

// Flow-field persistence: a CSV body (header `x,y,gx,gy,n,weight`) plus a
// JSON sidecar holding the frame pair and camera intrinsics. Numbers are
// written with 17 significant digits so a write/read cycle is bit-exact.

#include <filesystem>
#include <string>
#include <string_view>

#include "nfpose/flowfield.hpp"

namespace nfpose {

inline constexpr std::string_view kFlowCsvHeader = "x,y,gx,gy,n,weight";

struct FlowFieldFile {
  NormalFlowField field;
  CameraIntrinsics intrinsics;
};

std::string flow_field_to_csv(const NormalFlowField& field);
/// Parses the CSV body. Throws LineError(kMalformedLine) on bad rows.
std::vector<FlowSample> flow_samples_from_csv(std::string_view text);

std::string flow_sidecar_to_json(FramePair pair, const CameraIntrinsics& k);
std::pair<FramePair, CameraIntrinsics> flow_sidecar_from_json(std::string_view text);

/// Sidecar path for a CSV path: `flow_0003.csv` -> `flow_0003.json`.
std::filesystem::path sidecar_path(const std::filesystem::path& csv_path);

void write_flow_field(const std::filesystem::path& csv_path, const NormalFlowField& field,
                      const CameraIntrinsics& k = CameraIntrinsics::identity());
/// Reads the CSV and, when present, its sidecar (identity intrinsics and
/// frame pair 0->1 otherwise).
FlowFieldFile read_flow_field(const std::filesystem::path& csv_path);

/// Whole-file helpers shared by the other readers/writers.
std::string read_text_file(const std::filesystem::path& path);
/// Writes via a temporary file and rename.
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace nfpose
