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

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace nfpose::cli {

struct RunManifest {
  std::string command;
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
  std::string tool_version;
  std::chrono::system_clock::time_point started;
  std::chrono::system_clock::time_point finished;
  std::vector<std::string> outputs;
};

std::uint64_t fnv1a64(std::string_view data);
std::string manifest_to_json(const RunManifest& m);
/// Stamps `finished` and writes atomically.
void write_manifest(const std::filesystem::path& path, RunManifest m);

std::string_view tool_version();

}  // namespace nfpose::cli
