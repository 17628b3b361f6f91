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

#include "nfpose_cli/manifest.hpp"

#include <cstdio>
#include <ctime>

#include <json.hpp>

#include "nfpose/flowfield_io.hpp"

#ifndef NFPOSE_VERSION
#define NFPOSE_VERSION "unknown"
#endif

namespace nfpose::cli {
namespace {

std::string iso8601(std::chrono::system_clock::time_point t) {
  const std::time_t tt = std::chrono::system_clock::to_time_t(t);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string manifest_to_json(const RunManifest& m) {
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(m.config_hash));
  nlohmann::ordered_json j;
  j["command"] = m.command;
  j["config_hash"] = std::string("fnv1a64:") + hash;
  j["seed"] = m.seed;
  j["tool_version"] = m.tool_version;
  j["started_at"] = iso8601(m.started);
  j["finished_at"] = iso8601(m.finished);
  j["outputs"] = m.outputs;
  return j.dump(2) + "\n";
}

void write_manifest(const std::filesystem::path& path, RunManifest m) {
  m.finished = std::chrono::system_clock::now();
  write_text_file(path, manifest_to_json(m));
}

std::string_view tool_version() { return NFPOSE_VERSION; }

}  // namespace nfpose::cli
