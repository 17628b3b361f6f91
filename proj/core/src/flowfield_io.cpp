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

#include "nfpose/flowfield_io.hpp"

#include <fstream>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "nfpose/error.hpp"
#include "nfpose/number_format.hpp"

namespace nfpose {
namespace {

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string_view strip(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.remove_suffix(1);
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  return s;
}

}  // namespace

std::string flow_field_to_csv(const NormalFlowField& field) {
  std::string out(kFlowCsvHeader);
  out += '\n';
  for (const FlowSample& s : field.samples()) {
    out += format_double(s.point.x) + ',' + format_double(s.point.y) + ',' +
           format_double(s.g.x()) + ',' + format_double(s.g.y()) + ',' + format_double(s.n) +
           ',' + format_double(s.weight) + '\n';
  }
  return out;
}

std::vector<FlowSample> flow_samples_from_csv(std::string_view text) {
  std::vector<FlowSample> samples;
  int line_no = 0;
  bool header_seen = false;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = text.find('\n', pos);
    const std::string_view raw =
        text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;
    const std::string_view line = strip(raw);
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != kFlowCsvHeader) {
        throw LineError(ErrorCode::kMalformedLine, line_no,
                        "expected header '" + std::string(kFlowCsvHeader) + "'");
      }
      header_seen = true;
      continue;
    }
    const auto cols = split(line, ',');
    if (cols.size() != 6) {
      throw LineError(ErrorCode::kMalformedLine, line_no, "expected 6 columns");
    }
    try {
      FlowSample s;
      s.point = {parse_double(cols[0]), parse_double(cols[1])};
      s.g = Vec2(parse_double(cols[2]), parse_double(cols[3]));
      s.n = parse_double(cols[4]);
      s.weight = parse_double(cols[5]);
      samples.push_back(s);
    } catch (const Error& e) {
      throw LineError(ErrorCode::kMalformedLine, line_no, e.what());
    }
  }
  if (!header_seen) throw LineError(ErrorCode::kMalformedLine, 1, "missing CSV header");
  return samples;
}

std::string flow_sidecar_to_json(FramePair pair, const CameraIntrinsics& k) {
  nlohmann::ordered_json j;
  j["frame_pair"] = {pair.from, pair.to};
  j["intrinsics"] = {{"fx", k.fx}, {"fy", k.fy}, {"cx", k.cx}, {"cy", k.cy}};
  return j.dump(2) + "\n";
}

std::pair<FramePair, CameraIntrinsics> flow_sidecar_from_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    FramePair pair{j.at("frame_pair").at(0).get<int>(), j.at("frame_pair").at(1).get<int>()};
    CameraIntrinsics k;
    const auto& ji = j.at("intrinsics");
    k.fx = ji.at("fx").get<double>();
    k.fy = ji.at("fy").get<double>();
    k.cx = ji.at("cx").get<double>();
    k.cy = ji.at("cy").get<double>();
    k.validate();
    return {pair, k};
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, std::string("flow sidecar: ") + e.what());
  }
}

std::filesystem::path sidecar_path(const std::filesystem::path& csv_path) {
  std::filesystem::path p = csv_path;
  p.replace_extension(".json");
  return p;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + tmp.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw Error(ErrorCode::kIo, "short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot rename " + tmp.string() + ": " + ec.message());
}

void write_flow_field(const std::filesystem::path& csv_path, const NormalFlowField& field,
                      const CameraIntrinsics& k) {
  write_text_file(csv_path, flow_field_to_csv(field));
  write_text_file(sidecar_path(csv_path), flow_sidecar_to_json(field.frame_pair(), k));
}

FlowFieldFile read_flow_field(const std::filesystem::path& csv_path) {
  std::vector<FlowSample> samples = flow_samples_from_csv(read_text_file(csv_path));
  FramePair pair;
  CameraIntrinsics k;
  const auto side = sidecar_path(csv_path);
  if (std::filesystem::exists(side)) std::tie(pair, k) = flow_sidecar_from_json(read_text_file(side));
  return {NormalFlowField(std::move(samples), pair), k};
}

}  // namespace nfpose
