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

#include "nfpose/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nfpose/error.hpp"
#include "nfpose/number_format.hpp"

namespace nfpose {
namespace {

// Calls fn(line_no, fields) for every non-empty, non-comment line.
template <typename Fn>
void for_each_record(std::string_view text, Fn&& fn) {
  int line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    const std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;

    std::vector<std::string_view> fields;
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r' || line[i] == ',')) ++i;
      const std::size_t start = i;
      while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r' && line[i] != ',') ++i;
      if (i > start) fields.push_back(line.substr(start, i - start));
    }
    if (fields.empty() || fields.front().front() == '#') continue;
    fn(line_no, fields);
  }
}

std::vector<double> parse_numbers(int line_no, const std::vector<std::string_view>& fields,
                                  std::size_t expected) {
  if (fields.size() != expected) {
    throw LineError(ErrorCode::kMalformedLine, line_no,
                    "expected " + std::to_string(expected) + " numbers, got " +
                        std::to_string(fields.size()));
  }
  std::vector<double> v;
  v.reserve(expected);
  for (std::string_view f : fields) {
    try {
      v.push_back(parse_double(f));
    } catch (const Error&) {
      throw LineError(ErrorCode::kMalformedLine, line_no, "bad number '" + std::string(f) + "'");
    }
    if (!std::isfinite(v.back())) {
      throw LineError(ErrorCode::kMalformedLine, line_no, "non-finite value");
    }
  }
  return v;
}

}  // namespace

Trajectory parse_tum_trajectory(std::string_view text, ParseDiagnostics* diag) {
  std::vector<AbsolutePose> poses;
  for_each_record(text, [&](int line_no, const std::vector<std::string_view>& fields) {
    const std::vector<double> v = parse_numbers(line_no, fields, 8);
    const Eigen::Quaterniond q(v[7], v[4], v[5], v[6]);
    const double norm = q.norm();
    if (std::abs(norm - 1.0) > 1e-3) {
      throw LineError(ErrorCode::kNonUnitQuaternion, line_no,
                      "quaternion norm " + format_double(norm));
    }
    AbsolutePose p;
    p.timestamp = v[0];
    p.translation = Vec3(v[1], v[2], v[3]);
    p.rotation = Rotation::from_quaternion(q);
    poses.push_back(p);
  });
  if (poses.empty()) throw Error(ErrorCode::kMalformedLine, "trajectory file has no poses");
  if (!std::is_sorted(poses.begin(), poses.end(),
                      [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; })) {
    std::stable_sort(poses.begin(), poses.end(),
                     [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; });
    if (diag) diag->warnings.push_back("poses were not in timestamp order; sorted");
  }
  return Trajectory(std::move(poses));
}

std::string serialize_tum_trajectory(const Trajectory& trajectory) {
  std::string out = "# timestamp tx ty tz qx qy qz qw\n";
  for (const AbsolutePose& p : trajectory) {
    const Eigen::Quaterniond q = p.rotation.quaternion();
    out += format_double(p.timestamp);
    for (double v : {p.translation.x(), p.translation.y(), p.translation.z(), q.x(), q.y(), q.z(),
                     q.w()}) {
      out += ' ';
      out += format_double(v);
    }
    out += '\n';
  }
  return out;
}

Trajectory parse_kitti_poses(std::string_view text, double frame_dt, ParseDiagnostics* diag) {
  if (!(frame_dt > 0.0)) throw Error(ErrorCode::kInvalidArgument, "frame_dt must be positive");
  std::vector<AbsolutePose> poses;
  for_each_record(text, [&](int line_no, const std::vector<std::string_view>& fields) {
    const std::vector<double> v = parse_numbers(line_no, fields, 12);
    Mat3 r;
    r << v[0], v[1], v[2], v[4], v[5], v[6], v[8], v[9], v[10];
    const double det = r.determinant();
    if (std::abs(det - 1.0) > 1e-2) {
      throw LineError(ErrorCode::kNonRotationMatrix, line_no, "det(R) = " + format_double(det));
    }
    AbsolutePose p;
    const double drift = (r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff();
    if (drift > 1e-6) {
      p.rotation = Rotation::nearest(r);
      if (diag) {
        diag->warnings.push_back("line " + std::to_string(line_no) +
                                 ": rotation re-orthonormalized (drift " + format_double(drift) +
                                 ")");
      }
    } else {
      p.rotation = Rotation::from_matrix(r, 1e-5);
    }
    p.translation = Vec3(v[3], v[7], v[11]);
    p.timestamp = static_cast<double>(poses.size()) * frame_dt;
    poses.push_back(p);
  });
  if (poses.empty()) throw Error(ErrorCode::kMalformedLine, "pose file has no poses");
  return Trajectory(std::move(poses));
}

std::string serialize_kitti_poses(const Trajectory& trajectory) {
  std::string out;
  for (const AbsolutePose& p : trajectory) {
    const Mat3& r = p.rotation.matrix();
    for (int row = 0; row < 3; ++row) {
      for (int col = 0; col < 4; ++col) {
        if (row > 0 || col > 0) out += ' ';
        out += format_double(col < 3 ? r(row, col) : p.translation(row));
      }
    }
    out += '\n';
  }
  return out;
}

}  // namespace nfpose
