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

#include <stdexcept>
#include <string>
#include <string_view>

namespace nfpose {

enum class ErrorCode {
  kInvalidArgument,
  // geometry
  kAngleNearPi,
  kNonPositiveDt,
  // flowfield
  kEmptyField,
  kZeroGradient,
  kDuplicatePoint,
  // optimizer
  kNonFiniteObjective,
  // cheirality
  kTooFewSamples,
  kDegenerateField,
  // bilevel
  kAllSamplesDegenerate,
  kSingularHessian,
  kNotStationary,
  // metrics
  kSampleSetMismatch,
  kDegenerateConfiguration,
  kTrajectoryTooShort,
  // datasets
  kMalformedLine,
  kNonUnitQuaternion,
  kNonRotationMatrix,
  kInvalidConfig,
  kIo,
};

std::string_view to_string(ErrorCode code);

/// Exception carrying a machine-checkable error code. Every failure the
/// library reports goes through this type.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Error tied to a 1-based line of a text input.
class LineError : public Error {
 public:
  LineError(ErrorCode code, int line_no, const std::string& what)
      : Error(code, "line " + std::to_string(line_no) + ": " + what), line_no_(line_no) {}

  int line_no() const noexcept { return line_no_; }

 private:
  int line_no_;
};

}  // namespace nfpose
