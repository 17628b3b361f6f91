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

#include "nfpose/error.hpp"

namespace nfpose {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kAngleNearPi: return "AngleNearPi";
    case ErrorCode::kNonPositiveDt: return "NonPositiveDt";
    case ErrorCode::kEmptyField: return "EmptyField";
    case ErrorCode::kZeroGradient: return "ZeroGradient";
    case ErrorCode::kDuplicatePoint: return "DuplicatePoint";
    case ErrorCode::kNonFiniteObjective: return "NonFiniteObjective";
    case ErrorCode::kTooFewSamples: return "TooFewSamples";
    case ErrorCode::kDegenerateField: return "DegenerateField";
    case ErrorCode::kAllSamplesDegenerate: return "AllSamplesDegenerate";
    case ErrorCode::kSingularHessian: return "SingularHessian";
    case ErrorCode::kNotStationary: return "NotStationary";
    case ErrorCode::kSampleSetMismatch: return "SampleSetMismatch";
    case ErrorCode::kDegenerateConfiguration: return "DegenerateConfiguration";
    case ErrorCode::kTrajectoryTooShort: return "TrajectoryTooShort";
    case ErrorCode::kMalformedLine: return "MalformedLine";
    case ErrorCode::kNonUnitQuaternion: return "NonUnitQuaternion";
    case ErrorCode::kNonRotationMatrix: return "NonRotationMatrix";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

}  // namespace nfpose
