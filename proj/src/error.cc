// Copyright 2026 The drvattn Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "drvattn/error.h"

namespace drvattn {

std::string_view ToString(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidInput: return "InvalidInput";
    case ErrorCode::kOutOfRange: return "OutOfRange";
    case ErrorCode::kDegenerateBearing: return "DegenerateBearing";
    case ErrorCode::kUndistortFailure: return "UndistortFailure";
    case ErrorCode::kDegenerateHomography: return "DegenerateHomography";
    case ErrorCode::kPoseInfeasible: return "PoseInfeasible";
    case ErrorCode::kReprojectionGate: return "ReprojectionGate";
    case ErrorCode::kScanFailure: return "ScanFailure";
    case ErrorCode::kEmptyCase: return "EmptyCase";
    case ErrorCode::kDegenerateClustering: return "DegenerateClustering";
    case ErrorCode::kSpecError: return "SpecError";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kConfigError: return "ConfigError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(ToString(code)) + ": " + message),
      code_(code) {}

}  // namespace drvattn
