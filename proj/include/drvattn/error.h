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

#ifndef DRVATTN_ERROR_H_
#define DRVATTN_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace drvattn {

enum class ErrorCode {
  kInvalidInput,
  kOutOfRange,
  kDegenerateBearing,
  kUndistortFailure,
  kDegenerateHomography,
  kPoseInfeasible,
  kReprojectionGate,
  kScanFailure,
  kEmptyCase,
  kDegenerateClustering,
  kSpecError,
  kParseError,
  kIoError,
  kConfigError,
};

std::string_view ToString(ErrorCode code);

// All library failures are reported through this exception; callers that
// batch work (per frame, per scan, per case) catch it and record the code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace drvattn

#endif  // DRVATTN_ERROR_H_
