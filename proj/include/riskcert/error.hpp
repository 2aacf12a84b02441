// Copyright 2026 The riskcert Authors
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

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace riskcert {

enum class ErrorCode {
  kInvalidArgument,
  kNonFinite,
  kZeroDirection,
  kAsymmetricMatrix,
  kNonPsdCovariance,
  kNonOrthonormalRotation,
  kGjkIterationLimit,
  kSyntaxError,
  kUnknownShape,
  kDuplicateName,
  kInvalidField,
  kUnsupportedVersion,
  kSampleFailure,
  kIoError,
};

inline std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "INVALID_ARGUMENT";
    case ErrorCode::kNonFinite: return "NON_FINITE";
    case ErrorCode::kZeroDirection: return "ZERO_DIRECTION";
    case ErrorCode::kAsymmetricMatrix: return "ASYMMETRIC_MATRIX";
    case ErrorCode::kNonPsdCovariance: return "NON_PSD_COVARIANCE";
    case ErrorCode::kNonOrthonormalRotation: return "NON_ORTHONORMAL_ROTATION";
    case ErrorCode::kGjkIterationLimit: return "GJK_ITERATION_LIMIT";
    case ErrorCode::kSyntaxError: return "SYNTAX_ERROR";
    case ErrorCode::kUnknownShape: return "UNKNOWN_SHAPE";
    case ErrorCode::kDuplicateName: return "DUPLICATE_NAME";
    case ErrorCode::kInvalidField: return "INVALID_FIELD";
    case ErrorCode::kUnsupportedVersion: return "UNSUPPORTED_VERSION";
    case ErrorCode::kSampleFailure: return "SAMPLE_FAILURE";
    case ErrorCode::kIoError: return "IO_ERROR";
  }
  return "UNKNOWN";
}

/// Every failure raised by the library carries a machine-readable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code),
        message_(message) {}

  ErrorCode code() const noexcept { return code_; }
  /// The message without the code prefix.
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorCode code_;
  std::string message_;
};

/// GJK exceeded its iteration cap. `margin` is the last distance upper bound
/// minus lower bound, i.e. how undecided the query still was.
class GjkError : public Error {
 public:
  GjkError(int iterations, double margin)
      : Error(ErrorCode::kGjkIterationLimit,
              "no verdict after " + std::to_string(iterations) +
                  " iterations (ambiguous margin " + std::to_string(margin) +
                  ")"),
        iterations_(iterations),
        margin_(margin) {}

  int iterations() const noexcept { return iterations_; }
  double margin() const noexcept { return margin_; }

 private:
  int iterations_;
  double margin_;
};

}  // namespace riskcert
