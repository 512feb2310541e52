// Copyright 2026 The Reed Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef REED_ERROR_H_
#define REED_ERROR_H_

#include <stdexcept>
#include <string>

namespace reed {

// Numeric values are shared with the C API (reed_status) and the wire
// protocol's 2-byte error code.
enum class ErrorCode : int {
  kOk = 0,
  kInvalidArgument = 1,
  kAccessDenied = 2,
  kIntegrityViolation = 3,
  kTransport = 4,
  kRateLimited = 5,
  kNotFound = 6,
  kFingerprintMismatch = 7,
  kVersionConflict = 8,
  kPackageTooSmall = 9,
  kAuthenticationFailure = 10,
  kSignatureInvalid = 11,
  kZeroFingerprint = 12,
  kInvalidOperand = 13,
  kNotOwner = 14,
  kAtInitialState = 15,
  kUnknownUser = 16,
  kPolicyEmpty = 17,
  kTraceParse = 18,
  kStorage = 19,
  kMalformed = 20,
  kInternal = 21,
};

const char* ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void Fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace reed

#endif  // REED_ERROR_H_
