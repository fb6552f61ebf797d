// Copyright 2026 The zs-apa Authors
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

#ifndef ZSAPA_ERROR_HPP_
#define ZSAPA_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace zsapa {

enum class ErrorCode {
  kFileNotFound,
  kUnsupportedFormat,
  kEmptyAudio,
  kAudioTooShort,
  kGraphExecutionFailure,
  kLayerOutOfRange,
  kInvalidBundle,
  kInvalidParams,
  kBadMagic,
  kDimensionMismatch,
  kTruncatedFile,
  kLayerMismatch,
  kPlanMismatch,
  kLengthMismatch,
  kDegenerateInput,
  kMissingAudio,
  kInvalidManifest,
  kIoError,
};

std::string_view ErrorCodeName(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so
/// callers (the CLI in particular) can map it to an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
        code_(code),
        detail_(message) {}

  ErrorCode code() const noexcept { return code_; }
  /// The message without the code prefix, for re-throwing with context.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace zsapa

#endif  // ZSAPA_ERROR_HPP_
