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

#include "zsapa/error.hpp"

namespace zsapa {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kFileNotFound: return "FileNotFound";
    case ErrorCode::kUnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::kEmptyAudio: return "EmptyAudio";
    case ErrorCode::kAudioTooShort: return "AudioTooShort";
    case ErrorCode::kGraphExecutionFailure: return "GraphExecutionFailure";
    case ErrorCode::kLayerOutOfRange: return "LayerOutOfRange";
    case ErrorCode::kInvalidBundle: return "InvalidBundle";
    case ErrorCode::kInvalidParams: return "InvalidParams";
    case ErrorCode::kBadMagic: return "BadMagic";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kTruncatedFile: return "TruncatedFile";
    case ErrorCode::kLayerMismatch: return "LayerMismatch";
    case ErrorCode::kPlanMismatch: return "PlanMismatch";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kDegenerateInput: return "DegenerateInput";
    case ErrorCode::kMissingAudio: return "MissingAudio";
    case ErrorCode::kInvalidManifest: return "InvalidManifest";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace zsapa
