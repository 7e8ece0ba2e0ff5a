// Copyright 2026 The LabelFuse Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
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

namespace labelfuse {

enum class ErrorCode {
  kInvalidArgument,
  kDegenerateBox,
  kParseError,
  kSchemaError,
  kDanglingRef,
  kIndexOutOfRange,
  kMissingDimensions,
  kScoreOutOfRange,
  kUnknownCategory,
  kAliasConflict,
  kEmptyInput,
  kTableMismatch,
  kUnknownImage,
  kEmptyDataset,
  kStorageError,
  kBadPage,
  kNotFound,
  kAlreadyDecided,
  kInvalidCategory,
  kInvalidBox,
  kForbidden,
  kInvalidParams,
  kConfigError,
  kMissingArtifact,
  kSelfCheckFailed,
};

inline std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kDegenerateBox: return "DegenerateBox";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kSchemaError: return "SchemaError";
    case ErrorCode::kDanglingRef: return "DanglingRef";
    case ErrorCode::kIndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::kMissingDimensions: return "MissingDimensions";
    case ErrorCode::kScoreOutOfRange: return "ScoreOutOfRange";
    case ErrorCode::kUnknownCategory: return "UnknownCategory";
    case ErrorCode::kAliasConflict: return "AliasConflict";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kTableMismatch: return "TableMismatch";
    case ErrorCode::kUnknownImage: return "UnknownImage";
    case ErrorCode::kEmptyDataset: return "EmptyDataset";
    case ErrorCode::kStorageError: return "StorageError";
    case ErrorCode::kBadPage: return "BadPage";
    case ErrorCode::kNotFound: return "NotFound";
    case ErrorCode::kAlreadyDecided: return "AlreadyDecided";
    case ErrorCode::kInvalidCategory: return "InvalidCategory";
    case ErrorCode::kInvalidBox: return "InvalidBox";
    case ErrorCode::kForbidden: return "Forbidden";
    case ErrorCode::kInvalidParams: return "InvalidParams";
    case ErrorCode::kConfigError: return "ConfigError";
    case ErrorCode::kMissingArtifact: return "MissingArtifact";
    case ErrorCode::kSelfCheckFailed: return "SelfCheckFailed";
  }
  return "Unknown";
}

// Every failure in the library is reported as an Error carrying a code, so
// callers (the CLI, the HTTP layer) can map it without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace labelfuse
