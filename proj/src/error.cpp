/* Copyright 2026 The LoadForge Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "loadforge/error.hpp"

#include <utility>

namespace loadforge {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kFormatError: return "FormatError";
    case ErrorCode::kTruncatedFile: return "TruncatedFile";
    case ErrorCode::kCorruptIndex: return "CorruptIndex";
    case ErrorCode::kCorruptRecord: return "CorruptRecord";
    case ErrorCode::kPayloadError: return "PayloadError";
    case ErrorCode::kDuplicateKey: return "DuplicateKey";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kEmptyDataset: return "EmptyDataset";
    case ErrorCode::kIndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::kUnsupported: return "Unsupported";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kPipelineError: return "PipelineError";
    case ErrorCode::kDimMismatch: return "DimMismatch";
    case ErrorCode::kSingularHessian: return "SingularHessian";
    case ErrorCode::kMissingArtifact: return "MissingArtifact";
    case ErrorCode::kEmptyReport: return "EmptyReport";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
      code_(code) {}

Error& Error::with_record_index(std::uint64_t index) {
  record_index_ = index;
  return *this;
}

Error& Error::with_sample_key(std::string key) {
  sample_key_ = std::move(key);
  return *this;
}

Error Error::with_context(std::string_view context) const {
  // what() already carries the code name; strip it so it is not repeated.
  std::string msg = what();
  const std::string prefix = std::string(error_code_name(code_)) + ": ";
  if (msg.rfind(prefix, 0) == 0) msg.erase(0, prefix.size());
  Error out(code_, std::string(context) + ": " + msg);
  out.record_index_ = record_index_;
  out.sample_key_ = sample_key_;
  return out;
}

bool Error::is_data_error() const noexcept {
  switch (code_) {
    case ErrorCode::kIoError:
    case ErrorCode::kFormatError:
    case ErrorCode::kTruncatedFile:
    case ErrorCode::kCorruptIndex:
    case ErrorCode::kCorruptRecord:
    case ErrorCode::kPayloadError:
    case ErrorCode::kDuplicateKey:
    case ErrorCode::kEmptyInput:
    case ErrorCode::kEmptyDataset:
    case ErrorCode::kUnsupported:
    case ErrorCode::kMissingArtifact:
    case ErrorCode::kEmptyReport:
    case ErrorCode::kPipelineError:
      return true;
    default:
      return false;
  }
}

void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace loadforge
