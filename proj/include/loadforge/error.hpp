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

#ifndef LOADFORGE_ERROR_HPP_
#define LOADFORGE_ERROR_HPP_

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace loadforge {

enum class ErrorCode {
  kIoError,
  kFormatError,
  kTruncatedFile,
  kCorruptIndex,
  kCorruptRecord,
  kPayloadError,
  kDuplicateKey,
  kEmptyInput,
  kEmptyDataset,
  kIndexOutOfRange,
  kUnsupported,
  kInvalidArgument,
  kPipelineError,
  kDimMismatch,
  kSingularHessian,
  kMissingArtifact,
  kEmptyReport,
};

std::string_view error_code_name(ErrorCode code);

// Single exception type for the library. The code is what callers branch
// on; the optional record index and sample key carry the failing location.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }
  const std::optional<std::uint64_t>& record_index() const noexcept {
    return record_index_;
  }
  const std::optional<std::string>& sample_key() const noexcept {
    return sample_key_;
  }

  Error& with_record_index(std::uint64_t index);
  Error& with_sample_key(std::string key);

  // Returns a copy whose message is prefixed with `context`.
  Error with_context(std::string_view context) const;

  // True for errors caused by the data (bad files, corrupt records) rather
  // than by the caller or the program.
  bool is_data_error() const noexcept;

 private:
  ErrorCode code_;
  std::optional<std::uint64_t> record_index_;
  std::optional<std::string> sample_key_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace loadforge

#endif  // LOADFORGE_ERROR_HPP_
