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

#ifndef LOADFORGE_SAMPLE_STORE_HPP_
#define LOADFORGE_SAMPLE_STORE_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "loadforge/image.hpp"
#include "loadforge/record_format.hpp"

namespace loadforge {

struct Sample {
  std::string key;
  std::int64_t label = 0;
  ImageTensor image;

  friend bool operator==(const Sample&, const Sample&) = default;
};

struct ManifestEntry {
  std::string key;  // "<class>/<file stem>"
  std::filesystem::path path;
  std::int64_t label = 0;
};

enum class ReaderKind { kFilePerSample, kContainer };

// Read-only after construction; fetch may run concurrently from any number
// of threads.
class DatasetSource {
 public:
  struct FilePerSample {
    std::filesystem::path root;
    std::vector<ManifestEntry> manifest;
    std::vector<std::string> class_names;
  };
  struct Container {
    ContainerReader handle;
  };

  explicit DatasetSource(FilePerSample files);
  explicit DatasetSource(Container container);

  ReaderKind kind() const;
  std::uint64_t size() const;
  Sample fetch(std::uint64_t index) const;

  const FilePerSample* files() const { return std::get_if<FilePerSample>(&variant_); }
  const Container* container() const { return std::get_if<Container>(&variant_); }

 private:
  std::variant<FilePerSample, Container> variant_;
};

// Class-per-subdirectory layout: root/<class>/<file>.{ppm,brt}. Labels are
// the rank of the class directory name among all sorted subdirectories.
DatasetSource scan_directory(const std::filesystem::path& root);

DatasetSource open_container_source(const std::filesystem::path& container_path);

// Decodes one sample file by extension (.ppm or .brt).
ImageTensor decode_sample_file(const std::filesystem::path& path);

struct PackOptions {
  std::uint64_t chunk_target_bytes = kDefaultChunkTargetBytes;
  // Store PPM bytes verbatim (kind 1) instead of decoded tensors (kind 0).
  // .brt files are always stored decoded.
  bool store_encoded = false;
};

// Writes every manifest entry of a directory dataset into one container, in
// manifest order.
ContainerSummary pack_directory(const std::filesystem::path& root,
                                const std::filesystem::path& destination,
                                const PackOptions& options = {});

}  // namespace loadforge

#endif  // LOADFORGE_SAMPLE_STORE_HPP_
