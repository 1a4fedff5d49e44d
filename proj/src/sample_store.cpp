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

#include "loadforge/sample_store.hpp"

#include <algorithm>
#include <system_error>
#include <unordered_set>

#include "loadforge/error.hpp"

namespace loadforge {

namespace fs = std::filesystem;

namespace {

bool recognized(const fs::path& p) {
  const auto ext = p.extension();
  return ext == ".ppm" || ext == ".brt";
}

Error keyed(const Error& e, const std::string& key) {
  Error out = e.with_context("sample '" + key + "'");
  out.with_sample_key(key);
  return out;
}

}  // namespace

DatasetSource::DatasetSource(FilePerSample files) : variant_(std::move(files)) {}
DatasetSource::DatasetSource(Container container) : variant_(std::move(container)) {}

ReaderKind DatasetSource::kind() const {
  return files() != nullptr ? ReaderKind::kFilePerSample : ReaderKind::kContainer;
}

std::uint64_t DatasetSource::size() const {
  if (const auto* f = files()) return f->manifest.size();
  return container()->handle.record_count();
}

ImageTensor decode_sample_file(const fs::path& path) {
  const Bytes raw = read_file(path);
  if (path.extension() == ".brt") {
    try {
      return decode_tensor_body(raw);
    } catch (const Error& e) {
      // A malformed .brt is a format problem of the file, not of a record.
      if (e.code() == ErrorCode::kPayloadError) throw Error(ErrorCode::kFormatError, e.what());
      throw;
    }
  }
  return decode_ppm(raw);
}

Sample DatasetSource::fetch(std::uint64_t index) const {
  if (index >= size()) {
    fail(ErrorCode::kIndexOutOfRange,
         "sample " + std::to_string(index) + " of " + std::to_string(size()));
  }
  if (const auto* f = files()) {
    const auto& entry = f->manifest[index];
    try {
      return Sample{entry.key, entry.label, decode_sample_file(entry.path)};
    } catch (const Error& e) {
      throw keyed(e, entry.key);
    }
  }
  const auto& handle = container()->handle;
  SamplePayload payload;
  try {
    payload = handle.read_record(index);
  } catch (const Error& e) {
    throw keyed(e, "#" + std::to_string(index));
  }
  try {
    if (auto* img = std::get_if<ImageTensor>(&payload.body)) {
      return Sample{std::move(payload.key), payload.label, std::move(*img)};
    }
    return Sample{payload.key, payload.label, decode_ppm(std::get<Bytes>(payload.body))};
  } catch (const Error& e) {
    throw keyed(e, payload.key);
  }
}

DatasetSource scan_directory(const fs::path& root) {
  std::error_code ec;
  if (!fs::is_directory(root, ec)) {
    fail(ErrorCode::kIoError, "dataset root " + root.string() + " is not a directory");
  }
  std::vector<std::string> classes;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.is_directory()) classes.push_back(entry.path().filename().string());
  }
  std::sort(classes.begin(), classes.end());

  DatasetSource::FilePerSample files;
  files.root = root;
  for (std::size_t label = 0; label < classes.size(); ++label) {
    for (const auto& entry : fs::directory_iterator(root / classes[label])) {
      if (!entry.is_regular_file() || !recognized(entry.path())) continue;
      files.manifest.push_back({classes[label] + "/" + entry.path().stem().string(),
                                entry.path(), static_cast<std::int64_t>(label)});
    }
  }
  if (files.manifest.empty()) {
    fail(ErrorCode::kEmptyDataset, "no .ppm or .brt files under " + root.string());
  }
  std::sort(files.manifest.begin(), files.manifest.end(),
            [](const ManifestEntry& a, const ManifestEntry& b) { return a.key < b.key; });
  for (std::size_t i = 1; i < files.manifest.size(); ++i) {
    if (files.manifest[i].key == files.manifest[i - 1].key) {
      fail(ErrorCode::kDuplicateKey, "two files map to key '" + files.manifest[i].key + "'");
    }
  }
  files.class_names = std::move(classes);
  return DatasetSource(std::move(files));
}

DatasetSource open_container_source(const fs::path& container_path) {
  return DatasetSource(DatasetSource::Container{open_container(container_path)});
}

ContainerSummary pack_directory(const fs::path& root, const fs::path& destination,
                                const PackOptions& options) {
  const DatasetSource source = scan_directory(root);
  ContainerWriter writer(destination, options.chunk_target_bytes);
  for (const auto& entry : source.files()->manifest) {
    SamplePayload payload;
    payload.key = entry.key;
    payload.label = entry.label;
    try {
      if (options.store_encoded && entry.path.extension() == ".ppm") {
        Bytes raw = read_file(entry.path);
        decode_ppm(raw);  // reject bad files at pack time, not at train time
        payload.body = std::move(raw);
      } else {
        payload.body = decode_sample_file(entry.path);
      }
    } catch (const Error& e) {
      throw keyed(e, entry.key);
    }
    writer.add(payload);
  }
  return writer.finish();
}

}  // namespace loadforge
