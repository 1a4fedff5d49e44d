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

// Chunked record container ("BRC1").
//
// File layout, all integers little-endian:
//
//   header   32 B   "BRC1" | version u32 (=1) | chunk_target_bytes u64 | 16 zero bytes
//   frames          per record: payload_len u64 | crc32(LE64(payload_len)) u32 |
//                   payload | crc32(payload) u32
//   index           record_count x (offset u64, frame_len u64), then
//                   chunk_count x (first_record u64, record_count u64)
//   footer   32 B   index_offset u64 | record_count u64 | chunk_count u64 |
//                   crc32(index bytes) u32 | "BRCE"
//
// Records are grouped into chunks of contiguous frames whose summed size stays
// within chunk_target_bytes; a single frame larger than the target gets a
// chunk to itself. Opening a container reads only the header, footer and
// index.

#ifndef LOADFORGE_RECORD_FORMAT_HPP_
#define LOADFORGE_RECORD_FORMAT_HPP_

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <span>
#include <string>
#include <unordered_set>
#include <variant>
#include <vector>

#include "loadforge/byte_io.hpp"
#include "loadforge/image.hpp"

namespace loadforge {

inline constexpr std::uint64_t kHeaderSize = 32;
inline constexpr std::uint64_t kFooterSize = 32;
inline constexpr std::uint64_t kFrameOverhead = 8 + 4 + 4;
inline constexpr std::uint64_t kMinChunkTargetBytes = 4096;
inline constexpr std::uint64_t kDefaultChunkTargetBytes = 8ULL << 20;
inline constexpr std::uint32_t kFormatVersion = 1;

struct ContainerHeader {
  std::uint32_t format_version = kFormatVersion;
  std::uint64_t chunk_target_bytes = kDefaultChunkTargetBytes;
};

struct RecordEntry {
  std::uint64_t offset = 0;
  std::uint64_t frame_len = 0;
};

struct ChunkEntry {
  std::uint64_t first_record = 0;
  std::uint64_t record_count = 0;
};

struct ContainerIndex {
  std::vector<RecordEntry> records;
  std::vector<ChunkEntry> chunks;
};

struct ContainerFooter {
  std::uint64_t index_offset = 0;
  std::uint64_t record_count = 0;
  std::uint64_t chunk_count = 0;
  std::uint32_t index_crc = 0;
};

// Serialized sample: key, label and either a raw tensor (kind 0) or opaque
// encoded bytes (kind 1, decoded as PPM by the sample store).
struct SamplePayload {
  enum class Kind : std::uint8_t { kRawTensor = 0, kEncoded = 1 };

  std::string key;
  std::int64_t label = 0;
  std::variant<ImageTensor, Bytes> body;

  Kind kind() const {
    return std::holds_alternative<ImageTensor>(body) ? Kind::kRawTensor : Kind::kEncoded;
  }
  friend bool operator==(const SamplePayload&, const SamplePayload&) = default;
};

Bytes encode_payload(const SamplePayload& sample);
SamplePayload decode_payload(ByteView bytes);

// Frame = length prefix, length CRC, payload, payload CRC.
Bytes encode_frame(ByteView payload);

struct ContainerSummary {
  std::uint64_t record_count = 0;
  std::uint64_t chunk_count = 0;
  std::uint64_t total_bytes = 0;
};

// Streaming writer. Records are appended in call order; finish() writes the
// index and footer. A writer destroyed without finish() leaves an unfinalized
// file that open_container rejects.
class ContainerWriter {
 public:
  ContainerWriter(const std::filesystem::path& destination,
                  std::uint64_t chunk_target_bytes = kDefaultChunkTargetBytes);

  void add(const SamplePayload& sample);
  void add_encoded(const std::string& key, ByteView payload);
  ContainerSummary finish();

 private:
  void write_bytes(ByteView bytes);

  std::filesystem::path path_;
  std::ofstream out_;
  std::uint64_t chunk_target_;
  std::uint64_t pos_ = 0;
  std::uint64_t current_chunk_bytes_ = 0;
  ContainerIndex index_;
  std::unordered_set<std::string> keys_;
  bool finished_ = false;
};

ContainerSummary write_container(std::span<const SamplePayload> samples,
                                 std::uint64_t chunk_target_bytes,
                                 const std::filesystem::path& destination);

struct VerificationReport {
  bool ok = true;
  std::vector<std::uint64_t> corrupt_records;
};

// Read handle. Copies share the underlying file; every method is const and
// safe to call from several threads at once.
class ContainerReader {
 public:
  explicit ContainerReader(std::shared_ptr<const RandomAccessFile> file);

  std::uint64_t record_count() const { return index_->records.size(); }
  std::uint64_t chunk_count() const { return index_->chunks.size(); }
  const ContainerHeader& header() const { return header_; }
  const ContainerFooter& footer() const { return footer_; }
  const ContainerIndex& index() const { return *index_; }
  std::uint64_t file_size() const { return file_->size(); }

  SamplePayload read_record(std::uint64_t index) const;
  // Payload bytes only, CRC-checked.
  Bytes read_record_bytes(std::uint64_t index) const;
  // All records of one chunk in file order, from a single contiguous read.
  std::vector<SamplePayload> iterate_chunk(std::uint64_t chunk_id) const;
  VerificationReport verify() const;

 private:
  std::shared_ptr<const RandomAccessFile> file_;
  ContainerHeader header_;
  ContainerFooter footer_;
  std::shared_ptr<const ContainerIndex> index_;
};

ContainerReader open_container(const std::filesystem::path& path);
inline ContainerReader open_container(std::shared_ptr<const RandomAccessFile> file) {
  return ContainerReader(std::move(file));
}
inline VerificationReport verify_container(const ContainerReader& handle) {
  return handle.verify();
}

}  // namespace loadforge

#endif  // LOADFORGE_RECORD_FORMAT_HPP_
