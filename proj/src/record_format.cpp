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

#include "loadforge/record_format.hpp"

#include <algorithm>
#include <cstring>

#include "loadforge/crc32.hpp"
#include "loadforge/error.hpp"

namespace loadforge {

namespace {

constexpr char kHeaderMagic[4] = {'B', 'R', 'C', '1'};
constexpr char kFooterMagic[4] = {'B', 'R', 'C', 'E'};

bool valid_utf8(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    std::size_t extra = 0;
    std::uint32_t cp = 0;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      extra = 1;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      extra = 2;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      extra = 3;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + extra >= s.size()) return false;
    for (std::size_t k = 1; k <= extra; ++k) {
      const auto cc = static_cast<unsigned char>(s[i + k]);
      if ((cc & 0xC0) != 0x80) return false;
      cp = (cp << 6) | (cc & 0x3F);
    }
    // Overlong forms, surrogates and out-of-range code points.
    if ((extra == 1 && cp < 0x80) || (extra == 2 && cp < 0x800) ||
        (extra == 3 && cp < 0x10000) || cp > 0x10FFFF ||
        (cp >= 0xD800 && cp <= 0xDFFF)) {
      return false;
    }
    i += extra + 1;
  }
  return true;
}

std::uint32_t length_crc(std::uint64_t len) {
  Bytes le;
  put_u64(le, len);
  return crc32(le);
}

// Checks one frame in `frame` (exactly frame_len bytes). Returns the payload
// view, or throws CorruptRecord.
ByteView check_frame(ByteView frame, std::uint64_t record) {
  auto corrupt = [record](const std::string& why) {
    Error e(ErrorCode::kCorruptRecord, "record " + std::to_string(record) + ": " + why);
    e.with_record_index(record);
    throw e;
  };
  if (frame.size() < kFrameOverhead) corrupt("frame shorter than its fixed fields");
  const std::uint64_t len = get_u64(frame.data());
  if (get_u32(frame.data() + 8) != crc32(frame.first(8))) corrupt("length CRC mismatch");
  if (len != frame.size() - kFrameOverhead) corrupt("length field disagrees with index");
  const ByteView payload = frame.subspan(12, len);
  if (get_u32(frame.data() + 12 + len) != crc32(payload)) corrupt("payload CRC mismatch");
  return payload;
}

bool frame_ok(ByteView frame) {
  try {
    check_frame(frame, 0);
    return true;
  } catch (const Error&) {
    return false;
  }
}

}  // namespace

Bytes encode_payload(const SamplePayload& sample) {
  if (!valid_utf8(sample.key)) fail(ErrorCode::kPayloadError, "sample key is not valid UTF-8");
  if (sample.key.size() > 0xFFFFFFFFULL) fail(ErrorCode::kPayloadError, "sample key too long");
  Bytes out;
  put_u32(out, static_cast<std::uint32_t>(sample.key.size()));
  out.insert(out.end(), sample.key.begin(), sample.key.end());
  put_u64(out, static_cast<std::uint64_t>(sample.label));
  out.push_back(static_cast<std::uint8_t>(sample.kind()));
  if (const auto* img = std::get_if<ImageTensor>(&sample.body)) {
    encode_tensor_body(*img, out);
  } else {
    const auto& raw = std::get<Bytes>(sample.body);
    out.insert(out.end(), raw.begin(), raw.end());
  }
  return out;
}

SamplePayload decode_payload(ByteView bytes) {
  if (bytes.size() < 4) fail(ErrorCode::kPayloadError, "payload shorter than key length");
  const std::uint64_t key_len = get_u32(bytes.data());
  if (bytes.size() - 4 < key_len + 9) fail(ErrorCode::kPayloadError, "payload truncated");
  SamplePayload out;
  out.key.assign(reinterpret_cast<const char*>(bytes.data() + 4), key_len);
  if (!valid_utf8(out.key)) fail(ErrorCode::kPayloadError, "sample key is not valid UTF-8");
  const std::size_t p = 4 + key_len;
  out.label = static_cast<std::int64_t>(get_u64(bytes.data() + p));
  const std::uint8_t kind = bytes[p + 8];
  const ByteView body = bytes.subspan(p + 9);
  if (kind == 0) {
    out.body = decode_tensor_body(body);
  } else if (kind == 1) {
    out.body = Bytes(body.begin(), body.end());
  } else {
    fail(ErrorCode::kPayloadError, "unknown payload kind " + std::to_string(kind));
  }
  return out;
}

Bytes encode_frame(ByteView payload) {
  Bytes out;
  out.reserve(payload.size() + kFrameOverhead);
  put_u64(out, payload.size());
  put_u32(out, length_crc(payload.size()));
  out.insert(out.end(), payload.begin(), payload.end());
  put_u32(out, crc32(payload));
  return out;
}

// ---------------------------------------------------------------------------
// Writer

ContainerWriter::ContainerWriter(const std::filesystem::path& destination,
                                 std::uint64_t chunk_target_bytes)
    : path_(destination), chunk_target_(chunk_target_bytes) {
  if (chunk_target_bytes < kMinChunkTargetBytes) {
    fail(ErrorCode::kInvalidArgument, "chunk target must be at least 4096 bytes");
  }
  out_.open(destination, std::ios::binary | std::ios::trunc);
  if (!out_) fail(ErrorCode::kIoError, "cannot create " + destination.string());
  Bytes header(kHeaderMagic, kHeaderMagic + 4);
  put_u32(header, kFormatVersion);
  put_u64(header, chunk_target_bytes);
  header.resize(kHeaderSize, 0);
  write_bytes(header);
}

void ContainerWriter::write_bytes(ByteView bytes) {
  out_.write(reinterpret_cast<const char*>(bytes.data()),
             static_cast<std::streamsize>(bytes.size()));
  if (!out_) fail(ErrorCode::kIoError, "write failed on " + path_.string());
  pos_ += bytes.size();
}

void ContainerWriter::add(const SamplePayload& sample) {
  add_encoded(sample.key, encode_payload(sample));
}

void ContainerWriter::add_encoded(const std::string& key, ByteView payload) {
  if (finished_) fail(ErrorCode::kInvalidArgument, "container already finalized");
  if (!keys_.insert(key).second) fail(ErrorCode::kDuplicateKey, "duplicate sample key '" + key + "'");
  const Bytes frame = encode_frame(payload);
  const std::uint64_t len = frame.size();
  auto& chunks = index_.chunks;
  if (chunks.empty() ||
      (chunks.back().record_count > 0 && current_chunk_bytes_ + len > chunk_target_)) {
    chunks.push_back({index_.records.size(), 0});
    current_chunk_bytes_ = 0;
  }
  chunks.back().record_count += 1;
  current_chunk_bytes_ += len;
  index_.records.push_back({pos_, len});
  write_bytes(frame);
}

ContainerSummary ContainerWriter::finish() {
  if (finished_) fail(ErrorCode::kInvalidArgument, "container already finalized");
  if (index_.records.empty()) fail(ErrorCode::kEmptyInput, "no samples to write");
  Bytes index;
  index.reserve((index_.records.size() + index_.chunks.size()) * 16);
  for (const auto& r : index_.records) {
    put_u64(index, r.offset);
    put_u64(index, r.frame_len);
  }
  for (const auto& c : index_.chunks) {
    put_u64(index, c.first_record);
    put_u64(index, c.record_count);
  }
  const std::uint64_t index_offset = pos_;
  write_bytes(index);
  Bytes footer;
  put_u64(footer, index_offset);
  put_u64(footer, index_.records.size());
  put_u64(footer, index_.chunks.size());
  put_u32(footer, crc32(index));
  footer.insert(footer.end(), kFooterMagic, kFooterMagic + 4);
  write_bytes(footer);
  out_.flush();
  if (!out_) fail(ErrorCode::kIoError, "flush failed on " + path_.string());
  out_.close();
  finished_ = true;
  return {index_.records.size(), index_.chunks.size(), pos_};
}

ContainerSummary write_container(std::span<const SamplePayload> samples,
                                 std::uint64_t chunk_target_bytes,
                                 const std::filesystem::path& destination) {
  if (samples.empty()) fail(ErrorCode::kEmptyInput, "no samples to write");
  std::unordered_set<std::string> seen;
  for (const auto& s : samples) {
    if (!seen.insert(s.key).second) {
      fail(ErrorCode::kDuplicateKey, "duplicate sample key '" + s.key + "'");
    }
  }
  ContainerWriter writer(destination, chunk_target_bytes);
  for (const auto& s : samples) writer.add(s);
  return writer.finish();
}

// ---------------------------------------------------------------------------
// Reader

ContainerReader::ContainerReader(std::shared_ptr<const RandomAccessFile> file)
    : file_(std::move(file)) {
  const std::uint64_t size = file_->size();
  if (size < kHeaderSize + kFooterSize) {
    fail(ErrorCode::kTruncatedFile, "file too small to be a container");
  }

  std::uint8_t head[kHeaderSize];
  file_->read_at(0, head);
  if (std::memcmp(head, kHeaderMagic, 4) != 0) fail(ErrorCode::kFormatError, "bad header magic");
  header_.format_version = get_u32(head + 4);
  if (header_.format_version != kFormatVersion) {
    fail(ErrorCode::kFormatError,
         "unsupported format version " + std::to_string(header_.format_version));
  }
  header_.chunk_target_bytes = get_u64(head + 8);
  if (std::any_of(head + 16, head + 32, [](std::uint8_t b) { return b != 0; })) {
    fail(ErrorCode::kFormatError, "reserved header bytes are not zero");
  }
  if (header_.chunk_target_bytes < kMinChunkTargetBytes) {
    fail(ErrorCode::kFormatError, "chunk target below 4096 bytes");
  }

  // A valid header with no footer magic at the end means the file was cut
  // short or never finalized.
  std::uint8_t foot[kFooterSize];
  file_->read_at(size - kFooterSize, foot);
  if (std::memcmp(foot + 28, kFooterMagic, 4) != 0) {
    fail(ErrorCode::kTruncatedFile, "footer magic missing (truncated or unfinished file)");
  }
  footer_.index_offset = get_u64(foot);
  footer_.record_count = get_u64(foot + 8);
  footer_.chunk_count = get_u64(foot + 16);
  footer_.index_crc = get_u32(foot + 24);

  const std::uint64_t entries = footer_.record_count + footer_.chunk_count;
  if (footer_.record_count == 0 || footer_.chunk_count == 0 ||
      entries < footer_.record_count || entries > (size / 16) ||
      footer_.index_offset < kHeaderSize ||
      footer_.index_offset + entries * 16 + kFooterSize != size) {
    fail(ErrorCode::kCorruptIndex, "footer does not describe this file");
  }

  Bytes raw(entries * 16);
  file_->read_at(footer_.index_offset, raw);
  if (crc32(raw) != footer_.index_crc) fail(ErrorCode::kCorruptIndex, "index CRC mismatch");

  auto idx = std::make_shared<ContainerIndex>();
  idx->records.resize(footer_.record_count);
  idx->chunks.resize(footer_.chunk_count);
  const std::uint8_t* p = raw.data();
  std::uint64_t expect = kHeaderSize;
  for (auto& r : idx->records) {
    r.offset = get_u64(p);
    r.frame_len = get_u64(p + 8);
    p += 16;
    if (r.offset != expect || r.frame_len < kFrameOverhead) {
      fail(ErrorCode::kCorruptIndex, "record table is not contiguous");
    }
    expect += r.frame_len;
    if (expect > footer_.index_offset) fail(ErrorCode::kCorruptIndex, "record overruns index");
  }
  if (expect != footer_.index_offset) fail(ErrorCode::kCorruptIndex, "gap before index");
  std::uint64_t next = 0;
  for (auto& c : idx->chunks) {
    c.first_record = get_u64(p);
    c.record_count = get_u64(p + 8);
    p += 16;
    if (c.first_record != next || c.record_count == 0 ||
        c.record_count > footer_.record_count - next) {
      fail(ErrorCode::kCorruptIndex, "chunk table does not partition the records");
    }
    next += c.record_count;
  }
  if (next != footer_.record_count) {
    fail(ErrorCode::kCorruptIndex, "chunk table does not cover all records");
  }
  index_ = std::move(idx);
}

Bytes ContainerReader::read_record_bytes(std::uint64_t index) const {
  if (index >= record_count()) {
    fail(ErrorCode::kIndexOutOfRange, "record " + std::to_string(index) + " of " +
                                          std::to_string(record_count()));
  }
  const auto& r = index_->records[index];
  Bytes frame(r.frame_len);
  file_->read_at(r.offset, frame);
  const ByteView payload = check_frame(frame, index);
  return Bytes(payload.begin(), payload.end());
}

SamplePayload ContainerReader::read_record(std::uint64_t index) const {
  const Bytes payload = read_record_bytes(index);
  try {
    return decode_payload(payload);
  } catch (Error& e) {
    e.with_record_index(index);
    throw;
  }
}

std::vector<SamplePayload> ContainerReader::iterate_chunk(std::uint64_t chunk_id) const {
  if (chunk_id >= chunk_count()) {
    fail(ErrorCode::kIndexOutOfRange, "chunk " + std::to_string(chunk_id) + " of " +
                                          std::to_string(chunk_count()));
  }
  const auto& c = index_->chunks[chunk_id];
  const auto& first = index_->records[c.first_record];
  const auto& last = index_->records[c.first_record + c.record_count - 1];
  Bytes block(last.offset + last.frame_len - first.offset);
  file_->read_at(first.offset, block);
  std::vector<SamplePayload> out;
  out.reserve(c.record_count);
  for (std::uint64_t i = 0; i < c.record_count; ++i) {
    const std::uint64_t rec = c.first_record + i;
    const auto& r = index_->records[rec];
    const ByteView frame = ByteView(block).subspan(r.offset - first.offset, r.frame_len);
    try {
      out.push_back(decode_payload(check_frame(frame, rec)));
    } catch (Error& e) {
      e.with_record_index(rec);
      throw;
    }
  }
  return out;
}

VerificationReport ContainerReader::verify() const {
  VerificationReport report;
  Bytes block;
  for (const auto& c : index_->chunks) {
    const auto& first = index_->records[c.first_record];
    const auto& last = index_->records[c.first_record + c.record_count - 1];
    block.resize(last.offset + last.frame_len - first.offset);
    file_->read_at(first.offset, block);
    for (std::uint64_t i = 0; i < c.record_count; ++i) {
      const auto& r = index_->records[c.first_record + i];
      if (!frame_ok(ByteView(block).subspan(r.offset - first.offset, r.frame_len))) {
        report.corrupt_records.push_back(c.first_record + i);
      }
    }
  }
  report.ok = report.corrupt_records.empty();
  return report;
}

ContainerReader open_container(const std::filesystem::path& path) {
  return ContainerReader(open_random_access(path));
}

}  // namespace loadforge
