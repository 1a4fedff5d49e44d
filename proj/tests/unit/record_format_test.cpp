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

#include <gtest/gtest.h>

#include <algorithm>
#include <cstring>
#include <mutex>
#include <random>
#include <thread>

#include "loadforge/crc32.hpp"
#include "test_support.hpp"

namespace loadforge {
namespace {

using testing::code_of;
using testing::flip_bit;
using testing::TempDir;

SamplePayload encoded_sample(const std::string& key, std::size_t body_bytes,
                             std::uint8_t fill = 0xAB) {
  SamplePayload s;
  s.key = key;
  s.label = 3;
  s.body = Bytes(body_bytes, fill);
  return s;
}

// Payload whose frame is exactly `frame_bytes` long.
SamplePayload sample_with_frame(const std::string& key, std::size_t frame_bytes) {
  const std::size_t fixed = kFrameOverhead + 4 + key.size() + 8 + 1;
  return encoded_sample(key, frame_bytes - fixed);
}

std::vector<SamplePayload> random_samples(std::mt19937_64& gen, int n, std::size_t max_bytes) {
  std::vector<SamplePayload> out;
  for (int i = 0; i < n; ++i) {
    SamplePayload s;
    s.key = "k/" + std::to_string(i) + "/\xC3\xA9";  // non-ASCII UTF-8
    s.label = static_cast<std::int64_t>(gen() % 1000);
    if (gen() % 2 == 0) {
      Bytes b(gen() % (max_bytes + 1));
      for (auto& x : b) x = static_cast<std::uint8_t>(gen());
      s.body = std::move(b);
    } else {
      const std::uint32_t h = 1 + gen() % 12;
      const std::uint32_t w = 1 + gen() % 12;
      if (gen() % 2 == 0) {
        s.body = testing::random_u8_image(gen, h, w);
      } else {
        s.body = testing::random_f32_image(gen, h, w, 1 + gen() % 4);
      }
    }
    out.push_back(std::move(s));
  }
  return out;
}

// Hand-assembled container bytes, independent of the writer.
Bytes oracle_container(const std::vector<Bytes>& payloads, std::uint64_t target) {
  Bytes f;
  auto u32 = [&](std::uint32_t v) { for (int i = 0; i < 4; ++i) f.push_back((v >> (8 * i)) & 0xFF); };
  auto u64 = [&](std::uint64_t v) { for (int i = 0; i < 8; ++i) f.push_back((v >> (8 * i)) & 0xFF); };
  f.insert(f.end(), {'B', 'R', 'C', '1'});
  u32(1);
  u64(target);
  f.insert(f.end(), 16, 0);
  std::vector<std::pair<std::uint64_t, std::uint64_t>> recs;
  std::vector<std::pair<std::uint64_t, std::uint64_t>> chunks;
  std::uint64_t chunk_bytes = 0;
  for (std::size_t i = 0; i < payloads.size(); ++i) {
    const std::uint64_t frame = 16 + payloads[i].size();
    if (chunks.empty() || (chunks.back().second > 0 && chunk_bytes + frame > target)) {
      chunks.emplace_back(i, 0);
      chunk_bytes = 0;
    }
    ++chunks.back().second;
    chunk_bytes += frame;
    recs.emplace_back(f.size(), frame);
    Bytes len;
    for (int k = 0; k < 8; ++k) len.push_back((payloads[i].size() >> (8 * k)) & 0xFF);
    u64(payloads[i].size());
    u32(crc32(len));
    f.insert(f.end(), payloads[i].begin(), payloads[i].end());
    u32(crc32(payloads[i]));
  }
  const std::uint64_t index_offset = f.size();
  for (auto [o, l] : recs) { u64(o); u64(l); }
  for (auto [a, n] : chunks) { u64(a); u64(n); }
  const std::uint32_t index_crc =
      crc32(ByteView(f).subspan(index_offset, f.size() - index_offset));
  u64(index_offset);
  u64(recs.size());
  u64(chunks.size());
  u32(index_crc);
  f.insert(f.end(), {'B', 'R', 'C', 'E'});
  return f;
}

TEST(RecordFormat, WriterMatchesHandAssembledBytes) {
  TempDir dir;
  std::mt19937_64 gen(11);
  const auto samples = random_samples(gen, 40, 900);
  std::vector<Bytes> payloads;
  for (const auto& s : samples) payloads.push_back(encode_payload(s));
  write_container(samples, 4096, dir / "a.brc");
  EXPECT_EQ(read_file(dir / "a.brc"), oracle_container(payloads, 4096));
}

TEST(RecordFormat, PayloadLayout) {
  SamplePayload s;
  s.key = "ab";
  s.label = -2;
  s.body = ImageTensor(1, 1, 3, std::vector<std::uint8_t>{1, 2, 3});
  const Bytes expected = {2, 0, 0, 0, 'a', 'b', 0xFE, 0xFF, 0xFF, 0xFF, 0xFF, 0xFF, 0xFF, 0xFF,
                          0,  // kind
                          1, 0, 0, 0, 1, 0, 0, 0, 3, 0, 0, 0, 0, 1, 2, 3};
  EXPECT_EQ(encode_payload(s), expected);
  EXPECT_EQ(decode_payload(expected), s);
}

TEST(RecordFormat, PayloadRejectsBadKindAndSizes) {
  Bytes p = encode_payload(encoded_sample("x", 4));
  Bytes bad_kind = p;
  bad_kind[4 + 1 + 8] = 7;
  EXPECT_EQ(code_of([&] { decode_payload(bad_kind); }), ErrorCode::kPayloadError);

  SamplePayload t;
  t.key = "t";
  t.body = ImageTensor(2, 2, 3, std::vector<std::uint8_t>(12, 5));
  Bytes tensor = encode_payload(t);
  tensor.pop_back();
  EXPECT_EQ(code_of([&] { decode_payload(tensor); }), ErrorCode::kPayloadError);

  Bytes bad_utf8 = encode_payload(encoded_sample("z", 1));
  bad_utf8[4] = 0xFF;
  EXPECT_EQ(code_of([&] { decode_payload(bad_utf8); }), ErrorCode::kPayloadError);
}

TEST(RecordFormat, SingleSmallRecord) {
  TempDir dir;
  const std::vector<SamplePayload> one = {encoded_sample("a", 10)};
  const auto summary = write_container(one, 4096, dir / "c.brc");
  EXPECT_EQ(summary.record_count, 1u);
  EXPECT_EQ(summary.chunk_count, 1u);
  EXPECT_EQ(summary.total_bytes, std::filesystem::file_size(dir / "c.brc"));
}

TEST(RecordFormat, ChunkRuleThreeFramesOf3000) {
  TempDir dir;
  const std::vector<SamplePayload> s = {sample_with_frame("a", 3000), sample_with_frame("b", 3000),
                                        sample_with_frame("c", 3000)};
  ASSERT_EQ(encode_frame(encode_payload(s[0])).size(), 3000u);
  EXPECT_EQ(write_container(s, 4096, dir / "c.brc").chunk_count, 3u);
}

TEST(RecordFormat, OversizedFrameGetsItsOwnChunk) {
  TempDir dir;
  const std::vector<SamplePayload> s = {sample_with_frame("big", 10000)};
  EXPECT_EQ(write_container(s, 4096, dir / "c.brc").chunk_count, 1u);
}

TEST(RecordFormat, WriterErrors) {
  TempDir dir;
  EXPECT_EQ(code_of([&] { write_container({}, 4096, dir / "e.brc"); }), ErrorCode::kEmptyInput);
  const std::vector<SamplePayload> dup = {encoded_sample("a", 1), encoded_sample("a", 2)};
  EXPECT_EQ(code_of([&] { write_container(dup, 4096, dir / "d.brc"); }),
            ErrorCode::kDuplicateKey);
  const std::vector<SamplePayload> one = {encoded_sample("a", 1)};
  EXPECT_EQ(code_of([&] { write_container(one, 4095, dir / "t.brc"); }),
            ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([&] { write_container(one, 4096, dir / "missing" / "x.brc"); }),
            ErrorCode::kIoError);
}

TEST(RecordFormat, UnfinishedWriterLeavesUnreadableFile) {
  TempDir dir;
  {
    ContainerWriter w(dir / "u.brc", 4096);
    w.add(encoded_sample("a", 10));
  }
  EXPECT_EQ(code_of([&] { open_container(dir / "u.brc"); }), ErrorCode::kTruncatedFile);
}

TEST(RecordFormat, RoundtripAndRandomAccess) {
  TempDir dir;
  std::mt19937_64 gen(5);
  const auto samples = random_samples(gen, 120, 5000);
  write_container(samples, 8192, dir / "r.brc");
  const ContainerReader r = open_container(dir / "r.brc");
  ASSERT_EQ(r.record_count(), samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) EXPECT_EQ(r.read_record(i), samples[i]);
  EXPECT_EQ(r.read_record(1), r.read_record(1));
  EXPECT_EQ(code_of([&] { r.read_record(r.record_count()); }), ErrorCode::kIndexOutOfRange);
  EXPECT_EQ(code_of([&] { r.iterate_chunk(r.chunk_count()); }), ErrorCode::kIndexOutOfRange);
}

TEST(RecordFormat, RoundtripLargePayloadSizes) {
  TempDir dir;
  std::mt19937_64 gen(6);
  std::vector<SamplePayload> samples;
  for (int i = 0; i < 60; ++i) {
    Bytes b(gen() % (64 * 1024 + 1));
    for (auto& x : b) x = static_cast<std::uint8_t>(gen());
    SamplePayload s;
    s.key = "p" + std::to_string(i);
    s.body = std::move(b);
    samples.push_back(std::move(s));
  }
  samples[0].body = Bytes{};
  write_container(samples, 4096, dir / "big.brc");
  const ContainerReader r = open_container(dir / "big.brc");
  for (std::size_t i = 0; i < samples.size(); ++i) ASSERT_EQ(r.read_record(i), samples[i]);
}

TEST(RecordFormat, IndexInvariants) {
  TempDir dir;
  std::mt19937_64 gen(7);
  const auto samples = random_samples(gen, 200, 3000);
  write_container(samples, 4096, dir / "i.brc");
  const ContainerReader r = open_container(dir / "i.brc");
  const auto& idx = r.index();
  ASSERT_FALSE(idx.records.empty());
  EXPECT_EQ(idx.records.front().offset, kHeaderSize);
  for (std::size_t i = 1; i < idx.records.size(); ++i) {
    EXPECT_EQ(idx.records[i].offset, idx.records[i - 1].offset + idx.records[i - 1].frame_len);
  }
  std::uint64_t next = 0;
  for (const auto& c : idx.chunks) {
    EXPECT_EQ(c.first_record, next);
    ASSERT_GT(c.record_count, 0u);
    std::uint64_t bytes = 0;
    for (std::uint64_t k = 0; k < c.record_count; ++k) bytes += idx.records[c.first_record + k].frame_len;
    if (c.record_count > 1) {
      EXPECT_LE(bytes, 4096u);
    }
    next += c.record_count;
  }
  EXPECT_EQ(next, idx.records.size());
}

TEST(RecordFormat, ChunkIterationEqualsRecordReads) {
  TempDir dir;
  std::mt19937_64 gen(8);
  const auto samples = random_samples(gen, 150, 2500);
  write_container(samples, 4096, dir / "c.brc");
  const ContainerReader r = open_container(dir / "c.brc");
  ASSERT_GT(r.chunk_count(), 1u);
  std::vector<SamplePayload> all;
  for (std::uint64_t c = 0; c < r.chunk_count(); ++c) {
    auto part = r.iterate_chunk(c);
    all.insert(all.end(), part.begin(), part.end());
  }
  ASSERT_EQ(all.size(), r.record_count());
  for (std::size_t i = 0; i < all.size(); ++i) EXPECT_EQ(all[i], r.read_record(i));

  write_container(std::span(samples).first(3), kDefaultChunkTargetBytes, dir / "one.brc");
  const ContainerReader one = open_container(dir / "one.brc");
  ASSERT_EQ(one.chunk_count(), 1u);
  EXPECT_EQ(one.iterate_chunk(0), std::vector<SamplePayload>(samples.begin(), samples.begin() + 3));
}

class RecordFormatCorruption : public ::testing::Test {
 protected:
  void SetUp() override {
    std::mt19937_64 gen(9);
    samples_ = random_samples(gen, 12, 700);
    path_ = dir_ / "x.brc";
    write_container(samples_, 4096, path_);
    index_ = open_container(path_).index();
  }

  TempDir dir_;
  std::vector<SamplePayload> samples_;
  std::filesystem::path path_;
  ContainerIndex index_;
};

TEST_F(RecordFormatCorruption, PristineVerifies) {
  const auto rep = verify_container(open_container(path_));
  EXPECT_TRUE(rep.ok);
  EXPECT_TRUE(rep.corrupt_records.empty());
}

TEST_F(RecordFormatCorruption, PayloadByteFlipIsReported) {
  const auto& rec = index_.records[3];
  flip_bit(path_, rec.offset + 12, 0);
  const ContainerReader r = open_container(path_);
  const auto rep = verify_container(r);
  EXPECT_FALSE(rep.ok);
  EXPECT_EQ(rep.corrupt_records, std::vector<std::uint64_t>{3});
  try {
    r.read_record(3);
    FAIL() << "expected CorruptRecord";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kCorruptRecord);
    ASSERT_TRUE(e.record_index().has_value());
    EXPECT_EQ(*e.record_index(), 3u);
  }
  EXPECT_EQ(r.read_record(2), samples_[2]);
}

TEST_F(RecordFormatCorruption, TwoCorruptRecordsListedAscending) {
  flip_bit(path_, index_.records[9].offset + index_.records[9].frame_len - 1, 7);
  flip_bit(path_, index_.records[1].offset + 3, 2);
  const auto rep = verify_container(open_container(path_));
  EXPECT_EQ(rep.corrupt_records, (std::vector<std::uint64_t>{1, 9}));
}

TEST_F(RecordFormatCorruption, EverySingleBitFlipInFramesIsDetected) {
  const Bytes pristine = read_file(path_);
  std::mt19937_64 gen(10);
  for (int t = 0; t < 400; ++t) {
    const std::uint64_t rec = gen() % index_.records.size();
    const auto& e = index_.records[rec];
    const std::uint64_t byte = e.offset + gen() % e.frame_len;
    const int bit = static_cast<int>(gen() % 8);
    Bytes b = pristine;
    b[byte] ^= static_cast<std::uint8_t>(1u << bit);
    write_file(path_, b);
    const auto rep = verify_container(open_container(path_));
    ASSERT_EQ(rep.corrupt_records, std::vector<std::uint64_t>{rec})
        << "byte " << byte << " bit " << bit;
  }
}

TEST_F(RecordFormatCorruption, TruncationAndHeaderDamage) {
  const Bytes pristine = read_file(path_);
  Bytes cut(pristine.begin(), pristine.end() - 1);
  write_file(path_, cut);
  EXPECT_EQ(code_of([&] { open_container(path_); }), ErrorCode::kTruncatedFile);

  Bytes tiny(pristine.begin(), pristine.begin() + 20);
  write_file(path_, tiny);
  EXPECT_EQ(code_of([&] { open_container(path_); }), ErrorCode::kTruncatedFile);

  Bytes magic = pristine;
  magic[0] = 'X';
  write_file(path_, magic);
  EXPECT_EQ(code_of([&] { open_container(path_); }), ErrorCode::kFormatError);

  Bytes version = pristine;
  version[4] = 2;
  write_file(path_, version);
  EXPECT_EQ(code_of([&] { open_container(path_); }), ErrorCode::kFormatError);

  Bytes reserved = pristine;
  reserved[20] = 1;
  write_file(path_, reserved);
  EXPECT_EQ(code_of([&] { open_container(path_); }), ErrorCode::kFormatError);
}

TEST_F(RecordFormatCorruption, IndexDamage) {
  const Bytes pristine = read_file(path_);
  const std::uint64_t crc_at = pristine.size() - 8;
  Bytes crc = pristine;
  crc[crc_at] ^= 0x01;
  write_file(path_, crc);
  EXPECT_EQ(code_of([&] { open_container(path_); }), ErrorCode::kCorruptIndex);

  const std::uint64_t index_offset = get_u64(pristine.data() + pristine.size() - 32);
  Bytes body = pristine;
  body[index_offset + 2] ^= 0x10;
  write_file(path_, body);
  EXPECT_EQ(code_of([&] { open_container(path_); }), ErrorCode::kCorruptIndex);
}

// Records every read so open() can be shown to touch only header, footer and
// index bytes.
class CountingFile final : public RandomAccessFile {
 public:
  explicit CountingFile(std::shared_ptr<const RandomAccessFile> inner) : inner_(std::move(inner)) {}
  std::uint64_t size() const override { return inner_->size(); }
  void read_at(std::uint64_t offset, std::span<std::uint8_t> dst) const override {
    std::lock_guard<std::mutex> lock(mu_);
    reads_.emplace_back(offset, dst.size());
    inner_->read_at(offset, dst);
  }
  std::vector<std::pair<std::uint64_t, std::uint64_t>> reads() const {
    std::lock_guard<std::mutex> lock(mu_);
    return reads_;
  }

 private:
  std::shared_ptr<const RandomAccessFile> inner_;
  mutable std::mutex mu_;
  mutable std::vector<std::pair<std::uint64_t, std::uint64_t>> reads_;
};

std::uint64_t bytes_read_on_open(const std::filesystem::path& path) {
  auto counting = std::make_shared<CountingFile>(open_random_access(path));
  const ContainerReader r = open_container(counting);
  const std::uint64_t size = r.file_size();
  const std::uint64_t index_begin = r.footer().index_offset;
  std::uint64_t total = 0;
  for (auto [off, len] : counting->reads()) {
    const bool header = off + len <= kHeaderSize;
    const bool tail = off >= index_begin && off + len <= size;
    EXPECT_TRUE(header || tail) << "open read [" << off << ", " << off + len << ")";
    total += len;
  }
  return total;
}

TEST(RecordFormat, OpenReadsOnlyHeaderFooterAndIndex) {
  TempDir dir;
  std::vector<SamplePayload> small;
  std::vector<SamplePayload> large;
  for (int i = 0; i < 50; ++i) {
    small.push_back(encoded_sample("k" + std::to_string(i), 16));
    large.push_back(encoded_sample("k" + std::to_string(i), 40000));
  }
  const auto a = write_container(small, 4096, dir / "small.brc");
  const auto b = write_container(large, 4096, dir / "large.brc");
  const std::uint64_t read_small = bytes_read_on_open(dir / "small.brc");
  const std::uint64_t read_large = bytes_read_on_open(dir / "large.brc");
  EXPECT_EQ(read_small, kHeaderSize + kFooterSize + 16 * (a.record_count + a.chunk_count));
  EXPECT_EQ(read_large, kHeaderSize + kFooterSize + 16 * (b.record_count + b.chunk_count));
}

TEST(RecordFormat, IterateChunkIsOneContiguousRead) {
  TempDir dir;
  std::mt19937_64 gen(12);
  const auto samples = random_samples(gen, 40, 800);
  write_container(samples, 4096, dir / "c.brc");
  auto counting = std::make_shared<CountingFile>(open_random_access(dir / "c.brc"));
  const ContainerReader r = open_container(counting);
  const std::size_t before = counting->reads().size();
  r.iterate_chunk(1);
  EXPECT_EQ(counting->reads().size(), before + 1);
}

TEST(RecordFormat, ConcurrentReadersAgree) {
  TempDir dir;
  std::mt19937_64 gen(13);
  const auto samples = random_samples(gen, 64, 2000);
  write_container(samples, 4096, dir / "c.brc");
  const ContainerReader r = open_container(dir / "c.brc");
  std::atomic<int> mismatches{0};
  std::vector<std::thread> threads;
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&, t] {
      for (int round = 0; round < 5; ++round) {
        for (std::size_t i = t; i < samples.size(); i += 3) {
          if (!(r.read_record(i) == samples[i])) ++mismatches;
        }
      }
    });
  }
  for (auto& th : threads) th.join();
  EXPECT_EQ(mismatches.load(), 0);
}

}  // namespace
}  // namespace loadforge
