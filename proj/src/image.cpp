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

#include "loadforge/image.hpp"

#include <bit>
#include <cctype>
#include <cstring>
#include <string>

#include "loadforge/error.hpp"

namespace loadforge {

namespace {

void check_size(std::uint32_t h, std::uint32_t w, std::uint32_t c, std::size_t n) {
  if (static_cast<std::size_t>(h) * w * c != n) {
    fail(ErrorCode::kInvalidArgument,
         "tensor data length " + std::to_string(n) + " does not match " +
             std::to_string(h) + "x" + std::to_string(w) + "x" + std::to_string(c));
  }
}

std::uint32_t f32_bits(float f) { return std::bit_cast<std::uint32_t>(f); }

}  // namespace

ImageTensor::ImageTensor(std::uint32_t height, std::uint32_t width,
                         std::uint32_t channels, std::vector<std::uint8_t> data)
    : height_(height), width_(width), channels_(channels), data_(std::move(data)) {
  check_size(height, width, channels, u8().size());
}

ImageTensor::ImageTensor(std::uint32_t height, std::uint32_t width,
                         std::uint32_t channels, std::vector<float> data)
    : height_(height), width_(width), channels_(channels), data_(std::move(data)) {
  check_size(height, width, channels, f32().size());
}

ImageTensor ImageTensor::zeros_u8(std::uint32_t h, std::uint32_t w, std::uint32_t c) {
  return ImageTensor(h, w, c, std::vector<std::uint8_t>(std::size_t{h} * w * c));
}

ImageTensor ImageTensor::zeros_f32(std::uint32_t h, std::uint32_t w, std::uint32_t c) {
  return ImageTensor(h, w, c, std::vector<float>(std::size_t{h} * w * c));
}

std::span<const std::uint8_t> ImageTensor::u8() const {
  const auto* v = std::get_if<std::vector<std::uint8_t>>(&data_);
  if (v == nullptr) fail(ErrorCode::kInvalidArgument, "tensor is not u8");
  return *v;
}

std::span<std::uint8_t> ImageTensor::u8() {
  auto* v = std::get_if<std::vector<std::uint8_t>>(&data_);
  if (v == nullptr) fail(ErrorCode::kInvalidArgument, "tensor is not u8");
  return *v;
}

std::span<const float> ImageTensor::f32() const {
  const auto* v = std::get_if<std::vector<float>>(&data_);
  if (v == nullptr) fail(ErrorCode::kInvalidArgument, "tensor is not f32");
  return *v;
}

std::span<float> ImageTensor::f32() {
  auto* v = std::get_if<std::vector<float>>(&data_);
  if (v == nullptr) fail(ErrorCode::kInvalidArgument, "tensor is not f32");
  return *v;
}

std::span<const std::uint8_t> ImageTensor::bytes() const {
  return std::visit(
      [](const auto& v) {
        return std::span<const std::uint8_t>(
            reinterpret_cast<const std::uint8_t*>(v.data()),
            v.size() * sizeof(v[0]));
      },
      data_);
}

ImageTensor ImageTensor::to_f32() const {
  if (dtype() == DType::kF32) return *this;
  const auto src = u8();
  std::vector<float> out(src.size());
  for (std::size_t i = 0; i < src.size(); ++i) out[i] = static_cast<float>(src[i]);
  return ImageTensor(height_, width_, channels_, std::move(out));
}

bool operator==(const ImageTensor& a, const ImageTensor& b) {
  if (a.height_ != b.height_ || a.width_ != b.width_ || a.channels_ != b.channels_ ||
      a.dtype() != b.dtype()) {
    return false;
  }
  const auto x = a.bytes();
  const auto y = b.bytes();
  return x.size() == y.size() && std::memcmp(x.data(), y.data(), x.size()) == 0;
}

namespace {

class PpmHeaderParser {
 public:
  explicit PpmHeaderParser(ByteView bytes) : bytes_(bytes) {}

  // Skips whitespace and '#' comments running to end of line.
  void skip_separators() {
    while (pos_ < bytes_.size()) {
      const auto c = bytes_[pos_];
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(c)) {
        ++pos_;
      } else {
        return;
      }
    }
  }

  std::uint32_t read_uint(const char* what) {
    skip_separators();
    if (pos_ >= bytes_.size()) {
      fail(ErrorCode::kTruncatedFile, std::string("PPM header ends before ") + what);
    }
    if (!std::isdigit(bytes_[pos_])) {
      fail(ErrorCode::kFormatError, std::string("PPM header: expected ") + what);
    }
    std::uint64_t v = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      v = v * 10 + (bytes_[pos_] - '0');
      if (v > 0xFFFFFFFFULL) {
        fail(ErrorCode::kFormatError, std::string("PPM header: ") + what + " too large");
      }
      ++pos_;
    }
    return static_cast<std::uint32_t>(v);
  }

  std::size_t pos() const { return pos_; }
  void advance(std::size_t n) { pos_ += n; }

 private:
  ByteView bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

ImageTensor decode_ppm(ByteView bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '6') {
    fail(ErrorCode::kFormatError, "not a binary PPM (missing P6 magic)");
  }
  PpmHeaderParser parser(bytes.subspan(2));
  if (bytes.size() > 2 && !std::isspace(bytes[2]) && bytes[2] != '#') {
    fail(ErrorCode::kFormatError, "PPM magic not followed by whitespace");
  }
  const std::uint32_t width = parser.read_uint("width");
  const std::uint32_t height = parser.read_uint("height");
  const std::uint32_t maxval = parser.read_uint("maxval");
  if (width == 0 || height == 0) fail(ErrorCode::kFormatError, "PPM has zero dimension");
  if (maxval != 255) {
    fail(ErrorCode::kUnsupported, "PPM maxval " + std::to_string(maxval) +
                                      " (only 255 is supported)");
  }
  std::size_t pos = 2 + parser.pos();
  if (pos >= bytes.size()) fail(ErrorCode::kTruncatedFile, "PPM ends after header");
  if (!std::isspace(bytes[pos])) {
    fail(ErrorCode::kFormatError, "PPM maxval not followed by whitespace");
  }
  ++pos;
  const std::size_t need = std::size_t{3} * width * height;
  if (bytes.size() - pos < need) {
    fail(ErrorCode::kTruncatedFile, "PPM pixel data has " +
                                        std::to_string(bytes.size() - pos) +
                                        " bytes, expected " + std::to_string(need));
  }
  std::vector<std::uint8_t> px(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                               bytes.begin() + static_cast<std::ptrdiff_t>(pos + need));
  return ImageTensor(height, width, 3, std::move(px));
}

Bytes encode_ppm(const ImageTensor& img) {
  if (img.channels() != 3 || img.dtype() != DType::kU8) {
    fail(ErrorCode::kInvalidArgument, "PPM encoding needs a u8 RGB tensor");
  }
  const std::string header = "P6\n" + std::to_string(img.width()) + " " +
                             std::to_string(img.height()) + "\n255\n";
  Bytes out(header.begin(), header.end());
  const auto px = img.u8();
  out.insert(out.end(), px.begin(), px.end());
  return out;
}

void encode_tensor_body(const ImageTensor& img, Bytes& out) {
  put_u32(out, img.height());
  put_u32(out, img.width());
  put_u32(out, img.channels());
  out.push_back(static_cast<std::uint8_t>(img.dtype()));
  if (img.dtype() == DType::kU8) {
    const auto px = img.u8();
    out.insert(out.end(), px.begin(), px.end());
  } else if constexpr (std::endian::native == std::endian::little) {
    const auto raw = img.bytes();
    out.insert(out.end(), raw.begin(), raw.end());
  } else {
    for (float f : img.f32()) put_u32(out, f32_bits(f));
  }
}

ImageTensor decode_tensor_body(ByteView bytes) {
  constexpr std::size_t kHead = 13;
  if (bytes.size() < kHead) fail(ErrorCode::kPayloadError, "tensor body shorter than header");
  const std::uint32_t h = get_u32(bytes.data());
  const std::uint32_t w = get_u32(bytes.data() + 4);
  const std::uint32_t c = get_u32(bytes.data() + 8);
  const std::uint8_t dt = bytes[12];
  if (dt > 1) fail(ErrorCode::kPayloadError, "unknown tensor dtype " + std::to_string(dt));
  const auto dtype = static_cast<DType>(dt);
  const unsigned __int128 need =
      static_cast<unsigned __int128>(h) * w * c * dtype_size(dtype);
  if (need != bytes.size() - kHead) {
    fail(ErrorCode::kPayloadError, "tensor body length mismatch for " +
                                       std::to_string(h) + "x" + std::to_string(w) +
                                       "x" + std::to_string(c));
  }
  const auto px = bytes.subspan(kHead);
  if (dtype == DType::kU8) {
    return ImageTensor(h, w, c, std::vector<std::uint8_t>(px.begin(), px.end()));
  }
  std::vector<float> vals(px.size() / 4);
  if constexpr (std::endian::native == std::endian::little) {
    std::memcpy(vals.data(), px.data(), px.size());
  } else {
    for (std::size_t i = 0; i < vals.size(); ++i) {
      vals[i] = std::bit_cast<float>(get_u32(px.data() + 4 * i));
    }
  }
  return ImageTensor(h, w, c, std::move(vals));
}

}  // namespace loadforge
