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

#ifndef LOADFORGE_IMAGE_HPP_
#define LOADFORGE_IMAGE_HPP_

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "loadforge/byte_io.hpp"

namespace loadforge {

enum class DType : std::uint8_t { kU8 = 0, kF32 = 1 };

inline std::size_t dtype_size(DType t) { return t == DType::kU8 ? 1 : 4; }

// H x W x C pixels, row-major, channels interleaved.
class ImageTensor {
 public:
  ImageTensor() = default;
  ImageTensor(std::uint32_t height, std::uint32_t width, std::uint32_t channels,
              std::vector<std::uint8_t> data);
  ImageTensor(std::uint32_t height, std::uint32_t width, std::uint32_t channels,
              std::vector<float> data);

  static ImageTensor zeros_u8(std::uint32_t h, std::uint32_t w, std::uint32_t c);
  static ImageTensor zeros_f32(std::uint32_t h, std::uint32_t w, std::uint32_t c);

  std::uint32_t height() const { return height_; }
  std::uint32_t width() const { return width_; }
  std::uint32_t channels() const { return channels_; }
  DType dtype() const {
    return std::holds_alternative<std::vector<std::uint8_t>>(data_) ? DType::kU8
                                                                   : DType::kF32;
  }
  std::size_t element_count() const {
    return static_cast<std::size_t>(height_) * width_ * channels_;
  }
  bool empty() const { return element_count() == 0; }

  std::span<const std::uint8_t> u8() const;
  std::span<std::uint8_t> u8();
  std::span<const float> f32() const;
  std::span<float> f32();

  // Raw storage bytes, used for bit-exact comparison and serialization.
  std::span<const std::uint8_t> bytes() const;

  // u8 -> f32 widening; f32 returns a copy.
  ImageTensor to_f32() const;

  friend bool operator==(const ImageTensor& a, const ImageTensor& b);

 private:
  std::uint32_t height_ = 0;
  std::uint32_t width_ = 0;
  std::uint32_t channels_ = 0;
  std::variant<std::vector<std::uint8_t>, std::vector<float>> data_;
};

// Binary PPM ("P6", maxval 255) codec.
ImageTensor decode_ppm(ByteView bytes);
Bytes encode_ppm(const ImageTensor& img);

// Raw tensor body: height u32, width u32, channels u32, dtype u8, then pixel
// bytes (f32 little-endian). This is also the whole content of a .brt file.
void encode_tensor_body(const ImageTensor& img, Bytes& out);
ImageTensor decode_tensor_body(ByteView bytes);

}  // namespace loadforge

#endif  // LOADFORGE_IMAGE_HPP_
