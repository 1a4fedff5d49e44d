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

#ifndef LOADFORGE_CRC32_HPP_
#define LOADFORGE_CRC32_HPP_

#include <cstdint>
#include <span>
#include <string_view>

namespace loadforge {

// CRC-32/ISO-HDLC: reflected polynomial 0xEDB88320, init and final xor
// 0xFFFFFFFF. Carry-less multiply folding on x86-64 CPUs with PCLMULQDQ for
// buffers of 64 bytes or more, slicing-by-8 tables otherwise.
std::uint32_t crc32(std::span<const std::uint8_t> data);

// Continues a running CRC. `crc` is a previously returned value (0 to start).
std::uint32_t crc32_extend(std::uint32_t crc, std::span<const std::uint8_t> data);

inline std::uint32_t crc32(std::string_view s) {
  return crc32(std::span<const std::uint8_t>(
      reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
}

}  // namespace loadforge

#endif  // LOADFORGE_CRC32_HPP_
