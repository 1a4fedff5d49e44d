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

// Shared fixtures for the unit tests: scratch directories, random images and
// small synthetic datasets.

#ifndef LOADFORGE_TESTS_TEST_SUPPORT_HPP_
#define LOADFORGE_TESTS_TEST_SUPPORT_HPP_

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "loadforge/byte_io.hpp"
#include "loadforge/error.hpp"
#include "loadforge/image.hpp"

namespace loadforge::testing {

class TempDir {
 public:
  TempDir() {
    std::string tmpl = (std::filesystem::temp_directory_path() / "loadforge-XXXXXX").string();
    if (::mkdtemp(tmpl.data()) == nullptr) throw std::runtime_error("mkdtemp failed");
    path_ = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline ImageTensor random_u8_image(std::mt19937_64& gen, std::uint32_t h, std::uint32_t w,
                                   std::uint32_t c = 3) {
  std::vector<std::uint8_t> px(std::size_t{h} * w * c);
  std::uniform_int_distribution<int> d(0, 255);
  for (auto& p : px) p = static_cast<std::uint8_t>(d(gen));
  return ImageTensor(h, w, c, std::move(px));
}

inline ImageTensor random_f32_image(std::mt19937_64& gen, std::uint32_t h, std::uint32_t w,
                                    std::uint32_t c = 3) {
  std::vector<float> px(std::size_t{h} * w * c);
  std::uniform_real_distribution<float> d(0.0f, 255.0f);
  for (auto& p : px) p = d(gen);
  return ImageTensor(h, w, c, std::move(px));
}

// root/<class>/<stem>.ppm for every (class, count) pair, random pixels.
inline void write_ppm_tree(const std::filesystem::path& root,
                           const std::vector<std::pair<std::string, int>>& classes,
                           std::uint32_t h, std::uint32_t w, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  for (const auto& [name, count] : classes) {
    std::filesystem::create_directories(root / name);
    for (int i = 0; i < count; ++i) {
      char stem[32];
      std::snprintf(stem, sizeof(stem), "s%04d.ppm", i);
      write_file(root / name / stem, encode_ppm(random_u8_image(gen, h, w)));
    }
  }
}

inline void flip_bit(const std::filesystem::path& path, std::uint64_t byte, int bit) {
  Bytes b = read_file(path);
  b.at(byte) ^= static_cast<std::uint8_t>(1u << bit);
  write_file(path, b);
}

template <typename F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  throw std::runtime_error("expected a loadforge::Error");
}

}  // namespace loadforge::testing

#endif  // LOADFORGE_TESTS_TEST_SUPPORT_HPP_
