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

#ifndef LOADFORGE_RNG_HPP_
#define LOADFORGE_RNG_HPP_

#include <cstdint>
#include <utility>
#include <vector>

namespace loadforge {

// SplitMix64. Every random decision in the library comes from one of these,
// so results are reproducible bit for bit across platforms.
class SampleRng {
 public:
  constexpr explicit SampleRng(std::uint64_t state = 0) : state_(state) {}

  constexpr std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53 bits: (next_u64 >> 11) * 2^-53. One draw.
  double next_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  constexpr std::uint64_t state() const { return state_; }

  friend constexpr bool operator==(const SampleRng&, const SampleRng&) = default;

 private:
  std::uint64_t state_;
};

// Functional form of one step: (output, advanced generator).
constexpr std::pair<std::uint64_t, SampleRng> splitmix_next(SampleRng rng) {
  const std::uint64_t out = rng.next_u64();
  return {out, rng};
}

// First SplitMix64 output from `state`.
constexpr std::uint64_t splitmix_mix(std::uint64_t state) {
  return splitmix_next(SampleRng(state)).first;
}

// Seed for an epoch's shuffle: mix(mix(global_seed) ^ epoch).
constexpr std::uint64_t epoch_seed(std::uint64_t global_seed, std::uint64_t epoch) {
  return splitmix_mix(splitmix_mix(global_seed) ^ epoch);
}

// Per-sample augmentation seed, independent of which worker runs the sample.
constexpr std::uint64_t sample_seed(std::uint64_t global_seed, std::uint64_t epoch,
                                    std::uint64_t index) {
  return splitmix_mix(epoch_seed(global_seed, epoch) ^ index);
}

// Fisher-Yates shuffle of [0, n) driven by SampleRng(epoch_seed(...)), with
// j = next_u64 mod (i + 1). Throws EmptyDataset for n == 0.
std::vector<std::uint64_t> permutation(std::uint64_t global_seed, std::uint64_t epoch,
                                       std::uint64_t n);

}  // namespace loadforge

#endif  // LOADFORGE_RNG_HPP_
