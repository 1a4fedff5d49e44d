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

#include "loadforge/rng.hpp"

#include <numeric>

#include "loadforge/error.hpp"

namespace loadforge {

std::vector<std::uint64_t> permutation(std::uint64_t global_seed, std::uint64_t epoch,
                                       std::uint64_t n) {
  if (n == 0) fail(ErrorCode::kEmptyDataset, "cannot shuffle an empty dataset");
  std::vector<std::uint64_t> order(n);
  std::iota(order.begin(), order.end(), std::uint64_t{0});
  SampleRng rng(epoch_seed(global_seed, epoch));
  for (std::uint64_t i = n - 1; i >= 1; --i) {
    const std::uint64_t j = rng.next_u64() % (i + 1);
    std::swap(order[i], order[j]);
  }
  return order;
}

}  // namespace loadforge
