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

// Kernel-level comparisons behind the bench grid: fused vs composed
// crop+normalize, whole augmentation presets, and sample fetches from loose
// PPM files vs a packed container.

#include <benchmark/benchmark.h>

#include <memory>
#include <random>

#include "loadforge/augment.hpp"
#include "loadforge/record_format.hpp"
#include "loadforge/sample_store.hpp"
#include "test_support.hpp"

namespace loadforge {
namespace {

ImageTensor bench_image(std::uint32_t side) {
  std::mt19937_64 gen(side);
  return testing::random_u8_image(gen, side, side).to_f32();
}

void BM_ComposedCropNormalize(benchmark::State& state) {
  const auto side = static_cast<std::uint32_t>(state.range(0));
  const ImageTensor img = bench_image(side);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    SampleRng rng(seed++);
    benchmark::DoNotOptimize(
        normalize(random_crop(img, rng, side * 7 / 8, side * 7 / 8), kDefaultMean, kDefaultStd));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_ComposedCropNormalize)->Arg(64)->Arg(256);

void BM_FusedCropNormalize(benchmark::State& state) {
  const auto side = static_cast<std::uint32_t>(state.range(0));
  const ImageTensor img = bench_image(side);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    SampleRng rng(seed++);
    benchmark::DoNotOptimize(
        fused_crop_normalize(img, rng, side * 7 / 8, side * 7 / 8, kDefaultMean, kDefaultStd));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_FusedCropNormalize)->Arg(64)->Arg(256);

void BM_Preset(benchmark::State& state) {
  const auto preset = state.range(0) == 0 ? AugmentPreset::kFew : AugmentPreset::kExtensive;
  PresetParams params;
  params.short_side = 128;
  params.crop = 112;
  const AugmentChain chain = make_preset(preset, params);
  std::mt19937_64 gen(1);
  const ImageTensor img = testing::random_u8_image(gen, 128, 160);
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(apply_chain(img, chain, seed++));
  state.SetLabel(std::string(preset_name(preset)));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_Preset)->Arg(0)->Arg(1);

class SourceFixture : public benchmark::Fixture {
 public:
  void SetUp(const benchmark::State&) override {
    if (files_) return;
    dir_ = std::make_unique<testing::TempDir>();
    testing::write_ppm_tree(dir_->path() / "ds", {{"a", 1000}, {"b", 1000}}, 32, 32, 3);
    pack_directory(dir_->path() / "ds", dir_->path() / "ds.brc");
    files_ = std::make_unique<DatasetSource>(scan_directory(dir_->path() / "ds"));
    packed_ = std::make_unique<DatasetSource>(open_container_source(dir_->path() / "ds.brc"));
  }

 protected:
  static inline std::unique_ptr<testing::TempDir> dir_;
  static inline std::unique_ptr<DatasetSource> files_;
  static inline std::unique_ptr<DatasetSource> packed_;
};

BENCHMARK_DEFINE_F(SourceFixture, FileFetch)(benchmark::State& state) {
  std::uint64_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(files_->fetch(i++ % files_->size()));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK_REGISTER_F(SourceFixture, FileFetch);

BENCHMARK_DEFINE_F(SourceFixture, ContainerFetch)(benchmark::State& state) {
  std::uint64_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(packed_->fetch(i++ % packed_->size()));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK_REGISTER_F(SourceFixture, ContainerFetch);

}  // namespace
}  // namespace loadforge

BENCHMARK_MAIN();
