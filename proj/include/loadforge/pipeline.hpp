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

// Prefetching data-loading executor.
//
//   reader --(sample index)--> host pool --+--> offload pool --+--> collator --> batches
//                                  ^       |                   |
//                                  +-------+-------------------+
//
// The host pool fetches and decodes samples and runs the ops placed on Host;
// the offload pool (Shared allocation only) runs the ops placed on Offload.
// A sample may hop between pools if its placement alternates. The offload
// pool is a second host-resident thread pool standing in for accelerator-side
// preprocessing; it models load sharing, not device memory transfers.
//
// Each sample's augmentation RNG is seeded from (global_seed, epoch, dataset
// index), so output pixels never depend on worker counts, placement or
// scheduling. reference_epoch() computes the same batches on the calling
// thread and is the ground truth for the concurrent path.

#ifndef LOADFORGE_PIPELINE_HPP_
#define LOADFORGE_PIPELINE_HPP_

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include "loadforge/augment.hpp"
#include "loadforge/sample_store.hpp"

namespace loadforge {

enum class Pool : std::uint8_t { kHost, kOffload };

struct HostOnly {
  friend bool operator==(const HostOnly&, const HostOnly&) = default;
};
struct Shared {
  std::uint32_t offload_workers = 1;
  friend bool operator==(const Shared&, const Shared&) = default;
};
using Allocation = std::variant<HostOnly, Shared>;

// One pool tag per op of the (optimized) chain.
struct OpPlacement {
  std::vector<Pool> pools;
  friend bool operator==(const OpPlacement&, const OpPlacement&) = default;
};

struct PipelineConfig {
  std::shared_ptr<const DatasetSource> source;
  std::uint32_t batch_size = 32;
  std::variant<AugmentPreset, AugmentChain> preset_or_chain = AugmentPreset::kFew;
  PresetParams preset_params;  // only used with a preset
  Allocation allocation = HostOnly{};
  std::uint32_t host_workers = 1;
  std::uint32_t queue_depth = 2;  // batches
  bool preserve_order = true;
  std::uint64_t global_seed = 0;
  bool fuse_ops = true;
  bool drop_last = true;
  // Replaces assign_ops() for the optimized chain.
  std::optional<OpPlacement> placement_override;
  // Called on the worker right after each fetch, with the dataset index.
  // Instrumentation only; must not touch shared state without its own sync.
  std::function<void(std::uint64_t)> fetch_hook;
};

struct StageTiming {
  std::uint64_t wait_ns = 0;  // consumer blocked in next_batch
  std::uint64_t decode_ns = 0;
  std::uint64_t augment_host_ns = 0;
  std::uint64_t augment_offload_ns = 0;
  std::uint64_t collate_ns = 0;
};

struct Batch {
  std::uint32_t height = 0;
  std::uint32_t width = 0;
  std::uint32_t channels = 0;
  std::vector<float> features;  // size x H x W x C
  std::vector<std::int64_t> labels;
  std::vector<std::uint64_t> sample_indices;
  std::uint64_t epoch = 0;
  std::uint64_t batch_index = 0;  // slice k of the epoch order
  StageTiming timing;

  std::size_t size() const { return labels.size(); }
  std::size_t sample_dim() const { return std::size_t{height} * width * channels; }
};

// Compares everything except timing; features bit for bit.
bool same_content(const Batch& a, const Batch& b);

// Replaces each adjacent RandomCrop, Normalize pair with FusedCropNormalize
// when `fuse` is set. Idempotent.
AugmentChain optimize_chain(const AugmentChain& chain, bool fuse);

// HostOnly: everything on Host. Shared: geometric ops on Host, photometric and
// normalize ops on Offload; if that leaves every op on Host, the last op moves
// to Offload.
OpPlacement assign_ops(const AugmentChain& chain, const Allocation& allocation);

AugmentChain resolve_chain(const PipelineConfig& config);

struct PipelineStats {
  std::size_t max_in_flight_samples = 0;
  std::size_t max_queued_batches = 0;
  std::size_t sample_capacity = 0;  // queue_depth x batch_size
  std::size_t batch_capacity = 0;   // queue_depth
};

class Pipeline {
 public:
  // Validates the config; no threads start until the first next_batch.
  explicit Pipeline(PipelineConfig config);
  ~Pipeline();
  Pipeline(Pipeline&&) noexcept;
  Pipeline& operator=(Pipeline&&) noexcept;

  // Next batch of `epoch`, or nullopt at end of epoch. Asking for a different
  // epoch abandons the one in progress. Throws PipelineError if a worker
  // failed; the pipeline can be restarted with a later call.
  std::optional<Batch> next_batch(std::uint64_t epoch);

  // Stops and joins the current epoch's workers, if any.
  void abandon();

  const PipelineConfig& config() const;
  const AugmentChain& chain() const;  // optimized
  const OpPlacement& placement() const;
  std::size_t pool_count() const;
  std::uint64_t dataset_size() const;
  std::uint64_t batches_per_epoch() const;
  // Accumulated over every epoch run so far.
  PipelineStats stats() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

inline Pipeline build_pipeline(PipelineConfig config) { return Pipeline(std::move(config)); }

// Single-threaded computation of one epoch; same batches, same order as a
// preserve_order pipeline.
std::vector<Batch> reference_epoch(const PipelineConfig& config, std::uint64_t epoch);

}  // namespace loadforge

#endif  // LOADFORGE_PIPELINE_HPP_
