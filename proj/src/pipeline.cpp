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

#include "loadforge/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstring>
#include <map>
#include <mutex>
#include <thread>

#include "loadforge/bounded_queue.hpp"
#include "loadforge/error.hpp"
#include "loadforge/rng.hpp"

namespace loadforge {

namespace {

using Clock = std::chrono::steady_clock;

std::uint64_t ns_since(Clock::time_point t0) {
  return static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - t0).count());
}

struct Segment {
  Pool pool;
  std::size_t begin;
  std::size_t end;
};

std::vector<Segment> make_segments(const OpPlacement& placement) {
  std::vector<Segment> out;
  for (std::size_t i = 0; i < placement.pools.size(); ++i) {
    if (out.empty() || out.back().pool != placement.pools[i]) {
      out.push_back({placement.pools[i], i, i + 1});
    } else {
      out.back().end = i + 1;
    }
  }
  return out;
}

struct WorkItem {
  std::uint64_t position = 0;
  std::uint64_t index = 0;
  SampleRng rng;
  std::optional<Sample> sample;
  std::size_t segment = 0;
  StageTiming timing;
};

void copy_pixels(const ImageTensor& img, float* dst) {
  if (img.dtype() == DType::kF32) {
    const auto px = img.f32();
    std::memcpy(dst, px.data(), px.size() * sizeof(float));
  } else {
    const auto px = img.u8();
    for (std::size_t i = 0; i < px.size(); ++i) dst[i] = static_cast<float>(px[i]);
  }
}

Error sample_failure(const Error& cause, std::string key) {
  if (key.empty() && cause.sample_key()) key = *cause.sample_key();
  Error e(ErrorCode::kPipelineError, "worker failed on sample '" + key + "': " + cause.what());
  e.with_sample_key(key);
  if (cause.record_index()) e.with_record_index(*cause.record_index());
  return e;
}

// Puts `img` into slot `slot` of `batch`, allocating on first use.
void place_sample(Batch& batch, std::size_t batch_len, std::size_t slot, const Sample& s,
                  std::uint64_t index) {
  const ImageTensor& img = s.image;
  if (batch.features.empty()) {
    batch.height = img.height();
    batch.width = img.width();
    batch.channels = img.channels();
    batch.features.resize(batch_len * img.element_count());
    batch.labels.resize(batch_len);
    batch.sample_indices.resize(batch_len);
  } else if (img.height() != batch.height || img.width() != batch.width ||
             img.channels() != batch.channels) {
    Error e(ErrorCode::kPipelineError,
            "sample '" + s.key + "' has shape " + std::to_string(img.height()) + "x" +
                std::to_string(img.width()) + "x" + std::to_string(img.channels()) +
                ", batch expects " + std::to_string(batch.height) + "x" +
                std::to_string(batch.width) + "x" + std::to_string(batch.channels));
    e.with_sample_key(s.key);
    throw e;
  }
  copy_pixels(img, batch.features.data() + slot * batch.sample_dim());
  batch.labels[slot] = s.label;
  batch.sample_indices[slot] = index;
}

}  // namespace

bool same_content(const Batch& a, const Batch& b) {
  return a.height == b.height && a.width == b.width && a.channels == b.channels &&
         a.epoch == b.epoch && a.batch_index == b.batch_index && a.labels == b.labels &&
         a.sample_indices == b.sample_indices && a.features.size() == b.features.size() &&
         std::memcmp(a.features.data(), b.features.data(),
                     a.features.size() * sizeof(float)) == 0;
}

AugmentChain optimize_chain(const AugmentChain& chain, bool fuse) {
  if (!fuse) return chain;
  AugmentChain out;
  for (std::size_t i = 0; i < chain.ops.size(); ++i) {
    const auto* crop = std::get_if<RandomCrop>(&chain.ops[i]);
    const auto* norm =
        i + 1 < chain.ops.size() ? std::get_if<Normalize>(&chain.ops[i + 1]) : nullptr;
    if (crop != nullptr && norm != nullptr) {
      out.ops.push_back(FusedCropNormalize{crop->out_h, crop->out_w, norm->mean, norm->std});
      ++i;
    } else {
      out.ops.push_back(chain.ops[i]);
    }
  }
  return out;
}

OpPlacement assign_ops(const AugmentChain& chain, const Allocation& allocation) {
  OpPlacement out;
  out.pools.assign(chain.ops.size(), Pool::kHost);
  if (std::holds_alternative<HostOnly>(allocation)) return out;
  for (std::size_t i = 0; i < chain.ops.size(); ++i) {
    const auto& op = chain.ops[i];
    const bool photometric = std::holds_alternative<ColorJitter>(op) ||
                             std::holds_alternative<Normalize>(op) ||
                             std::holds_alternative<FusedCropNormalize>(op);
    out.pools[i] = photometric ? Pool::kOffload : Pool::kHost;
  }
  if (!out.pools.empty() &&
      std::all_of(out.pools.begin(), out.pools.end(), [](Pool p) { return p == Pool::kHost; })) {
    out.pools.back() = Pool::kOffload;
  }
  return out;
}

AugmentChain resolve_chain(const PipelineConfig& config) {
  AugmentChain chain;
  if (const auto* preset = std::get_if<AugmentPreset>(&config.preset_or_chain)) {
    chain = make_preset(*preset, config.preset_params);
  } else {
    chain = std::get<AugmentChain>(config.preset_or_chain);
  }
  chain.validate();
  return optimize_chain(chain, config.fuse_ops);
}

// ---------------------------------------------------------------------------

struct Pipeline::Impl {
  PipelineConfig config;
  AugmentChain chain;
  OpPlacement placement;
  std::vector<Segment> segments;
  std::uint32_t offload_workers = 0;
  std::uint64_t n = 0;
  std::uint64_t positions = 0;
  std::uint64_t batches = 0;

  class EpochRun;
  std::unique_ptr<EpochRun> run;
  std::optional<std::uint64_t> finished_epoch;
  PipelineStats stats;

  std::uint64_t batch_len(std::uint64_t k) const {
    return std::min<std::uint64_t>(config.batch_size, positions - k * config.batch_size);
  }
  void stop_run();
};

class Pipeline::Impl::EpochRun {
 public:
  EpochRun(const Impl& impl, std::uint64_t epoch)
      : impl_(impl),
        epoch_(epoch),
        order_(permutation(impl.config.global_seed, epoch, impl.n)),
        capacity_(std::size_t{impl.config.queue_depth} * impl.config.batch_size),
        permits_(capacity_),
        host_in_(capacity_),
        offload_in_(capacity_),
        collate_in_(capacity_),
        out_(impl.config.queue_depth) {
    try {
      threads_.emplace_back([this] { reader(); });
      for (std::uint32_t i = 0; i < impl.config.host_workers; ++i) {
        threads_.emplace_back([this] { worker(Pool::kHost); });
      }
      for (std::uint32_t i = 0; i < impl.offload_workers; ++i) {
        threads_.emplace_back([this] { worker(Pool::kOffload); });
      }
      threads_.emplace_back([this] { collator(); });
    } catch (...) {
      stop();
      throw;
    }
  }

  ~EpochRun() { stop(); }

  std::uint64_t epoch() const { return epoch_; }

  std::optional<Batch> pop() { return out_.pop(); }

  std::optional<Error> error() {
    std::lock_guard lock(error_mu_);
    return error_;
  }

  void stop() {
    cancel_all();
    join();
  }

  void join() {
    for (auto& t : threads_) {
      if (t.joinable()) t.join();
    }
  }

  PipelineStats stats() const {
    return {permits_.high_water(), out_.high_water(), capacity_, out_.capacity()};
  }

 private:
  void cancel_all() {
    permits_.cancel();
    host_in_.cancel();
    offload_in_.cancel();
    collate_in_.cancel();
    out_.cancel();
  }

  void poison(Error e) {
    {
      std::lock_guard lock(error_mu_);
      if (!error_) error_ = std::move(e);
    }
    cancel_all();
  }

  void reader() {
    const auto& cfg = impl_.config;
    for (std::uint64_t pos = 0; pos < impl_.positions; ++pos) {
      if (!permits_.acquire()) return;
      WorkItem item;
      item.position = pos;
      item.index = order_[pos];
      item.rng = SampleRng(sample_seed(cfg.global_seed, epoch_, item.index));
      if (!host_in_.push(std::move(item))) return;
    }
  }

  bool route(WorkItem item) {
    if (item.segment == impl_.segments.size()) return collate_in_.push(std::move(item));
    auto& next = impl_.segments[item.segment].pool == Pool::kHost ? host_in_ : offload_in_;
    return next.push(std::move(item));
  }

  void worker(Pool pool) {
    const auto& cfg = impl_.config;
    while (auto item = (pool == Pool::kHost ? host_in_ : offload_in_).pop()) {
      std::string key;
      try {
        if (!item->sample) {
          const auto t0 = Clock::now();
          item->sample = cfg.source->fetch(item->index);
          if (cfg.fetch_hook) cfg.fetch_hook(item->index);
          item->timing.decode_ns += ns_since(t0);
        }
        key = item->sample->key;
        while (item->segment < impl_.segments.size() &&
               impl_.segments[item->segment].pool == pool) {
          const Segment& seg = impl_.segments[item->segment];
          const auto t0 = Clock::now();
          const auto ops = std::span<const AugmentOp>(impl_.chain.ops)
                               .subspan(seg.begin, seg.end - seg.begin);
          item->sample->image = apply_ops(std::move(item->sample->image), ops, item->rng,
                                          seg.begin);
          (pool == Pool::kHost ? item->timing.augment_host_ns
                               : item->timing.augment_offload_ns) += ns_since(t0);
          ++item->segment;
        }
      } catch (const Error& e) {
        fail_sample(e, key);
        return;
      } catch (const std::exception& e) {
        fail_sample(Error(ErrorCode::kPipelineError, e.what()), key);
        return;
      }
      if (!route(std::move(*item))) return;
    }
  }

  void fail_sample(const Error& cause, std::string key) {
    poison(sample_failure(cause, std::move(key)));
  }

  struct Pending {
    Batch batch;
    std::uint64_t filled = 0;
  };

  void collator() {
    const std::uint64_t b = impl_.config.batch_size;
    std::map<std::uint64_t, Pending> pending;
    std::uint64_t next_emit = 0;
    std::uint64_t emitted = 0;
    while (emitted < impl_.batches) {
      auto item = collate_in_.pop();
      if (!item) return;
      const auto t0 = Clock::now();
      const std::uint64_t k = item->position / b;
      const std::uint64_t len = impl_.batch_len(k);
      Pending& p = pending[k];
      try {
        place_sample(p.batch, len, item->position % b, *item->sample, item->index);
      } catch (const Error& e) {
        poison(e);
        return;
      }
      StageTiming& t = p.batch.timing;
      t.decode_ns += item->timing.decode_ns;
      t.augment_host_ns += item->timing.augment_host_ns;
      t.augment_offload_ns += item->timing.augment_offload_ns;
      t.collate_ns += ns_since(t0);
      if (++p.filled < len) continue;

      if (!impl_.config.preserve_order) {
        if (!emit(pending, k)) return;
        ++emitted;
        continue;
      }
      while (emitted < impl_.batches) {
        auto it = pending.find(next_emit);
        if (it == pending.end() || it->second.filled < impl_.batch_len(next_emit)) break;
        if (!emit(pending, next_emit)) return;
        ++next_emit;
        ++emitted;
      }
    }
    // Every batch is out; let idle workers exit.
    host_in_.close();
    offload_in_.close();
    collate_in_.close();
    out_.close();
  }

  bool emit(std::map<std::uint64_t, Pending>& pending, std::uint64_t k) {
    auto node = pending.extract(k);
    Batch& batch = node.mapped().batch;
    batch.epoch = epoch_;
    batch.batch_index = k;
    const std::size_t len = batch.size();
    if (!out_.push(std::move(batch))) return false;
    permits_.release(len);
    return true;
  }

  const Impl& impl_;
  const std::uint64_t epoch_;
  const std::vector<std::uint64_t> order_;
  const std::size_t capacity_;
  PermitPool permits_;
  BoundedQueue<WorkItem> host_in_;
  BoundedQueue<WorkItem> offload_in_;
  BoundedQueue<WorkItem> collate_in_;
  BoundedQueue<Batch> out_;
  std::mutex error_mu_;
  std::optional<Error> error_;
  std::vector<std::thread> threads_;
};

void Pipeline::Impl::stop_run() {
  if (!run) return;
  run->stop();
  const PipelineStats s = run->stats();
  stats.max_in_flight_samples = std::max(stats.max_in_flight_samples, s.max_in_flight_samples);
  stats.max_queued_batches = std::max(stats.max_queued_batches, s.max_queued_batches);
  run.reset();
}

Pipeline::Pipeline(PipelineConfig config) : impl_(std::make_unique<Impl>()) {
  auto invalid = [](const std::string& m) { fail(ErrorCode::kInvalidArgument, m); };
  if (!config.source) invalid("pipeline needs a dataset source");
  if (config.batch_size == 0) invalid("batch_size must be >= 1");
  if (config.host_workers == 0) invalid("host_workers must be >= 1");
  if (config.queue_depth == 0) invalid("queue_depth must be >= 1");
  std::uint32_t offload = 0;
  if (const auto* shared = std::get_if<Shared>(&config.allocation)) {
    if (shared->offload_workers == 0) invalid("Shared allocation needs offload_workers >= 1");
    offload = shared->offload_workers;
  }
  const std::uint64_t n = config.source->size();
  if (n == 0) fail(ErrorCode::kEmptyDataset, "dataset is empty");
  if (config.drop_last && n < config.batch_size) {
    invalid("batch_size " + std::to_string(config.batch_size) + " exceeds dataset size " +
            std::to_string(n) + " with drop_last");
  }

  Impl& d = *impl_;
  d.chain = resolve_chain(config);
  if (config.placement_override) {
    d.placement = *config.placement_override;
    if (d.placement.pools.size() != d.chain.ops.size()) {
      invalid("placement override covers " + std::to_string(d.placement.pools.size()) +
              " ops, chain has " + std::to_string(d.chain.ops.size()));
    }
    if (offload == 0 && std::any_of(d.placement.pools.begin(), d.placement.pools.end(),
                                    [](Pool p) { return p == Pool::kOffload; })) {
      invalid("HostOnly allocation cannot place ops on the offload pool");
    }
  } else {
    d.placement = assign_ops(d.chain, config.allocation);
  }
  d.segments = make_segments(d.placement);
  d.offload_workers = offload;
  d.n = n;
  d.positions = config.drop_last ? (n / config.batch_size) * config.batch_size : n;
  d.batches = (d.positions + config.batch_size - 1) / config.batch_size;
  d.stats.sample_capacity = std::size_t{config.queue_depth} * config.batch_size;
  d.stats.batch_capacity = config.queue_depth;
  d.config = std::move(config);
}

Pipeline::~Pipeline() {
  if (impl_) impl_->stop_run();
}

Pipeline::Pipeline(Pipeline&&) noexcept = default;
Pipeline& Pipeline::operator=(Pipeline&& other) noexcept {
  if (this != &other) {
    if (impl_) impl_->stop_run();
    impl_ = std::move(other.impl_);
  }
  return *this;
}

std::optional<Batch> Pipeline::next_batch(std::uint64_t epoch) {
  Impl& d = *impl_;
  const auto t0 = Clock::now();
  if (d.run && d.run->epoch() != epoch) d.stop_run();
  if (!d.run) {
    if (d.finished_epoch == epoch) return std::nullopt;
    d.finished_epoch.reset();
    d.run = std::make_unique<Impl::EpochRun>(d, epoch);
  }
  std::optional<Batch> batch = d.run->pop();
  const std::uint64_t waited = ns_since(t0);
  if (batch) {
    batch->timing.wait_ns = waited;
    return batch;
  }
  std::optional<Error> err = d.run->error();
  d.stop_run();
  if (err) throw *err;
  d.finished_epoch = epoch;
  return std::nullopt;
}

void Pipeline::abandon() { impl_->stop_run(); }

const PipelineConfig& Pipeline::config() const { return impl_->config; }
const AugmentChain& Pipeline::chain() const { return impl_->chain; }
const OpPlacement& Pipeline::placement() const { return impl_->placement; }
std::size_t Pipeline::pool_count() const { return impl_->offload_workers > 0 ? 2 : 1; }
std::uint64_t Pipeline::dataset_size() const { return impl_->n; }
std::uint64_t Pipeline::batches_per_epoch() const { return impl_->batches; }

PipelineStats Pipeline::stats() const {
  PipelineStats s = impl_->stats;
  if (impl_->run) {
    const PipelineStats r = impl_->run->stats();
    s.max_in_flight_samples = std::max(s.max_in_flight_samples, r.max_in_flight_samples);
    s.max_queued_batches = std::max(s.max_queued_batches, r.max_queued_batches);
  }
  return s;
}

std::vector<Batch> reference_epoch(const PipelineConfig& config, std::uint64_t epoch) {
  // Reuse the constructor's validation.
  PipelineConfig probe = config;
  probe.fetch_hook = nullptr;
  const Pipeline shape(std::move(probe));
  const AugmentChain& chain = shape.chain();
  const std::uint64_t b = config.batch_size;
  const std::uint64_t n = shape.dataset_size();
  const std::uint64_t positions = config.drop_last ? (n / b) * b : n;
  const auto order = permutation(config.global_seed, epoch, n);

  std::vector<Batch> out;
  out.reserve(shape.batches_per_epoch());
  for (std::uint64_t start = 0; start < positions; start += b) {
    const std::uint64_t len = std::min(b, positions - start);
    Batch batch;
    batch.epoch = epoch;
    batch.batch_index = start / b;
    for (std::uint64_t slot = 0; slot < len; ++slot) {
      const std::uint64_t index = order[start + slot];
      Sample s;
      try {
        s = config.source->fetch(index);
        if (config.fetch_hook) config.fetch_hook(index);
        SampleRng rng(sample_seed(config.global_seed, epoch, index));
        s.image = apply_ops(std::move(s.image), chain.ops, rng);
      } catch (const Error& e) {
        throw sample_failure(e, s.key);
      } catch (const std::exception& e) {
        throw sample_failure(Error(ErrorCode::kPipelineError, e.what()), s.key);
      }
      place_sample(batch, len, slot, s, index);
    }
    out.push_back(std::move(batch));
  }
  return out;
}

}  // namespace loadforge
