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

// Benchmark grid: reader (file-per-sample | container) x allocation
// (host-only | shared) x preset (few | extensive). Each case runs the full
// pipeline plus the logistic-regression consumer and records, per epoch, the
// wall time, the time the trainer spent blocked on the pipeline ("load") and
// the trainer's compute time ("train").

#ifndef LOADFORGE_BENCH_HPP_
#define LOADFORGE_BENCH_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "loadforge/augment.hpp"
#include "loadforge/pipeline.hpp"
#include "loadforge/sample_store.hpp"
#include "loadforge/trainer.hpp"

namespace loadforge {

enum class AllocationKind { kHostOnly, kShared };

struct BenchCase {
  ReaderKind reader = ReaderKind::kFilePerSample;
  AllocationKind allocation = AllocationKind::kHostOnly;
  AugmentPreset preset = AugmentPreset::kFew;
  std::uint32_t repeats = 1;
  std::uint32_t epochs = 1;
  friend bool operator==(const BenchCase&, const BenchCase&) = default;
};

std::string_view reader_name(ReaderKind r);      // "file" | "container"
std::string_view allocation_name(AllocationKind a);  // "host" | "shared"
std::string case_label(const BenchCase& c);      // "container/shared/extensive"

// All eight cases: reader-major, then allocation, then preset.
std::vector<BenchCase> full_grid(std::uint32_t repeats, std::uint32_t epochs);
// "reader:allocation:preset", e.g. "container:shared:few". Throws InvalidArgument.
BenchCase parse_case_spec(const std::string& spec, std::uint32_t repeats, std::uint32_t epochs);

struct BenchOptions {
  std::uint32_t batch_size = 32;
  std::uint32_t host_workers = 1;
  std::uint32_t offload_workers = 1;
  std::uint32_t queue_depth = 2;
  PresetParams preset_params;
  bool fuse_ops = true;
  bool cold = false;  // keep the first epoch instead of discarding it as warm-up
  double eta = 0.01;
  std::optional<std::filesystem::path> container_path;
  TrainHook train_hook;
};

struct EpochRecord {
  std::size_t case_id = 0;
  BenchCase bench_case;
  std::uint32_t repeat = 0;
  std::uint32_t epoch = 0;
  std::uint32_t batches = 0;
  double epoch_time_ms = 0.0;
  double load_time_ms = 0.0;
  double train_time_ms = 0.0;
};

struct EnvironmentSummary {
  unsigned cores = 0;
  std::string storage_path;
};

struct BenchReport {
  EnvironmentSummary environment;
  std::vector<std::pair<std::string, std::string>> config;
  std::vector<BenchCase> cases;
  std::vector<EpochRecord> records;
};

// <dataset>/dataset.brc unless overridden.
std::filesystem::path default_container_path(const std::filesystem::path& dataset);

BenchReport run_grid(const std::filesystem::path& dataset, const std::vector<BenchCase>& grid,
                     std::uint64_t seed, const BenchOptions& options = {});

// 100 * (base - optimized) / base.
double speedup(double t_base, double t_opt);
// 100 * load_time / epoch_time.
double load_fraction(const EpochRecord& record);

double median(std::vector<double> values);

struct CaseSummary {
  std::size_t case_id = 0;
  BenchCase bench_case;
  double median_epoch_ms = 0.0;
  double median_load_ms = 0.0;
  double median_train_ms = 0.0;
  double median_load_fraction = 0.0;
};

std::vector<CaseSummary> summarize(const BenchReport& report);
std::string text_summary(const BenchReport& report);

inline constexpr std::string_view kCsvHeader =
    "case,reader,allocation,preset,repeat,epoch,batches,epoch_time_ms,load_time_ms,train_time_ms";

std::string to_csv(const BenchReport& report);
void emit_csv(const BenchReport& report, const std::filesystem::path& path);
BenchReport read_csv(const std::filesystem::path& path);

// Four SVG figures: per-case epoch-time lines, log-scale load-time bars,
// load-vs-train stacked bars, few-vs-extensive grouped bars.
std::vector<std::filesystem::path> emit_plots(const BenchReport& report,
                                              const std::filesystem::path& out_dir);

}  // namespace loadforge

#endif  // LOADFORGE_BENCH_HPP_
