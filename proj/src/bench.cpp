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

#include "loadforge/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include "loadforge/error.hpp"

namespace loadforge {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

std::string fixed3(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

std::string fixed1(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.1f", v);
  return buf;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

std::optional<ReaderKind> parse_reader(const std::string& s) {
  if (s == "file") return ReaderKind::kFilePerSample;
  if (s == "container") return ReaderKind::kContainer;
  return std::nullopt;
}

std::optional<AllocationKind> parse_allocation(const std::string& s) {
  if (s == "host") return AllocationKind::kHostOnly;
  if (s == "shared") return AllocationKind::kShared;
  return std::nullopt;
}

}  // namespace

std::string_view reader_name(ReaderKind r) {
  return r == ReaderKind::kFilePerSample ? "file" : "container";
}

std::string_view allocation_name(AllocationKind a) {
  return a == AllocationKind::kHostOnly ? "host" : "shared";
}

std::string case_label(const BenchCase& c) {
  return std::string(reader_name(c.reader)) + "/" + std::string(allocation_name(c.allocation)) +
         "/" + std::string(preset_name(c.preset));
}

std::vector<BenchCase> full_grid(std::uint32_t repeats, std::uint32_t epochs) {
  std::vector<BenchCase> grid;
  for (auto reader : {ReaderKind::kFilePerSample, ReaderKind::kContainer}) {
    for (auto alloc : {AllocationKind::kHostOnly, AllocationKind::kShared}) {
      for (auto preset : {AugmentPreset::kFew, AugmentPreset::kExtensive}) {
        grid.push_back({reader, alloc, preset, repeats, epochs});
      }
    }
  }
  return grid;
}

BenchCase parse_case_spec(const std::string& spec, std::uint32_t repeats, std::uint32_t epochs) {
  const auto parts = split(spec, ':');
  if (parts.size() != 3) {
    fail(ErrorCode::kInvalidArgument,
         "case spec '" + spec + "' is not reader:allocation:preset");
  }
  const auto reader = parse_reader(parts[0]);
  const auto alloc = parse_allocation(parts[1]);
  const auto preset = parse_preset(parts[2]);
  if (!reader || !alloc || !preset) {
    fail(ErrorCode::kInvalidArgument,
         "case spec '" + spec + "': expected file|container : host|shared : few|extensive");
  }
  return {*reader, *alloc, *preset, repeats, epochs};
}

fs::path default_container_path(const fs::path& dataset) { return dataset / "dataset.brc"; }

double speedup(double t_base, double t_opt) {
  if (!(t_base > 0.0)) fail(ErrorCode::kInvalidArgument, "baseline time must be positive");
  return 100.0 * (t_base - t_opt) / t_base;
}

double load_fraction(const EpochRecord& record) {
  if (!(record.epoch_time_ms > 0.0)) fail(ErrorCode::kInvalidArgument, "epoch time must be positive");
  return 100.0 * record.load_time_ms / record.epoch_time_ms;
}

double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

BenchReport run_grid(const fs::path& dataset, const std::vector<BenchCase>& grid,
                     std::uint64_t seed, const BenchOptions& options) {
  for (const auto& c : grid) {
    if (c.repeats == 0 || c.epochs == 0) {
      fail(ErrorCode::kInvalidArgument, "bench cases need repeats >= 1 and epochs >= 1");
    }
  }
  const fs::path container = options.container_path.value_or(default_container_path(dataset));
  const bool need_container = std::any_of(grid.begin(), grid.end(), [](const BenchCase& c) {
    return c.reader == ReaderKind::kContainer;
  });
  if (need_container && !fs::exists(container)) {
    fail(ErrorCode::kMissingArtifact, "container " + container.string() +
                                          " not found; run: loadforge pack " + dataset.string() +
                                          " -o " + container.string());
  }

  BenchReport report;
  report.environment.cores = std::max(1u, std::thread::hardware_concurrency());
  report.environment.storage_path = fs::absolute(dataset).string();
  report.config = {
      {"seed", std::to_string(seed)},
      {"batch_size", std::to_string(options.batch_size)},
      {"host_workers", std::to_string(options.host_workers)},
      {"offload_workers", std::to_string(options.offload_workers)},
      {"queue_depth", std::to_string(options.queue_depth)},
      {"short_side", std::to_string(options.preset_params.short_side)},
      {"crop", std::to_string(options.preset_params.crop)},
      {"fuse_ops", options.fuse_ops ? "true" : "false"},
      {"cold", options.cold ? "true" : "false"},
      {"eta", fixed3(options.eta)},
  };
  report.cases = grid;

  std::shared_ptr<const DatasetSource> files;
  std::shared_ptr<const DatasetSource> packed;
  for (std::size_t id = 0; id < grid.size(); ++id) {
    const BenchCase& c = grid[id];
    try {
      std::shared_ptr<const DatasetSource> source;
      if (c.reader == ReaderKind::kFilePerSample) {
        if (!files) files = std::make_shared<DatasetSource>(scan_directory(dataset));
        source = files;
      } else {
        if (!packed) packed = std::make_shared<DatasetSource>(open_container_source(container));
        source = packed;
      }
      PipelineConfig cfg;
      cfg.source = source;
      cfg.batch_size = options.batch_size;
      cfg.preset_or_chain = c.preset;
      cfg.preset_params = options.preset_params;
      cfg.host_workers = options.host_workers;
      if (c.allocation == AllocationKind::kShared) {
        cfg.allocation = Shared{options.offload_workers};
      }
      cfg.queue_depth = options.queue_depth;
      cfg.preserve_order = false;
      cfg.global_seed = seed;
      cfg.fuse_ops = options.fuse_ops;
      Pipeline pipeline(std::move(cfg));

      TrainConfig tc;
      tc.eta = options.eta;
      tc.batch_size = options.batch_size;
      WeightVector w;
      std::uint64_t epoch_counter = 0;
      if (!options.cold) {
        w = train_epoch(pipeline, epoch_counter++, std::move(w), tc, options.train_hook).weights;
      }
      for (std::uint32_t r = 0; r < c.repeats; ++r) {
        for (std::uint32_t e = 0; e < c.epochs; ++e) {
          const auto t0 = Clock::now();
          EpochResult res =
              train_epoch(pipeline, epoch_counter++, std::move(w), tc, options.train_hook);
          const double wall_ms =
              std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
          w = std::move(res.weights);
          EpochRecord rec;
          rec.case_id = id;
          rec.bench_case = c;
          rec.repeat = r;
          rec.epoch = e;
          rec.batches = static_cast<std::uint32_t>(res.batches);
          rec.epoch_time_ms = wall_ms;
          rec.load_time_ms = static_cast<double>(res.wait_time_ns) / 1e6;
          rec.train_time_ms = static_cast<double>(res.train_time_ns) / 1e6;
          report.records.push_back(rec);
        }
      }
    } catch (const Error& e) {
      throw e.with_context("case " + std::to_string(id) + " (" + case_label(c) + ")");
    }
  }
  return report;
}

std::vector<CaseSummary> summarize(const BenchReport& report) {
  std::map<std::size_t, std::vector<const EpochRecord*>> by_case;
  for (const auto& r : report.records) by_case[r.case_id].push_back(&r);
  std::vector<CaseSummary> out;
  for (const auto& [id, recs] : by_case) {
    std::vector<double> epoch, load, train, frac;
    for (const auto* r : recs) {
      epoch.push_back(r->epoch_time_ms);
      load.push_back(r->load_time_ms);
      train.push_back(r->train_time_ms);
      frac.push_back(r->epoch_time_ms > 0 ? load_fraction(*r) : 0.0);
    }
    CaseSummary s;
    s.case_id = id;
    s.bench_case = recs.front()->bench_case;
    s.median_epoch_ms = median(epoch);
    s.median_load_ms = median(load);
    s.median_train_ms = median(train);
    s.median_load_fraction = median(frac);
    out.push_back(s);
  }
  return out;
}

std::string text_summary(const BenchReport& report) {
  std::ostringstream out;
  out << "environment: " << report.environment.cores << " cores, storage "
      << report.environment.storage_path << "\n";
  out << "config:";
  for (const auto& [k, v] : report.config) out << " " << k << "=" << v;
  out << "\n\n";
  const auto summaries = summarize(report);
  char line[256];
  std::snprintf(line, sizeof(line), "%-4s %-28s %12s %12s %12s %7s\n", "case", "pipeline",
                "epoch_ms", "load_ms", "train_ms", "load%");
  out << line;
  for (const auto& s : summaries) {
    std::snprintf(line, sizeof(line), "%-4zu %-28s %12.3f %12.3f %12.3f %6.1f%%\n", s.case_id,
                  case_label(s.bench_case).c_str(), s.median_epoch_ms, s.median_load_ms,
                  s.median_train_ms, s.median_load_fraction);
    out << line;
  }

  // Pairwise effects on median epoch time, for every pair differing in one axis.
  auto find = [&](ReaderKind r, AllocationKind a, AugmentPreset p) -> const CaseSummary* {
    for (const auto& s : summaries) {
      if (s.bench_case.reader == r && s.bench_case.allocation == a && s.bench_case.preset == p) {
        return &s;
      }
    }
    return nullptr;
  };
  std::ostringstream effects;
  for (auto p : {AugmentPreset::kFew, AugmentPreset::kExtensive}) {
    for (auto a : {AllocationKind::kHostOnly, AllocationKind::kShared}) {
      const auto* base = find(ReaderKind::kFilePerSample, a, p);
      const auto* opt = find(ReaderKind::kContainer, a, p);
      if (base && opt && base->median_epoch_ms > 0) {
        effects << "  container vs file   [" << allocation_name(a) << "/" << preset_name(p)
                << "]: " << fixed1(speedup(base->median_epoch_ms, opt->median_epoch_ms))
                << "%\n";
      }
    }
    for (auto r : {ReaderKind::kFilePerSample, ReaderKind::kContainer}) {
      const auto* base = find(r, AllocationKind::kHostOnly, p);
      const auto* opt = find(r, AllocationKind::kShared, p);
      if (base && opt && base->median_epoch_ms > 0) {
        effects << "  shared vs host-only [" << reader_name(r) << "/" << preset_name(p)
                << "]: " << fixed1(speedup(base->median_epoch_ms, opt->median_epoch_ms))
                << "%\n";
      }
    }
  }
  if (!effects.str().empty()) out << "\nspeedup, 100 x (base - opt) / base, on median epoch time:\n" << effects.str();
  return out.str();
}

std::string to_csv(const BenchReport& report) {
  if (report.records.empty()) fail(ErrorCode::kEmptyReport, "report has no epoch records");
  std::string out(kCsvHeader);
  out += '\n';
  for (const auto& r : report.records) {
    out += std::to_string(r.case_id);
    out += ',';
    out += reader_name(r.bench_case.reader);
    out += ',';
    out += allocation_name(r.bench_case.allocation);
    out += ',';
    out += preset_name(r.bench_case.preset);
    out += ',' + std::to_string(r.repeat) + ',' + std::to_string(r.epoch) + ',' +
           std::to_string(r.batches) + ',' + fixed3(r.epoch_time_ms) + ',' +
           fixed3(r.load_time_ms) + ',' + fixed3(r.train_time_ms) + '\n';
  }
  return out;
}

void emit_csv(const BenchReport& report, const fs::path& path) {
  const std::string text = to_csv(report);
  write_file(path, ByteView(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

BenchReport read_csv(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIoError, "cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) {
    fail(ErrorCode::kFormatError, path.string() + ": missing or unexpected CSV header");
  }
  BenchReport report;
  std::map<std::size_t, BenchCase> cases;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split(line, ',');
    auto bad = [&](const std::string& why) {
      fail(ErrorCode::kFormatError, path.string() + ":" + std::to_string(lineno) + ": " + why);
    };
    if (f.size() != 10) bad("expected 10 fields");
    const auto reader = parse_reader(f[1]);
    const auto alloc = parse_allocation(f[2]);
    const auto preset = parse_preset(f[3]);
    if (!reader || !alloc || !preset) bad("unknown reader/allocation/preset");
    EpochRecord r;
    try {
      r.case_id = std::stoul(f[0]);
      r.repeat = static_cast<std::uint32_t>(std::stoul(f[4]));
      r.epoch = static_cast<std::uint32_t>(std::stoul(f[5]));
      r.batches = static_cast<std::uint32_t>(std::stoul(f[6]));
      r.epoch_time_ms = std::stod(f[7]);
      r.load_time_ms = std::stod(f[8]);
      r.train_time_ms = std::stod(f[9]);
    } catch (const std::exception&) {
      bad("malformed number");
    }
    BenchCase& c = cases[r.case_id];
    c.reader = *reader;
    c.allocation = *alloc;
    c.preset = *preset;
    c.repeats = std::max(c.repeats, r.repeat + 1);
    c.epochs = std::max(c.epochs, r.epoch + 1);
    r.bench_case = {*reader, *alloc, *preset, 0, 0};
    report.records.push_back(r);
  }
  if (report.records.empty()) fail(ErrorCode::kEmptyReport, path.string() + " has no data rows");
  for (const auto& [id, c] : cases) report.cases.push_back(c);
  for (auto& r : report.records) r.bench_case = cases[r.case_id];
  return report;
}

}  // namespace loadforge
