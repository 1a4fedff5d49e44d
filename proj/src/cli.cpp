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

#include "loadforge/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <thread>

#include "loadforge/bench.hpp"
#include "loadforge/error.hpp"
#include "loadforge/image.hpp"
#include "loadforge/pipeline.hpp"
#include "loadforge/record_format.hpp"
#include "loadforge/rng.hpp"
#include "loadforge/sample_store.hpp"
#include "loadforge/trainer.hpp"

namespace loadforge {

namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  fail(ErrorCode::kInvalidArgument, "config key '" + key + "' expects true or false, got '" + v + "'");
}

// Pulls `--config FILE` / `--config=FILE` out of args and returns the path.
std::optional<fs::path> take_config_arg(std::vector<std::string>& args) {
  std::optional<fs::path> path;
  for (std::size_t i = 0; i < args.size();) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) fail(ErrorCode::kInvalidArgument, "--config needs a file");
      path = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i),
                 args.begin() + static_cast<std::ptrdiff_t>(i + 2));
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
    } else {
      ++i;
    }
  }
  return path;
}

// Config entries become flags placed before the user's own arguments; with
// take-last semantics the command line wins.
std::vector<std::string> config_to_args(const CLI::App& sub,
                                        const std::vector<std::pair<std::string, std::string>>& kv) {
  std::vector<std::string> out;
  for (const auto& [key, value] : kv) {
    const CLI::Option* opt = sub.get_option_no_throw("--" + key);
    if (opt == nullptr || opt->get_positional()) {
      fail(ErrorCode::kInvalidArgument,
           "unknown config key '" + key + "' for '" + sub.get_name() + "'");
    }
    if (opt->get_expected_min() == 0) {
      if (parse_bool(key, value)) out.push_back("--" + key);
    } else {
      out.push_back("--" + key);
      out.push_back(value);
    }
  }
  return out;
}

int exit_code_for(const Error& e) {
  if (e.code() == ErrorCode::kInvalidArgument) return kExitUsage;
  return e.is_data_error() ? kExitData : kExitInternal;
}

std::shared_ptr<const DatasetSource> open_dataset(const fs::path& path) {
  if (fs::is_directory(path)) return std::make_shared<DatasetSource>(scan_directory(path));
  return std::make_shared<DatasetSource>(open_container_source(path));
}

struct PackArgs {
  std::string dir;
  std::string output;
  std::uint64_t chunk_bytes = kDefaultChunkTargetBytes;
  bool store_encoded = false;
};

struct BenchArgs {
  std::string dataset;
  std::string grid = "all";
  std::uint32_t epochs = 3;
  std::uint32_t repeats = 1;
  std::uint64_t seed = 0;
  std::uint32_t workers = 1;
  std::uint32_t offload_workers = 1;
  std::uint32_t queue_depth = 2;
  std::string preset = "both";
  bool no_fuse = false;
  bool cold = false;
  std::string csv;
  std::string plots;
  std::string container;
  std::uint32_t batch_size = 32;
  std::uint32_t short_side = 256;
  std::uint32_t crop = 224;
  double eta = 0.01;
};

struct TrainArgs {
  std::string dataset;
  double eta = 0.01;
  std::uint32_t batch_size = 32;
  std::uint32_t epochs = 1;
  std::uint64_t seed = 0;
  std::uint32_t workers = 1;
  std::string preset = "few";
  std::uint32_t short_side = 256;
  std::uint32_t crop = 224;
};

struct SynthArgs {
  std::string dir;
  std::uint32_t classes = 2;
  std::uint32_t per_class = 100;
  std::uint32_t height = 32;
  std::uint32_t width = 32;
  std::uint64_t seed = 0;
};

AugmentPreset preset_or_throw(const std::string& name) {
  const auto p = parse_preset(name);
  if (!p) fail(ErrorCode::kInvalidArgument, "unknown preset '" + name + "' (few|extensive)");
  return *p;
}

int run_pack(const PackArgs& a, std::ostream& out) {
  PackOptions opts;
  opts.chunk_target_bytes = a.chunk_bytes;
  opts.store_encoded = a.store_encoded;
  const ContainerSummary s = pack_directory(a.dir, a.output, opts);
  out << "packed " << s.record_count << " records in " << s.chunk_count << " chunks, "
      << s.total_bytes << " bytes -> " << a.output << "\n";
  return kExitOk;
}

int run_inspect(const std::string& path, std::ostream& out) {
  const ContainerReader r = open_container(fs::path(path));
  const auto& h = r.header();
  const auto& f = r.footer();
  out << "file:          " << path << " (" << r.file_size() << " bytes)\n"
      << "version:       " << h.format_version << "\n"
      << "chunk target:  " << h.chunk_target_bytes << " bytes\n"
      << "records:       " << f.record_count << "\n"
      << "chunks:        " << f.chunk_count << "\n"
      << "index offset:  " << f.index_offset << "\n";
  char crc[16];
  std::snprintf(crc, sizeof(crc), "0x%08X", f.index_crc);
  out << "index crc:     " << crc << "\n\n";
  out << "chunk  first_record  records  offset  bytes\n";
  const auto& idx = r.index();
  for (std::size_t c = 0; c < idx.chunks.size(); ++c) {
    const ChunkEntry& ch = idx.chunks[c];
    std::uint64_t begin = 0;
    std::uint64_t bytes = 0;
    if (ch.record_count > 0) {
      begin = idx.records[ch.first_record].offset;
      const RecordEntry& last = idx.records[ch.first_record + ch.record_count - 1];
      bytes = last.offset + last.frame_len - begin;
    }
    out << c << "  " << ch.first_record << "  " << ch.record_count << "  " << begin << "  "
        << bytes << "\n";
  }
  return kExitOk;
}

int run_verify(const std::string& path, std::ostream& out, std::ostream& err) {
  const ContainerReader r = open_container(fs::path(path));
  const VerificationReport rep = verify_container(r);
  if (rep.ok) {
    out << "ok: " << r.record_count() << " records verified\n";
    return kExitOk;
  }
  err << "corrupt records (" << rep.corrupt_records.size() << "):";
  for (auto i : rep.corrupt_records) err << " " << i;
  err << "\n";
  out << "corrupt:";
  for (auto i : rep.corrupt_records) out << " " << i;
  out << "\n";
  return kExitData;
}

int run_bench(const BenchArgs& a, std::ostream& out) {
  std::vector<BenchCase> grid;
  if (a.grid == "all") {
    grid = full_grid(a.repeats, a.epochs);
  } else {
    std::stringstream ss(a.grid);
    std::string spec;
    while (std::getline(ss, spec, ',')) {
      if (!trim(spec).empty()) grid.push_back(parse_case_spec(trim(spec), a.repeats, a.epochs));
    }
    if (grid.empty()) fail(ErrorCode::kInvalidArgument, "--grid lists no cases");
  }
  if (a.preset != "both") {
    const AugmentPreset p = preset_or_throw(a.preset);
    std::erase_if(grid, [p](const BenchCase& c) { return c.preset != p; });
    if (grid.empty()) fail(ErrorCode::kInvalidArgument, "--preset filters out every case");
  }
  BenchOptions opts;
  opts.batch_size = a.batch_size;
  opts.host_workers = a.workers;
  opts.offload_workers = a.offload_workers;
  opts.queue_depth = a.queue_depth;
  opts.preset_params.short_side = a.short_side;
  opts.preset_params.crop = a.crop;
  opts.fuse_ops = !a.no_fuse;
  opts.cold = a.cold;
  opts.eta = a.eta;
  if (!a.container.empty()) opts.container_path = fs::path(a.container);
  if (a.cold) {
    out << "note: --cold keeps the first epoch; drop the OS page cache beforehand for a truly "
           "cold run (e.g. sync; echo 3 > /proc/sys/vm/drop_caches)\n";
  }
  const BenchReport report = run_grid(a.dataset, grid, a.seed, opts);
  out << text_summary(report);
  if (!a.csv.empty()) {
    emit_csv(report, a.csv);
    out << "csv: " << a.csv << "\n";
  }
  if (!a.plots.empty()) {
    for (const auto& p : emit_plots(report, a.plots)) out << "plot: " << p.string() << "\n";
  }
  return kExitOk;
}

int run_train(const TrainArgs& a, std::ostream& out) {
  PipelineConfig cfg;
  cfg.source = open_dataset(a.dataset);
  cfg.batch_size = a.batch_size;
  cfg.preset_or_chain = preset_or_throw(a.preset);
  cfg.preset_params.short_side = a.short_side;
  cfg.preset_params.crop = a.crop;
  cfg.host_workers = a.workers;
  cfg.global_seed = a.seed;
  Pipeline pipeline(std::move(cfg));
  TrainConfig tc;
  tc.eta = a.eta;
  tc.batch_size = a.batch_size;
  tc.epochs = a.epochs;
  const TrainRun run = train(pipeline, {}, tc);
  for (std::size_t e = 0; e < run.epochs.size(); ++e) {
    const EpochResult& r = run.epochs[e];
    char line[256];
    std::snprintf(line, sizeof(line),
                  "epoch %zu: loss %.6f  grad_norm %.6g  samples %llu  train %.3f ms  wait %.3f ms\n",
                  e, r.stats.loss, r.stats.grad_norm,
                  static_cast<unsigned long long>(r.stats.samples_seen),
                  static_cast<double>(r.train_time_ns) / 1e6,
                  static_cast<double>(r.wait_time_ns) / 1e6);
    out << line;
  }
  return kExitOk;
}

int run_plot(const std::string& csv, const std::string& dir, std::ostream& out) {
  const BenchReport report = read_csv(csv);
  for (const auto& p : emit_plots(report, dir)) out << "plot: " << p.string() << "\n";
  return kExitOk;
}

}  // namespace

std::vector<std::pair<std::string, std::string>> parse_config_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIoError, "cannot read config file " + path.string());
  std::vector<std::pair<std::string, std::string>> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      fail(ErrorCode::kInvalidArgument,
           path.string() + ":" + std::to_string(lineno) + ": expected key = value");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      fail(ErrorCode::kInvalidArgument, path.string() + ":" + std::to_string(lineno) + ": empty key");
    }
    std::replace(key.begin(), key.end(), '_', '-');
    kv.emplace_back(std::move(key), std::move(value));
  }
  return kv;
}

std::uint32_t worker_cap() {
  std::uint32_t cap = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("LOADFORGE_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) cap = std::min<std::uint32_t>(cap, static_cast<std::uint32_t>(v));
  }
  return cap;
}

void synth_dataset(const fs::path& out_dir, std::uint32_t classes, std::uint32_t per_class,
                   std::uint32_t height, std::uint32_t width, std::uint64_t seed) {
  if (classes == 0 || per_class == 0 || height == 0 || width == 0) {
    fail(ErrorCode::kInvalidArgument, "synth counts and sizes must be >= 1");
  }
  const std::size_t n = std::size_t{height} * width * 3;
  for (std::uint32_t c = 0; c < classes; ++c) {
    char cls[32];
    std::snprintf(cls, sizeof(cls), "class_%03u", c);
    const fs::path dir = out_dir / cls;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) fail(ErrorCode::kIoError, "cannot create " + dir.string() + ": " + ec.message());
    for (std::uint32_t i = 0; i < per_class; ++i) {
      SampleRng rng(sample_seed(seed, c, i));
      std::vector<std::uint8_t> px(n);
      for (std::size_t k = 0; k < n; k += 8) {
        std::uint64_t v = rng.next_u64();
        for (std::size_t b = 0; b < 8 && k + b < n; ++b, v >>= 8) px[k + b] = static_cast<std::uint8_t>(v);
      }
      char name[32];
      std::snprintf(name, sizeof(name), "img_%05u.ppm", i);
      write_file(dir / name, encode_ppm(ImageTensor(height, width, 3, std::move(px))));
    }
  }
}

int dispatch(const std::vector<std::string>& argv_in, std::ostream& out, std::ostream& err) {
  const std::uint32_t cap = worker_cap();

  CLI::App app{"LoadForge: image data loading, packing and benchmarking", "loadforge"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  PackArgs pack;
  auto* pack_cmd = app.add_subcommand("pack", "Pack a class-per-folder dataset into a container");
  pack_cmd->add_option("dir", pack.dir, "Dataset directory")->required();
  pack_cmd->add_option("-o,--output", pack.output, "Container file to write")->required();
  pack_cmd->add_option("--chunk-bytes", pack.chunk_bytes, "Chunk target size in bytes (>= 4096)")
      ->capture_default_str();
  pack_cmd->add_flag("--store-encoded", pack.store_encoded,
                     "Store PPM bytes instead of decoded tensors");

  std::string inspect_path;
  auto* inspect_cmd = app.add_subcommand("inspect", "Print container header, footer and chunks");
  inspect_cmd->add_option("container", inspect_path, "Container file")->required();

  std::string verify_path;
  auto* verify_cmd = app.add_subcommand("verify", "Check every record CRC; exit 2 if any fail");
  verify_cmd->add_option("container", verify_path, "Container file")->required();

  BenchArgs bench;
  bench.workers = std::min<std::uint32_t>(4, cap);
  auto* bench_cmd = app.add_subcommand("bench", "Run the reader x allocation x preset grid");
  bench_cmd->add_option("dataset", bench.dataset, "Dataset directory")->required();
  bench_cmd->add_option("--grid", bench.grid,
                        "'all' or comma-separated reader:allocation:preset specs")
      ->capture_default_str();
  bench_cmd->add_option("--epochs", bench.epochs, "Measured epochs per repeat")
      ->capture_default_str();
  bench_cmd->add_option("--repeats", bench.repeats, "Repeats per case")->capture_default_str();
  bench_cmd->add_option("--seed", bench.seed, "Global seed")->capture_default_str();
  bench_cmd->add_option("--workers", bench.workers, "Host pool workers")->capture_default_str();
  bench_cmd->add_option("--offload-workers", bench.offload_workers,
                        "Offload pool workers for shared cases")
      ->capture_default_str();
  bench_cmd->add_option("--queue-depth", bench.queue_depth, "Prefetched batches")
      ->capture_default_str();
  bench_cmd->add_option("--preset", bench.preset, "few, extensive or both")
      ->capture_default_str();
  bench_cmd->add_flag("--no-fuse", bench.no_fuse, "Disable crop+normalize fusion");
  bench_cmd->add_flag("--cold", bench.cold, "Keep the first epoch in the measurements");
  bench_cmd->add_option("--csv", bench.csv, "Write per-epoch CSV here");
  bench_cmd->add_option("--plots", bench.plots, "Write SVG figures into this directory");
  bench_cmd->add_option("--container", bench.container,
                        "Container file (default <dataset>/dataset.brc)");
  bench_cmd->add_option("--batch-size", bench.batch_size, "Mini-batch size")
      ->capture_default_str();
  bench_cmd->add_option("--short-side", bench.short_side, "Resize target for the short side")
      ->capture_default_str();
  bench_cmd->add_option("--crop", bench.crop, "Square crop size")->capture_default_str();
  bench_cmd->add_option("--eta", bench.eta, "SGD learning rate")->capture_default_str();

  TrainArgs tr;
  tr.workers = std::min<std::uint32_t>(4, cap);
  auto* train_cmd = app.add_subcommand("train", "Train logistic regression on a dataset");
  train_cmd->add_option("dataset", tr.dataset, "Dataset directory or container file")
      ->required();
  train_cmd->add_option("--eta", tr.eta, "SGD learning rate")->capture_default_str();
  train_cmd->add_option("--batch-size", tr.batch_size, "Mini-batch size")->capture_default_str();
  train_cmd->add_option("--epochs", tr.epochs, "Epochs")->capture_default_str();
  train_cmd->add_option("--seed", tr.seed, "Global seed")->capture_default_str();
  train_cmd->add_option("--workers", tr.workers, "Host pool workers")->capture_default_str();
  train_cmd->add_option("--preset", tr.preset, "few or extensive")->capture_default_str();
  train_cmd->add_option("--short-side", tr.short_side, "Resize target for the short side")
      ->capture_default_str();
  train_cmd->add_option("--crop", tr.crop, "Square crop size")->capture_default_str();

  std::string plot_csv;
  std::string plot_dir;
  auto* plot_cmd = app.add_subcommand("plot", "Render SVG figures from a bench CSV");
  plot_cmd->add_option("csv", plot_csv, "CSV written by bench --csv")->required();
  plot_cmd->add_option("-o,--output", plot_dir, "Output directory")->required();

  SynthArgs syn;
  auto* synth_cmd = app.add_subcommand("synth", "Write a seeded synthetic PPM dataset");
  synth_cmd->add_option("dir", syn.dir, "Output directory")->required();
  synth_cmd->add_option("--classes", syn.classes, "Class folders")->capture_default_str();
  synth_cmd->add_option("--per-class", syn.per_class, "Images per class")->capture_default_str();
  synth_cmd->add_option("--height", syn.height, "Image height")->capture_default_str();
  synth_cmd->add_option("--width", syn.width, "Image width")->capture_default_str();
  synth_cmd->add_option("--seed", syn.seed, "Pixel seed")->capture_default_str();

  std::vector<std::string> args = argv_in;
  try {
    const auto config_path = take_config_arg(args);
    if (config_path && !args.empty()) {
      const CLI::App* sub = app.get_subcommand_ptr(args.front()).get();
      if (sub == nullptr) fail(ErrorCode::kInvalidArgument, "--config needs a subcommand");
      auto extra = config_to_args(*sub, parse_config_file(*config_path));
      args.insert(args.begin() + 1, extra.begin(), extra.end());
    }
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }

  try {
    if (*pack_cmd) return run_pack(pack, out);
    if (*inspect_cmd) return run_inspect(inspect_path, out);
    if (*verify_cmd) return run_verify(verify_path, out, err);
    if (*bench_cmd) return run_bench(bench, out);
    if (*train_cmd) return run_train(tr, out);
    if (*plot_cmd) return run_plot(plot_csv, plot_dir, out);
    if (*synth_cmd) {
      synth_dataset(syn.dir, syn.classes, syn.per_class, syn.height, syn.width, syn.seed);
      out << "wrote " << std::uint64_t{syn.classes} * syn.per_class << " images to " << syn.dir
          << "\n";
      return kExitOk;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    if (e.sample_key()) err << "  sample: " << *e.sample_key() << "\n";
    if (e.record_index()) err << "  record: " << *e.record_index() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  err << app.help();
  return kExitUsage;
}

int dispatch(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return dispatch(args, std::cout, std::cerr);
}

}  // namespace loadforge
