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

// `loadforge` command-line front end.
//
//   loadforge pack <dir> -o <file> [--chunk-bytes N] [--store-encoded]
//   loadforge inspect <container>
//   loadforge verify <container>
//   loadforge bench <dataset-dir> [--grid all|SPEC[,SPEC...]] [--epochs N] ...
//   loadforge train <dataset> [--eta F] [--batch-size N] [--epochs N] [--seed S]
//   loadforge plot <csv> -o <dir>
//   loadforge synth <dir> [--classes N] [--per-class N] [--height H] [--width W]
//
// Every subcommand accepts `--config FILE`, a flat `key = value` file whose
// keys are long flag names; flags given on the command line win. Exit codes:
// 0 success, 1 usage error, 2 data or format error, 3 internal error.

#ifndef LOADFORGE_CLI_HPP_
#define LOADFORGE_CLI_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace loadforge {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitInternal = 3;

// `args` excludes the program name.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int dispatch(int argc, char** argv);

// Parses `key = value` lines; '#' starts a comment. Throws InvalidArgument on
// malformed lines and IoError if the file cannot be read.
std::vector<std::pair<std::string, std::string>> parse_config_file(
    const std::filesystem::path& path);

// min(hardware threads, LOADFORGE_THREADS if set to a positive integer).
std::uint32_t worker_cap();

// classes x per_class PPM files of SplitMix64 pixels under
// out_dir/class_NNN/img_NNNNN.ppm. Deterministic in seed.
void synth_dataset(const std::filesystem::path& out_dir, std::uint32_t classes,
                   std::uint32_t per_class, std::uint32_t height, std::uint32_t width,
                   std::uint64_t seed);

}  // namespace loadforge

#endif  // LOADFORGE_CLI_HPP_
