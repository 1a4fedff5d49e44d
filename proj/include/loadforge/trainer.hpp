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

// Binary logistic regression, the workload that consumes loaded batches.
//
//   loss(w)     = -sum_i [ y_i log s(x_i.w) + (1 - y_i) log(1 - s(x_i.w)) ]
//   gradient(w) =  sum_i (s(x_i.w) - y_i) x_i
//   sgd step    :  w <- w - eta * gradient
//   newton step :  w <- w - H^-1 g,  H = sum_i s_i (1 - s_i) x_i x_i^T + ridge I,
//                                   g = gradient + ridge w

#ifndef LOADFORGE_TRAINER_HPP_
#define LOADFORGE_TRAINER_HPP_

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace loadforge {

struct Batch;
class Pipeline;

// Row-major rows x dim features with binary targets.
struct FeatureBatch {
  std::size_t rows = 0;
  std::size_t dim = 0;
  std::vector<double> x;
  std::vector<double> y;  // 0 or 1

  FeatureBatch() = default;
  FeatureBatch(std::size_t rows, std::size_t dim, std::vector<double> x, std::vector<double> y);

  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(x).subspan(i * dim, dim);
  }
};

using WeightVector = std::vector<double>;

struct TrainConfig {
  double eta = 0.01;
  std::uint32_t batch_size = 32;
  std::uint32_t epochs = 1;
  std::uint32_t dim = 0;
};

struct LossStats {
  double loss = 0.0;       // sum of per-batch losses, each at the pre-step weights
  double grad_norm = 0.0;  // L2 norm of the epoch's last batch gradient
  std::uint64_t samples_seen = 0;
};

double sigmoid(double x);
double loss(std::span<const double> w, const FeatureBatch& batch);
std::vector<double> gradient(std::span<const double> w, const FeatureBatch& batch);
WeightVector sgd_step(std::span<const double> w, std::span<const double> grad, double eta);

inline constexpr std::size_t kMaxNewtonDim = 64;

WeightVector newton_step(std::span<const double> w, const FeatureBatch& data, double ridge);
std::vector<double> partial_sum_gradient(std::span<const double> w,
                                         std::span<const FeatureBatch> shards);

// Image batch -> features: pixels widened to f64, labels mapped to label mod 2.
FeatureBatch to_feature_batch(const Batch& batch);

struct EpochResult {
  WeightVector weights;
  LossStats stats;
  std::uint64_t train_time_ns = 0;  // compute only, excludes waiting for batches
  std::uint64_t wait_time_ns = 0;   // total StageTiming::wait_ns of consumed batches
  std::uint64_t batches = 0;
};

// Runs inside the timed compute section after each update; used to simulate
// a heavier model.
using TrainHook = std::function<void()>;

// One pass over the batches yielded by `next` (nullopt ends the epoch).
// Time spent inside `next` is not counted as training time.
EpochResult train_epoch(const std::function<std::optional<FeatureBatch>()>& next,
                        WeightVector w, const TrainConfig& config,
                        const TrainHook& hook = {});
EpochResult train_epoch(std::span<const FeatureBatch> batches, WeightVector w,
                        const TrainConfig& config, const TrainHook& hook = {});
EpochResult train_epoch(Pipeline& pipeline, std::uint64_t epoch, WeightVector w,
                        const TrainConfig& config, const TrainHook& hook = {});

struct TrainRun {
  WeightVector weights;
  std::vector<EpochResult> epochs;
};

// config.epochs passes; zero epochs returns `w` untouched.
TrainRun train(std::span<const FeatureBatch> batches, WeightVector w, const TrainConfig& config);
// Pipeline epochs first_epoch, first_epoch + 1, ...
TrainRun train(Pipeline& pipeline, WeightVector w, const TrainConfig& config,
               std::uint64_t first_epoch = 0, const TrainHook& hook = {});

}  // namespace loadforge

#endif  // LOADFORGE_TRAINER_HPP_
