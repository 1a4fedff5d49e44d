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

#include "loadforge/trainer.hpp"

#include <chrono>
#include <cmath>

#include "loadforge/error.hpp"
#include "loadforge/pipeline.hpp"

namespace loadforge {

namespace {

using Clock = std::chrono::steady_clock;

void check_dims(std::span<const double> w, const FeatureBatch& batch) {
  if (w.size() != batch.dim) {
    fail(ErrorCode::kDimMismatch, "weights have " + std::to_string(w.size()) +
                                      " entries, features have " + std::to_string(batch.dim));
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// log(1 + e^z) without overflow or cancellation.
double softplus(double z) {
  return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

// Neumaier compensated sum.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

double norm2(std::span<const double> v) { return std::sqrt(dot(v, v)); }

// -log s(z) = softplus(-z), -log(1 - s(z)) = softplus(z)
double row_loss(double z, double y) {
  if (y == 1.0) return softplus(-z);
  if (y == 0.0) return softplus(z);
  return y * softplus(-z) + (1.0 - y) * softplus(z);
}

}  // namespace

FeatureBatch::FeatureBatch(std::size_t rows_, std::size_t dim_, std::vector<double> x_,
                           std::vector<double> y_)
    : rows(rows_), dim(dim_), x(std::move(x_)), y(std::move(y_)) {
  if (x.size() != rows * dim || y.size() != rows) {
    fail(ErrorCode::kDimMismatch, "feature batch storage does not match " +
                                      std::to_string(rows) + "x" + std::to_string(dim));
  }
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double loss(std::span<const double> w, const FeatureBatch& batch) {
  check_dims(w, batch);
  CompensatedSum total;
  for (std::size_t i = 0; i < batch.rows; ++i) {
    total.add(row_loss(dot(batch.row(i), w), batch.y[i]));
  }
  return total.value();
}

std::vector<double> gradient(std::span<const double> w, const FeatureBatch& batch) {
  check_dims(w, batch);
  std::vector<double> g(batch.dim, 0.0);
  for (std::size_t i = 0; i < batch.rows; ++i) {
    const auto xi = batch.row(i);
    const double r = sigmoid(dot(xi, w)) - batch.y[i];
    for (std::size_t j = 0; j < batch.dim; ++j) g[j] += r * xi[j];
  }
  return g;
}

WeightVector sgd_step(std::span<const double> w, std::span<const double> grad, double eta) {
  if (!(eta > 0.0)) fail(ErrorCode::kInvalidArgument, "learning rate must be positive");
  if (w.size() != grad.size()) fail(ErrorCode::kDimMismatch, "gradient length differs from weights");
  WeightVector out(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) out[i] = w[i] - eta * grad[i];
  return out;
}

WeightVector newton_step(std::span<const double> w, const FeatureBatch& data, double ridge) {
  check_dims(w, data);
  const std::size_t d = data.dim;
  if (d > kMaxNewtonDim) {
    fail(ErrorCode::kUnsupported, "Newton step limited to d <= 64, got " + std::to_string(d));
  }
  if (!(ridge >= 0.0)) fail(ErrorCode::kInvalidArgument, "ridge must be >= 0");

  // H (lower triangle used) and g, both including the ridge term.
  std::vector<double> h(d * d, 0.0);
  std::vector<double> g = gradient(w, data);
  for (std::size_t i = 0; i < data.rows; ++i) {
    const auto xi = data.row(i);
    const double s = sigmoid(dot(xi, w));
    const double weight = s * (1.0 - s);
    for (std::size_t r = 0; r < d; ++r) {
      for (std::size_t c = 0; c <= r; ++c) h[r * d + c] += weight * xi[r] * xi[c];
    }
  }
  double max_diag = 0.0;
  for (std::size_t r = 0; r < d; ++r) {
    h[r * d + r] += ridge;
    g[r] += ridge * w[r];
    max_diag = std::max(max_diag, h[r * d + r]);
  }

  // H = L D L^T in place (unit lower L below the diagonal, D on it). No
  // square roots, so well-scaled problems solve exactly. A pivot this small
  // relative to the largest diagonal entry means H is singular to working
  // precision.
  const double tol = 1e-12 * max_diag;
  if (!(max_diag > 0.0)) fail(ErrorCode::kSingularHessian, "Hessian is zero");
  for (std::size_t j = 0; j < d; ++j) {
    double piv = h[j * d + j];
    for (std::size_t k = 0; k < j; ++k) piv -= h[j * d + k] * h[j * d + k] * h[k * d + k];
    if (!(piv > tol)) {
      fail(ErrorCode::kSingularHessian, "Hessian is singular (pivot " + std::to_string(j) + ")");
    }
    h[j * d + j] = piv;
    for (std::size_t i = j + 1; i < d; ++i) {
      double v = h[i * d + j];
      for (std::size_t k = 0; k < j; ++k) v -= h[i * d + k] * h[j * d + k] * h[k * d + k];
      h[i * d + j] = v / piv;
    }
  }
  // L z = g, D y = z, L^T delta = y.
  std::vector<double> delta(g);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t k = 0; k < i; ++k) delta[i] -= h[i * d + k] * delta[k];
  }
  for (std::size_t i = 0; i < d; ++i) delta[i] /= h[i * d + i];
  for (std::size_t i = d; i-- > 0;) {
    for (std::size_t k = i + 1; k < d; ++k) delta[i] -= h[k * d + i] * delta[k];
  }
  WeightVector out(d);
  for (std::size_t i = 0; i < d; ++i) out[i] = w[i] - delta[i];
  return out;
}

std::vector<double> partial_sum_gradient(std::span<const double> w,
                                         std::span<const FeatureBatch> shards) {
  if (shards.empty()) fail(ErrorCode::kInvalidArgument, "no shards to accumulate");
  std::vector<double> total(w.size(), 0.0);
  for (const auto& shard : shards) {
    const auto g = gradient(w, shard);
    for (std::size_t j = 0; j < g.size(); ++j) total[j] += g[j];
  }
  return total;
}

FeatureBatch to_feature_batch(const Batch& batch) {
  const std::size_t rows = batch.size();
  const std::size_t dim = batch.sample_dim();
  std::vector<double> x(batch.features.begin(), batch.features.end());
  std::vector<double> y(rows);
  for (std::size_t i = 0; i < rows; ++i) y[i] = static_cast<double>(((batch.labels[i] % 2) + 2) % 2);
  return FeatureBatch(rows, dim, std::move(x), std::move(y));
}

namespace {

// One SGD update on `batch`; accumulates stats.
void train_on(const FeatureBatch& batch, WeightVector& w, const TrainConfig& config,
              LossStats& stats) {
  if (config.dim != 0 && batch.dim != config.dim) {
    fail(ErrorCode::kDimMismatch, "batch feature dimension " + std::to_string(batch.dim) +
                                      " differs from configured " + std::to_string(config.dim));
  }
  if (w.empty()) w.assign(batch.dim, 0.0);
  check_dims(w, batch);
  // loss() and gradient() in one pass over the rows, same arithmetic.
  std::vector<double> g(batch.dim, 0.0);
  CompensatedSum batch_loss;
  for (std::size_t i = 0; i < batch.rows; ++i) {
    const auto xi = batch.row(i);
    const double z = dot(xi, w);
    batch_loss.add(row_loss(z, batch.y[i]));
    const double r = sigmoid(z) - batch.y[i];
    for (std::size_t j = 0; j < batch.dim; ++j) g[j] += r * xi[j];
  }
  stats.loss += batch_loss.value();
  stats.grad_norm = norm2(g);
  stats.samples_seen += batch.rows;
  w = sgd_step(w, g, config.eta);
}

std::uint64_t elapsed_ns(Clock::time_point t0) {
  return static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - t0).count());
}

}  // namespace

EpochResult train_epoch(const std::function<std::optional<FeatureBatch>()>& next,
                        WeightVector w, const TrainConfig& config, const TrainHook& hook) {
  EpochResult r;
  while (auto batch = next()) {
    const auto t0 = Clock::now();
    train_on(*batch, w, config, r.stats);
    if (hook) hook();
    r.train_time_ns += elapsed_ns(t0);
    ++r.batches;
  }
  r.weights = std::move(w);
  return r;
}

EpochResult train_epoch(std::span<const FeatureBatch> batches, WeightVector w,
                        const TrainConfig& config, const TrainHook& hook) {
  std::size_t i = 0;
  return train_epoch(
      [&]() -> std::optional<FeatureBatch> {
        if (i == batches.size()) return std::nullopt;
        return batches[i++];
      },
      std::move(w), config, hook);
}

EpochResult train_epoch(Pipeline& pipeline, std::uint64_t epoch, WeightVector w,
                        const TrainConfig& config, const TrainHook& hook) {
  EpochResult r;
  while (auto batch = pipeline.next_batch(epoch)) {
    r.wait_time_ns += batch->timing.wait_ns;
    const auto t0 = Clock::now();
    train_on(to_feature_batch(*batch), w, config, r.stats);
    if (hook) hook();
    r.train_time_ns += elapsed_ns(t0);
    ++r.batches;
  }
  r.weights = std::move(w);
  return r;
}

TrainRun train(std::span<const FeatureBatch> batches, WeightVector w, const TrainConfig& config) {
  TrainRun run;
  for (std::uint32_t e = 0; e < config.epochs; ++e) {
    run.epochs.push_back(train_epoch(batches, std::move(w), config));
    w = run.epochs.back().weights;
  }
  run.weights = std::move(w);
  return run;
}

TrainRun train(Pipeline& pipeline, WeightVector w, const TrainConfig& config,
               std::uint64_t first_epoch, const TrainHook& hook) {
  TrainRun run;
  for (std::uint32_t e = 0; e < config.epochs; ++e) {
    run.epochs.push_back(train_epoch(pipeline, first_epoch + e, std::move(w), config, hook));
    w = run.epochs.back().weights;
  }
  run.weights = std::move(w);
  return run;
}

}  // namespace loadforge
