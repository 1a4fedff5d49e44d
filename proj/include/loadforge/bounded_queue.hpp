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

#ifndef LOADFORGE_BOUNDED_QUEUE_HPP_
#define LOADFORGE_BOUNDED_QUEUE_HPP_

#include <algorithm>
#include <condition_variable>
#include <cstddef>
#include <deque>
#include <mutex>
#include <optional>

namespace loadforge {

// Blocking MPMC FIFO with a fixed capacity. push blocks while full, pop
// blocks while empty. After close(), push fails and pop drains what is left;
// cancel() also discards queued items.
template <class T>
class BoundedQueue {
 public:
  explicit BoundedQueue(std::size_t capacity) : capacity_(std::max<std::size_t>(1, capacity)) {}

  BoundedQueue(const BoundedQueue&) = delete;
  BoundedQueue& operator=(const BoundedQueue&) = delete;

  bool push(T value) {
    {
      std::unique_lock lock(mu_);
      not_full_.wait(lock, [&] { return closed_ || items_.size() < capacity_; });
      if (closed_) return false;
      items_.push_back(std::move(value));
      high_water_ = std::max(high_water_, items_.size());
    }
    not_empty_.notify_one();
    return true;
  }

  std::optional<T> pop() {
    std::optional<T> out;
    {
      std::unique_lock lock(mu_);
      not_empty_.wait(lock, [&] { return closed_ || !items_.empty(); });
      if (items_.empty()) return std::nullopt;
      out.emplace(std::move(items_.front()));
      items_.pop_front();
    }
    not_full_.notify_one();
    return out;
  }

  void close() {
    {
      std::lock_guard lock(mu_);
      closed_ = true;
    }
    not_empty_.notify_all();
    not_full_.notify_all();
  }

  void cancel() {
    std::deque<T> dropped;
    {
      std::lock_guard lock(mu_);
      closed_ = true;
      dropped.swap(items_);
    }
    not_empty_.notify_all();
    not_full_.notify_all();
  }

  std::size_t capacity() const { return capacity_; }
  std::size_t high_water() const {
    std::lock_guard lock(mu_);
    return high_water_;
  }

 private:
  const std::size_t capacity_;
  mutable std::mutex mu_;
  std::condition_variable not_empty_;
  std::condition_variable not_full_;
  std::deque<T> items_;
  std::size_t high_water_ = 0;
  bool closed_ = false;
};

// Counting semaphore that can be cancelled, tracking how many permits were
// out at once.
class PermitPool {
 public:
  explicit PermitPool(std::size_t permits) : available_(permits), total_(permits) {}

  // False once cancelled.
  bool acquire() {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return cancelled_ || available_ > 0; });
    if (cancelled_) return false;
    --available_;
    high_water_ = std::max(high_water_, total_ - available_);
    return true;
  }

  void release(std::size_t n) {
    {
      std::lock_guard lock(mu_);
      available_ = std::min(total_, available_ + n);
    }
    cv_.notify_all();
  }

  void cancel() {
    {
      std::lock_guard lock(mu_);
      cancelled_ = true;
    }
    cv_.notify_all();
  }

  std::size_t high_water() const {
    std::lock_guard lock(mu_);
    return high_water_;
  }

 private:
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::size_t available_;
  const std::size_t total_;
  std::size_t high_water_ = 0;
  bool cancelled_ = false;
};

}  // namespace loadforge

#endif  // LOADFORGE_BOUNDED_QUEUE_HPP_
