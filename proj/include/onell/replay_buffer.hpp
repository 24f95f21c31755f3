// Copyright 2026 The onell-dac Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "onell/errors.hpp"
#include "onell/seeding.hpp"

namespace onell {

struct Transition {
  double s = 0.0;
  std::uint32_t a = 0;
  double r = 0.0;
  double s_next = 0.0;
  bool done = false;

  friend bool operator==(const Transition&, const Transition&) = default;
};

// Fixed-capacity FIFO ring; once full, each push overwrites the oldest entry.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity_ == 0) throw InvalidParameterError("replay buffer capacity must be positive");
  }

  void push(const Transition& t) {
    if (data_.size() < capacity_) {
      data_.push_back(t);
    } else {
      data_[cursor_] = t;
    }
    cursor_ = (cursor_ + 1) % capacity_;
    ++total_pushed_;
  }

  std::size_t size() const noexcept { return data_.size(); }
  std::size_t capacity() const noexcept { return capacity_; }
  std::uint64_t total_pushed() const noexcept { return total_pushed_; }
  bool empty() const noexcept { return data_.empty(); }

  // i = 0 is the oldest transition still stored.
  const Transition& at(std::size_t i) const {
    if (i >= data_.size()) throw std::out_of_range("ReplayBuffer::at");
    const std::size_t start = data_.size() < capacity_ ? 0 : cursor_;
    return data_[(start + i) % capacity_];
  }

  // Uniform with replacement over the current contents.
  void sample_indices(std::size_t count, Rng& rng, std::vector<std::size_t>& out) const {
    if (data_.empty()) throw StateError("sampling from an empty replay buffer");
    std::uniform_int_distribution<std::size_t> pick(0, data_.size() - 1);
    out.resize(count);
    for (auto& i : out) i = pick(rng);
  }

  const Transition& raw(std::size_t i) const { return data_[i]; }

  // Adds `offset` to every stored reward. Used once, when an adaptive bias is
  // resolved after warmup and before any learning.
  void shift_rewards(double offset) {
    for (auto& t : data_) t.r += offset;
  }

 private:
  std::size_t capacity_;
  std::size_t cursor_ = 0;
  std::uint64_t total_pushed_ = 0;
  std::vector<Transition> data_;
};

}  // namespace onell
