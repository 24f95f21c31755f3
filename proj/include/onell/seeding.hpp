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

#include <cstdint>
#include <random>
#include <string_view>

namespace onell {

// Every stochastic component owns one of these; never shared across threads.
using Rng = std::mt19937_64;

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// 64-bit FNV-1a.
constexpr std::uint64_t fnv1a64(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Stream seed for (base_seed, purpose, index):
//   mix64(mix64(base_seed ^ fnv1a64(purpose)) + index)
// Distinct purposes give unrelated streams, so training, checkpoint
// evaluation and final evaluation never share seeds in practice.
constexpr std::uint64_t derive_seed(std::uint64_t base_seed, std::string_view purpose,
                                    std::uint64_t index) noexcept {
  return mix64(mix64(base_seed ^ fnv1a64(purpose)) + index);
}

inline Rng make_rng(std::uint64_t base_seed, std::string_view purpose, std::uint64_t index = 0) {
  return Rng(derive_seed(base_seed, purpose, index));
}

namespace purpose {
inline constexpr std::string_view kTraining = "training";
inline constexpr std::string_view kNetworkInit = "network-init";
inline constexpr std::string_view kCheckpointEval = "checkpoint-eval";
inline constexpr std::string_view kFinalEval = "final-eval";
inline constexpr std::string_view kBaselineEval = "baseline-eval";
}  // namespace purpose

}  // namespace onell
