/*
 * Copyright 2026 The Spyker Simulator Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>

namespace spyker {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Independent stream seed for (purpose, index) under one master seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t purpose, std::uint64_t index) {
  return splitmix64(splitmix64(master ^ splitmix64(purpose)) + index);
}

// Seed purposes. Values are part of the reproducibility contract.
namespace seed_purpose {
inline constexpr std::uint64_t kClientShuffle = 1;
inline constexpr std::uint64_t kClientDelay = 2;
inline constexpr std::uint64_t kModelInit = 3;
inline constexpr std::uint64_t kRing = 4;
inline constexpr std::uint64_t kPartition = 5;
inline constexpr std::uint64_t kSynthetic = 6;
inline constexpr std::uint64_t kEvalSubset = 7;
inline constexpr std::uint64_t kClientSelection = 8;
}  // namespace seed_purpose

// Fisher-Yates, j = rng() % (i + 1) for i = n-1 .. 1.
template <typename T>
void fisher_yates(std::span<T> items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace spyker
