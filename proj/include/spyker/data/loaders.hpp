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

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "spyker/data/dataset.hpp"

namespace spyker::data {

inline constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

/// Reads an IDX image/label file pair (MNIST layout). Pixels are scaled to
/// [0, 1]. Throws LoadError with kind kOpen, kMagic, kTruncated or
/// kCountMismatch.
Dataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels,
                 std::string name = "idx");

/// CIFAR-10 binary batches (1 label byte + 3072 channel-planar pixel bytes per
/// record), converted to 16x16 grayscale by channel mean and 2x2 pooling.
Dataset load_cifar10_gray16(const std::vector<std::filesystem::path>& batches,
                            std::string name = "cifar10-gray16");

/// Internal cache format: "SPYKDSET" magic, u32 version, u32 dim,
/// u32 n_classes, u64 n_samples, u32 name length, name bytes, then
/// little-endian f32 features and i32 labels.
inline constexpr std::uint32_t kCacheVersion = 1;
void save_cache(const Dataset& d, const std::filesystem::path& path);
Dataset load_cache(const std::filesystem::path& path);

}  // namespace spyker::data
