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
#include <span>
#include <string>
#include <vector>

namespace spyker::data {

// Row-major feature matrix with integer labels in [0, n_classes).
struct Dataset {
  std::string name;
  std::size_t dim = 0;
  int n_classes = 0;
  std::vector<float> features;  // n_samples * dim
  std::vector<std::int32_t> labels;

  std::size_t size() const noexcept { return labels.size(); }
  bool empty() const noexcept { return labels.empty(); }

  std::span<const float> row(std::size_t i) const {
    return {features.data() + i * dim, dim};
  }

  // Throws InvalidInput on shape, label range, or non-finite feature problems.
  void validate() const;

  // Copies the listed rows into a new dataset with the same schema.
  Dataset subset(std::span<const std::size_t> indices, std::string subset_name = {}) const;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

// Non-owning view of a batch of rows (indices into a dataset).
struct BatchView {
  const Dataset* data;
  std::span<const std::size_t> indices;

  std::size_t size() const noexcept { return indices.size(); }
};

}  // namespace spyker::data
