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

#include "spyker/data/dataset.hpp"

#include <cmath>

#include "spyker/errors.hpp"

namespace spyker::data {

void Dataset::validate() const {
  if (labels.empty()) throw InvalidInput("dataset '" + name + "' has no samples");
  if (dim == 0) throw InvalidInput("dataset '" + name + "' has zero feature dimension");
  if (features.size() != labels.size() * dim) {
    throw InvalidInput("dataset '" + name + "' feature matrix does not match n_samples * dim");
  }
  for (auto l : labels) {
    if (l < 0 || l >= n_classes) {
      throw InvalidInput("dataset '" + name + "' label " + std::to_string(l) + " outside [0, " +
                         std::to_string(n_classes) + ")");
    }
  }
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (!std::isfinite(features[i])) throw NumericalError("dataset '" + name + "' feature", i);
  }
}

Dataset Dataset::subset(std::span<const std::size_t> indices, std::string subset_name) const {
  Dataset out;
  out.name = subset_name.empty() ? name : std::move(subset_name);
  out.dim = dim;
  out.n_classes = n_classes;
  out.features.reserve(indices.size() * dim);
  out.labels.reserve(indices.size());
  for (auto i : indices) {
    if (i >= size()) throw InvalidInput("Dataset::subset: index out of range");
    auto r = row(i);
    out.features.insert(out.features.end(), r.begin(), r.end());
    out.labels.push_back(labels[i]);
  }
  return out;
}

}  // namespace spyker::data
