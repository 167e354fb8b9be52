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
#include <vector>

#include "spyker/data/dataset.hpp"
#include "spyker/model/tiny_model.hpp"

namespace spyker::data {

struct SyntheticSpec {
  std::uint64_t seed = 0;
  std::size_t n_samples = 400;
  std::size_t dim = 2;
  int n_classes = 2;
  double separation = 4.0;  // minimum pairwise centroid distance, in blob std units
  double blob_std = 1.0;
  // Added to every coordinate; the blobs are otherwise centered on the origin.
  double offset = 0.0;
};

/// Gaussian blobs around seeded centroids with pairwise distance >= separation.
/// Class k owns samples k, k + C, k + 2C, ... before a final seeded shuffle, so
/// class counts differ by at most one.
Dataset synthetic_dataset(const SyntheticSpec& spec);

struct PartitionSpec {
  int n_clients = 1;
  int labels_per_client = 2;
  std::uint64_t seed = 0;
};

/// Non-iid label partition. Every client owns exactly min(l, C) labels:
/// client slots are laid out label-major (each label gets slots in
/// proportion to its sample count, at least one, at most n_clients) and
/// dealt round-robin over a seeded client order, then each label's shuffled
/// samples are split evenly over its slots. Returns sample indices per client.
/// Throws ConfigError when n_clients * l < C or l is out of range.
std::vector<std::vector<std::size_t>> partition_noniid(const Dataset& data, const PartitionSpec& spec);

/// Fraction of argmax-correct predictions (ties go to the lowest class).
double evaluate(const model::TinyModel& m, const Dataset& test);

}  // namespace spyker::data
