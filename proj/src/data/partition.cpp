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

#include "spyker/data/partition.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include <Eigen/Dense>

#include "spyker/errors.hpp"
#include "spyker/rng.hpp"

namespace spyker::data {

Dataset synthetic_dataset(const SyntheticSpec& spec) {
  if (spec.n_classes < 2) throw InvalidInput("synthetic_dataset: n_classes must be >= 2");
  if (!(spec.separation > 0.0)) throw InvalidInput("synthetic_dataset: separation must be > 0");
  if (spec.dim == 0 || spec.n_samples == 0) throw InvalidInput("synthetic_dataset: empty shape");

  Rng rng(spec.seed);
  std::normal_distribution<double> n01(0.0, 1.0);
  const auto dim = static_cast<Eigen::Index>(spec.dim);
  const int c = spec.n_classes;

  // Base layout with exact pairwise distance >= separation, then a random rotation.
  Eigen::MatrixXd centroids = Eigen::MatrixXd::Zero(dim, c);
  if (dim >= c) {
    for (int k = 0; k < c; ++k) centroids(k, k) = spec.separation / std::numbers::sqrt2;
  } else if (dim >= 2) {
    const double radius = spec.separation / (2.0 * std::sin(std::numbers::pi / c));
    const double phase = std::uniform_real_distribution<double>(0.0, 2.0 * std::numbers::pi)(rng);
    for (int k = 0; k < c; ++k) {
      const double a = phase + 2.0 * std::numbers::pi * k / c;
      centroids(0, k) = radius * std::cos(a);
      centroids(1, k) = radius * std::sin(a);
    }
  } else {
    for (int k = 0; k < c; ++k) centroids(0, k) = spec.separation * k;
  }
  const Eigen::VectorXd mean = centroids.rowwise().mean();
  centroids.colwise() -= mean;
  if (dim >= 2) {
    Eigen::MatrixXd g(dim, dim);
    for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = n01(rng);
    const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ();
    centroids = q * centroids;
  }
  centroids.array() += spec.offset;

  std::vector<std::size_t> order(spec.n_samples);
  std::iota(order.begin(), order.end(), std::size_t{0});
  fisher_yates(std::span<std::size_t>(order), rng);

  Dataset d;
  d.name = "synthetic";
  d.dim = spec.dim;
  d.n_classes = c;
  d.features.resize(spec.n_samples * spec.dim);
  d.labels.resize(spec.n_samples);
  for (std::size_t i = 0; i < spec.n_samples; ++i) {
    const int label = static_cast<int>(i % static_cast<std::size_t>(c));
    const std::size_t slot = order[i];
    d.labels[slot] = label;
    for (Eigen::Index k = 0; k < dim; ++k) {
      d.features[slot * spec.dim + static_cast<std::size_t>(k)] =
          static_cast<float>(centroids(k, label) + spec.blob_std * n01(rng));
    }
  }
  return d;
}

std::vector<std::vector<std::size_t>> partition_noniid(const Dataset& data, const PartitionSpec& spec) {
  if (spec.n_clients < 1) throw ConfigError("partition.n_clients", "must be >= 1");
  if (spec.labels_per_client < 1) throw ConfigError("partition.labels_per_client", "must be >= 1");
  if (data.empty()) throw ConfigError("partition", "dataset is empty");

  std::vector<std::vector<std::size_t>> by_label(static_cast<std::size_t>(data.n_classes));
  for (std::size_t i = 0; i < data.size(); ++i) by_label[static_cast<std::size_t>(data.labels[i])].push_back(i);
  std::vector<std::size_t> present;
  for (std::size_t x = 0; x < by_label.size(); ++x) {
    if (!by_label[x].empty()) present.push_back(x);
  }

  const auto n = static_cast<std::size_t>(spec.n_clients);
  const std::size_t l = std::min(static_cast<std::size_t>(spec.labels_per_client), present.size());
  const std::size_t slots = n * l;
  if (slots < present.size()) {
    throw ConfigError("partition", "n_clients * labels_per_client (" + std::to_string(slots) +
                                       ") must cover all " + std::to_string(present.size()) + " labels");
  }

  Rng rng(spec.seed);
  for (auto x : present) fisher_yates(std::span<std::size_t>(by_label[x]), rng);

  // Slots per label, proportional to sample count, clamped to [1, n].
  std::vector<double> quota(present.size());
  std::vector<std::size_t> count(present.size());
  std::size_t assigned = 0;
  for (std::size_t p = 0; p < present.size(); ++p) {
    quota[p] = static_cast<double>(slots) * static_cast<double>(by_label[present[p]].size()) /
               static_cast<double>(data.size());
    count[p] = std::clamp<std::size_t>(static_cast<std::size_t>(std::floor(quota[p])), 1, n);
    assigned += count[p];
  }
  while (assigned < slots) {
    std::size_t best = present.size();
    for (std::size_t p = 0; p < present.size(); ++p) {
      if (count[p] < n && (best == present.size() || quota[p] - count[p] > quota[best] - count[best])) best = p;
    }
    ++count[best];
    ++assigned;
  }
  while (assigned > slots) {
    std::size_t best = present.size();
    for (std::size_t p = 0; p < present.size(); ++p) {
      if (count[p] > 1 && (best == present.size() || quota[p] - count[p] < quota[best] - count[best])) best = p;
    }
    --count[best];
    --assigned;
  }

  std::vector<std::size_t> client_order(n);
  std::iota(client_order.begin(), client_order.end(), std::size_t{0});
  fisher_yates(std::span<std::size_t>(client_order), rng);

  // Label-major slot sequence; slot position q belongs to client_order[q % n].
  // A label owns at most n consecutive positions, so no client sees it twice.
  std::vector<std::vector<std::size_t>> shards(n);
  std::size_t q = 0;
  for (std::size_t p = 0; p < present.size(); ++p) {
    const auto& samples = by_label[present[p]];
    if (samples.size() < count[p]) {
      throw ConfigError("partition", "label " + std::to_string(present[p]) + " has " +
                                         std::to_string(samples.size()) + " samples for " +
                                         std::to_string(count[p]) + " client slots");
    }
    const std::size_t base = samples.size() / count[p];
    const std::size_t extra = samples.size() % count[p];
    std::size_t off = 0;
    for (std::size_t s = 0; s < count[p]; ++s, ++q) {
      const std::size_t take = base + (s < extra ? 1 : 0);
      auto& shard = shards[client_order[q % n]];
      shard.insert(shard.end(), samples.begin() + static_cast<std::ptrdiff_t>(off),
                   samples.begin() + static_cast<std::ptrdiff_t>(off + take));
      off += take;
    }
  }
  for (auto& s : shards) std::sort(s.begin(), s.end());
  return shards;
}

double evaluate(const model::TinyModel& m, const Dataset& test) {
  if (test.empty()) throw InvalidInput("evaluate: empty test set");
  const auto pred = model::predict(m, test);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) correct += pred[i] == test.labels[i] ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(test.size());
}

}  // namespace spyker::data
