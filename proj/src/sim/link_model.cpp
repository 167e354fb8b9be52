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

#include "spyker/sim/link_model.hpp"

#include <algorithm>

#include "spyker/errors.hpp"

namespace spyker::sim {

LatencyMatrix LatencyMatrix::aws_reference() {
  return {{"Hongkong", "Paris", "Sydney", "California"},
          {{1.41, 194.9, 132.28, 155.13},
           {197.91, 0.9, 278.83, 142.25},
           {132.06, 280.11, 2.56, 138.47},
           {154.96, 142.79, 138.57, 2.14}}};
}

double LatencyMatrix::mean() const {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& row : ms) {
    for (double v : row) {
      sum += v;
      ++n;
    }
  }
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

LatencyMatrix LatencyMatrix::uniform_of_mean() const {
  LatencyMatrix out = *this;
  const double m = mean();
  for (auto& row : out.ms) std::fill(row.begin(), row.end(), m);
  return out;
}

int LatencyMatrix::index_of(const std::string& location) const {
  auto it = std::find(locations.begin(), locations.end(), location);
  return it == locations.end() ? -1 : static_cast<int>(it - locations.begin());
}

void LatencyMatrix::validate() const {
  if (locations.empty()) throw ConfigError("network.latency", "no locations");
  if (ms.size() != locations.size()) throw ConfigError("network.latency", "matrix rows != locations");
  for (const auto& row : ms) {
    if (row.size() != locations.size()) throw ConfigError("network.latency", "matrix is not square");
    for (double v : row) {
      if (!(v >= 0.0)) throw ConfigError("network.latency", "negative or NaN latency");
    }
  }
}

LinkModel::LinkModel(LatencyMatrix matrix, double bandwidth_bps)
    : matrix_(std::move(matrix)), bandwidth_bps_(bandwidth_bps) {
  matrix_.validate();
  if (!(bandwidth_bps_ > 0.0)) throw ConfigError("network.bandwidth_bps", "must be > 0");
}

NodeId LinkModel::add_node(NodeRole role, int location) {
  if (location < 0 || location >= static_cast<int>(matrix_.locations.size())) {
    throw ConfigError("topology", "node location index " + std::to_string(location) + " not in latency matrix");
  }
  nodes_.push_back({role, location});
  return static_cast<NodeId>(nodes_.size() - 1);
}

void LinkModel::check(NodeId n) const {
  if (n < 0 || n >= static_cast<NodeId>(nodes_.size())) {
    throw ConfigError("topology", "unknown node " + std::to_string(n));
  }
}

NodeRole LinkModel::role(NodeId n) const {
  check(n);
  return nodes_[static_cast<std::size_t>(n)].role;
}

int LinkModel::location(NodeId n) const {
  check(n);
  return nodes_[static_cast<std::size_t>(n)].location;
}

double LinkModel::latency_ms(NodeId src, NodeId dst) const {
  return matrix_.ms[static_cast<std::size_t>(location(src))][static_cast<std::size_t>(location(dst))];
}

double LinkModel::transfer_ms(std::size_t bytes) const {
  return static_cast<double>(bytes) * 8.0 / bandwidth_bps_ * 1000.0;
}

LinkClass LinkModel::link_class(NodeId a, NodeId b) const {
  return role(a) == NodeRole::kClient || role(b) == NodeRole::kClient ? LinkClass::kServerClient
                                                                      : LinkClass::kServerServer;
}

double LinkModel::schedule(NodeId src, NodeId dst, std::size_t bytes, double now) {
  const double raw = now + latency_ms(src, dst) + transfer_ms(bytes);
  const auto key = (static_cast<std::uint64_t>(static_cast<std::uint32_t>(src)) << 32) |
                   static_cast<std::uint32_t>(dst);
  auto [it, inserted] = last_delivery_.try_emplace(key, raw);
  const double at = inserted ? raw : std::max(raw, it->second);
  it->second = at;
  if (now >= window_start_) {
    const auto c = static_cast<std::size_t>(link_class(src, dst));
    bytes_[c] += bytes;
    ++messages_[c];
  }
  return at;
}

}  // namespace spyker::sim
