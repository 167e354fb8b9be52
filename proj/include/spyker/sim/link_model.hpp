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
#include <string>
#include <unordered_map>
#include <vector>

namespace spyker::sim {

using NodeId = int;

enum class NodeRole : std::uint8_t { kServer, kClient, kCloud };
enum class LinkClass : std::uint8_t { kServerServer, kServerClient };

/// One-way delays between geographic locations, row = sender.
struct LatencyMatrix {
  std::vector<std::string> locations;
  std::vector<std::vector<double>> ms;

  // AWS inter-region delays for Hongkong, Paris, Sydney, California.
  // Asymmetric as measured; the diagonal is the intra-region delay.
  static LatencyMatrix aws_reference();

  // Every entry replaced by the mean of all entries.
  LatencyMatrix uniform_of_mean() const;
  double mean() const;

  // -1 when absent.
  int index_of(const std::string& location) const;
  // Throws ConfigError for ragged or negative matrices.
  void validate() const;
};

/// Point-to-point link model: latency + size / bandwidth, with per directed
/// pair FIFO delivery. Links are independent (no shared-NIC contention).
class LinkModel {
 public:
  LinkModel(LatencyMatrix matrix, double bandwidth_bps);

  NodeId add_node(NodeRole role, int location);
  std::size_t node_count() const noexcept { return nodes_.size(); }
  NodeRole role(NodeId n) const;
  int location(NodeId n) const;
  const LatencyMatrix& matrix() const noexcept { return matrix_; }
  double bandwidth_bps() const noexcept { return bandwidth_bps_; }

  double latency_ms(NodeId src, NodeId dst) const;
  double transfer_ms(std::size_t bytes) const;

  /// Delivery time for a message sent now: max(now + latency + transfer,
  /// last delivery on src->dst). Records the delivery and counts the bytes.
  double schedule(NodeId src, NodeId dst, std::size_t bytes, double now);

  LinkClass link_class(NodeId a, NodeId b) const;

  // Bytes sent at or after the window start.
  void set_count_window_start(double t) noexcept { window_start_ = t; }
  std::uint64_t bytes(LinkClass c) const noexcept { return bytes_[static_cast<std::size_t>(c)]; }
  std::uint64_t total_bytes() const noexcept { return bytes_[0] + bytes_[1]; }
  std::uint64_t messages(LinkClass c) const noexcept { return messages_[static_cast<std::size_t>(c)]; }

 private:
  struct Node {
    NodeRole role;
    int location;
  };
  void check(NodeId n) const;

  LatencyMatrix matrix_;
  double bandwidth_bps_;
  std::vector<Node> nodes_;
  std::unordered_map<std::uint64_t, double> last_delivery_;
  double window_start_ = 0.0;
  std::uint64_t bytes_[2] = {0, 0};
  std::uint64_t messages_[2] = {0, 0};
};

}  // namespace spyker::sim
