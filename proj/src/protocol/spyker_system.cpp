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

#include <set>

#include "spyker/errors.hpp"
#include "spyker/protocol/systems.hpp"

namespace spyker::protocol {

void SpykerSystem::start(sim::Simulator& sim) {
  std::vector<std::vector<sim::NodeId>> homes(static_cast<std::size_t>(cfg_.n_servers));
  for (int i = 0; i < cfg_.n_clients(); ++i) {
    homes[static_cast<std::size_t>(cfg_.client_home[static_cast<std::size_t>(i)])].push_back(cfg_.client_node(i));
  }
  std::vector<int> ring = cfg_.ring_order;
  if (ring.empty()) {
    for (int i = 0; i < cfg_.n_servers; ++i) ring.push_back(i);
  }
  servers_.clear();
  for (int i = 0; i < cfg_.n_servers; ++i) {
    servers_.push_back(server_init(i, cfg_.n_servers, share(initial_[static_cast<std::size_t>(i)]), ring,
                                   homes[static_cast<std::size_t>(i)], cfg_.hyper));
  }
  for (auto& s : servers_) {
    for (const auto& [client, counters] : s.clients) sim.send(s.id, client, initial_dispatch(s, client));
  }
}

double SpykerSystem::server_service_time(sim::NodeId, const sim::Envelope& env) {
  switch (kind_of(env.msg)) {
    case MessageKind::kClientUpdate:
    case MessageKind::kModelBroadcast:
      return cfg_.compute.spyker_aggregation_ms;
    default:
      return 0.0;
  }
}

void SpykerSystem::emit(sim::Simulator& sim, sim::NodeId node, Outbox& out) {
  std::set<std::uint64_t> bids;
  for (auto& o : out) {
    if (const auto* b = std::get_if<ModelBroadcast>(&o.msg)) bids.insert(b->bid);
    if (const auto* t = std::get_if<TokenPass>(&o.msg)) {
      ++audit_.token_passes;
      // A pass carries the bid the holder just synchronized.
      const std::uint64_t bid = t->token.bid;
      if (received_[{node, bid}] != cfg_.n_servers - 1 || broadcasts_[{node, bid}] != 1) ++audit_.early_passes;
      ++audit_.synchronizations;
    }
  }
  for (auto b : bids) {
    if (++broadcasts_[{node, b}] > 1) ++audit_.duplicate_broadcasts;
  }
  for (auto& o : out) sim.send(node, o.dst, std::move(o.msg));
}

void SpykerSystem::handle_at_server(sim::Simulator& sim, sim::NodeId node, sim::Envelope env) {
  auto& s = servers_.at(static_cast<std::size_t>(node));
  Outbox out;
  std::visit(
      [&](auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, ClientUpdate>) {
          on_client_update(s, m, env.src, out);
          count_update(env.src);
        } else if constexpr (std::is_same_v<T, ModelBroadcast>) {
          ++received_[{node, m.bid}];
          on_rcv_model(s, m, env.src, out);
        } else if constexpr (std::is_same_v<T, AgeBroadcast>) {
          on_rcv_age(s, m, env.src, out);
        } else if constexpr (std::is_same_v<T, TokenPass>) {
          on_rcv_token(s, m, out);
        } else {
          throw ProtocolViolation("server received a model dispatch");
        }
      },
      env.msg);
  emit(sim, node, out);
}

std::vector<SharedModel> SpykerSystem::server_models() const {
  std::vector<SharedModel> out;
  for (const auto& s : servers_) out.push_back(s.model);
  return out;
}

std::vector<Age> SpykerSystem::server_ages() const {
  std::vector<Age> out;
  for (const auto& s : servers_) out.push_back(s.age);
  return out;
}

SharedModel SpykerSystem::system_model() const {
  if (servers_.empty()) return share(initial_.front());
  if (servers_.size() == 1) return servers_.front().model;
  return share(age_weighted_average(server_models(), server_ages()));
}

int SpykerSystem::token_holders() const {
  int n = 0;
  for (const auto& s : servers_) n += s.has_token() ? 1 : 0;
  return n;
}

}  // namespace spyker::protocol
