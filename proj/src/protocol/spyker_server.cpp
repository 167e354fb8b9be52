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

#include "spyker/protocol/spyker_server.hpp"

#include <algorithm>
#include <string>

#include "spyker/errors.hpp"
#include "spyker/model/aggregation.hpp"

namespace spyker::protocol {

namespace {

std::vector<Age> age_view(const ServerState& s) {
  std::vector<Age> v = s.ages;
  v[static_cast<std::size_t>(s.id)] = s.age;
  return v;
}

void broadcast(const ServerState& s, const Message& m, Outbox& out) {
  for (int j = 0; j < s.n_servers; ++j) {
    if (j != s.id) out.push_back({j, m});
  }
}

void merge_age(ServerState& s, NodeId from, Age a) {
  if (from < 0 || from >= s.n_servers) {
    throw ProtocolViolation("server message from non-server node " + std::to_string(from));
  }
  auto& slot = s.ages[static_cast<std::size_t>(from)];
  slot = std::max(slot, a);
}

}  // namespace

double ServerState::mean_updates() const {
  if (clients.empty()) return 0.0;
  return static_cast<double>(total_client_updates) / static_cast<double>(clients.size());
}

ServerState server_init(int id, int n_servers, SharedModel initial_model,
                        const std::vector<int>& ring_order, const std::vector<NodeId>& home_clients,
                        const model::HyperParams& hyper) {
  if (n_servers < 1) throw ConfigError("n_servers", "must be >= 1");
  if (id < 0 || id >= n_servers) throw ConfigError("n_servers", "server id out of range");
  if (static_cast<int>(ring_order.size()) != n_servers) {
    throw ConfigError("ring", "ring order must list every server once");
  }
  std::vector<int> sorted = ring_order;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < n_servers; ++i) {
    if (sorted[static_cast<std::size_t>(i)] != i) throw ConfigError("ring", "ring order has duplicate or unknown ids");
  }
  if (!initial_model) throw InvalidInput("server_init: no initial model");

  ServerState s;
  s.id = id;
  s.n_servers = n_servers;
  s.hyper = hyper;
  s.model = std::move(initial_model);
  s.ages.assign(static_cast<std::size_t>(n_servers), 0.0);
  const double lr0 = model::base_learning_rate(hyper.base_schedule, hyper.eta_init, 0);
  for (NodeId c : home_clients) {
    if (!s.clients.emplace(c, ClientCounters{0, lr0}).second) {
      throw ConfigError("clients", "client " + std::to_string(c) + " listed twice");
    }
  }
  const auto pos = static_cast<std::size_t>(std::find(ring_order.begin(), ring_order.end(), id) - ring_order.begin());
  s.ring_successor = ring_order[(pos + 1) % ring_order.size()];
  if (ring_order.front() == id) s.token = Token{1, std::vector<Age>(static_cast<std::size_t>(n_servers), 0.0)};
  return s;
}

ModelDispatch initial_dispatch(const ServerState& s, NodeId client) {
  auto it = s.clients.find(client);
  if (it == s.clients.end()) throw ProtocolViolation("dispatch to a client of another server");
  return {s.model, s.age, it->second.lr};
}

void on_client_update(ServerState& s, const ClientUpdate& msg, NodeId from, Outbox& out) {
  auto it = s.clients.find(from);
  if (it == s.clients.end()) {
    throw ProtocolViolation("server " + std::to_string(s.id) + " got an update from foreign client " +
                            std::to_string(from));
  }
  if (msg.sent_age > s.max_age) {
    throw ProtocolViolation("client update carries an age this server never had");
  }
  // A server-server merge may have pulled A_i below the age the client saw.
  // Such an update is treated as fresh.
  const double weight = model::client_staleness_weight(std::max(s.age, msg.sent_age), msg.sent_age,
                                                       s.hyper.staleness_mode);
  model::ModelVector merged = model::spyker_client_merge(*s.model, *msg.model, weight, s.hyper.eta_server);
  merged.require_finite("server model after client update");
  s.model = share(std::move(merged));
  s.age += 1.0;
  s.max_age = std::max(s.max_age, s.age);

  auto& c = it->second;
  ++c.updates;
  ++s.total_client_updates;
  const double base = model::base_learning_rate(s.hyper.base_schedule, s.hyper.eta_init, c.updates);
  c.lr = s.hyper.decay_enabled
             ? model::decay(base, c.updates, s.mean_updates(), s.hyper.beta, s.hyper.eta_min)
             : base;
  out.push_back({from, ModelDispatch{s.model, s.age, c.lr}});
  check_synchronization(s, out);
}

void check_synchronization(ServerState& s, Outbox& out) {
  if (s.n_servers < 2) return;
  const auto view = age_view(s);
  const auto [lo, hi] = std::minmax_element(view.begin(), view.end());
  const bool triggered = (*hi - *lo >= s.hyper.h_inter) || (s.age - s.age_prev >= s.hyper.h_intra);
  if (!triggered) return;

  if (s.token) {
    if (s.ongoing_synchro) return;
    const std::uint64_t bid = s.token->bid;
    s.age_prev = s.age;
    s.ongoing_synchro = true;
    broadcast(s, ModelBroadcast{s.model, s.age, bid}, out);
    s.did_broadcast.insert(bid);
    s.cnt[bid] = 1;
    return;
  }
  if (s.last_age_broadcast && s.age < *s.last_age_broadcast + 1.0) return;
  s.last_age_broadcast = s.age;
  broadcast(s, AgeBroadcast{s.age}, out);
}

void on_rcv_age(ServerState& s, const AgeBroadcast& msg, NodeId from, Outbox& out) {
  merge_age(s, from, msg.age);
  check_synchronization(s, out);
}

void on_rcv_token(ServerState& s, const TokenPass& msg, Outbox& out) {
  if (s.token) throw ProtocolViolation("server " + std::to_string(s.id) + " received a second token");
  if (msg.token.ages.size() != s.ages.size()) throw ProtocolViolation("token ages vector has the wrong size");
  for (std::size_t j = 0; j < s.ages.size(); ++j) s.ages[j] = std::max(s.ages[j], msg.token.ages[j]);
  s.token = msg.token;
  s.token->bid += 1;
  check_synchronization(s, out);
}

void on_rcv_model(ServerState& s, const ModelBroadcast& msg, NodeId from, Outbox& out) {
  merge_age(s, from, msg.age);
  if (s.did_broadcast.insert(msg.bid).second) {
    s.age_prev = s.age;
    broadcast(s, ModelBroadcast{s.model, s.age, msg.bid}, out);
  }
  auto merged = model::server_merge(*s.model, s.age, *msg.model, msg.age, s.hyper.eta_a, s.hyper.phi);
  merged.model.require_finite("server model after server merge");
  s.model = share(std::move(merged.model));
  s.age = merged.age;

  if (s.token && s.token->bid == msg.bid) {
    if (++s.cnt[msg.bid] == s.n_servers) {
      s.token->ages = age_view(s);
      out.push_back({s.ring_successor, TokenPass{std::move(*s.token)}});
      s.token.reset();
      s.cnt.erase(msg.bid);
      s.ongoing_synchro = false;
    }
  }
}

}  // namespace spyker::protocol
