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

#include <map>
#include <optional>
#include <set>
#include <vector>

#include "spyker/model/hyperparams.hpp"
#include "spyker/protocol/messages.hpp"

namespace spyker::protocol {

using NodeId = int;

struct Outgoing {
  NodeId dst;
  Message msg;
};
using Outbox = std::vector<Outgoing>;

struct ClientCounters {
  long updates = 0;
  double lr = 0.0;
};

/// One Spyker server. Servers are node ids 0..n_servers-1.
struct ServerState {
  int id = 0;
  int n_servers = 1;
  model::HyperParams hyper;

  SharedModel model;
  Age age = 0.0;
  Age age_prev = 0.0;
  // Highest age this server has ever held; a client can only have been
  // dispatched an age at or below it.
  Age max_age = 0.0;
  std::optional<Age> last_age_broadcast;

  std::map<NodeId, ClientCounters> clients;
  long total_client_updates = 0;

  std::vector<Age> ages;  // last known age of every server
  std::optional<Token> token;
  std::set<std::uint64_t> did_broadcast;
  std::map<std::uint64_t, int> cnt;
  bool ongoing_synchro = false;
  NodeId ring_successor = 0;

  double mean_updates() const;
  bool has_token() const noexcept { return token.has_value(); }
};

/// Builds server `id`. `ring_order` is a permutation of server ids; the token
/// starts at ring_order[0] and travels to the next entry (cyclically).
ServerState server_init(int id, int n_servers, SharedModel initial_model,
                        const std::vector<int>& ring_order, const std::vector<NodeId>& home_clients,
                        const model::HyperParams& hyper);

// Each handler mutates the state and appends the messages it sends.
void on_client_update(ServerState& s, const ClientUpdate& msg, NodeId from, Outbox& out);
void check_synchronization(ServerState& s, Outbox& out);
void on_rcv_age(ServerState& s, const AgeBroadcast& msg, NodeId from, Outbox& out);
void on_rcv_token(ServerState& s, const TokenPass& msg, Outbox& out);
void on_rcv_model(ServerState& s, const ModelBroadcast& msg, NodeId from, Outbox& out);

// Initial dispatch to a home client: current model, age and lr.
ModelDispatch initial_dispatch(const ServerState& s, NodeId client);

}  // namespace spyker::protocol
