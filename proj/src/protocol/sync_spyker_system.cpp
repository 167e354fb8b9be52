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

#include <algorithm>

#include "spyker/errors.hpp"
#include "spyker/model/aggregation.hpp"
#include "spyker/protocol/systems.hpp"

namespace spyker::protocol {

namespace {
constexpr int kFinalizeTag = 1;
}

void SyncSpykerSystem::start(sim::Simulator& sim) {
  servers_.assign(static_cast<std::size_t>(cfg_.n_servers), Server{});
  const double lr0 = base_lr(0);
  for (int i = 0; i < cfg_.n_servers; ++i) servers_[static_cast<std::size_t>(i)].model = share(initial_[static_cast<std::size_t>(i)]);
  for (int c = 0; c < cfg_.n_clients(); ++c) {
    auto& s = servers_[static_cast<std::size_t>(cfg_.client_home[static_cast<std::size_t>(c)])];
    s.clients.emplace(cfg_.client_node(c), ClientCounters{0, lr0});
  }
  for (int i = 0; i < cfg_.n_servers; ++i) {
    const auto& s = servers_[static_cast<std::size_t>(i)];
    for (const auto& [client, counters] : s.clients) sim.send(i, client, ModelDispatch{s.model, s.age, counters.lr});
  }
}

double SyncSpykerSystem::server_service_time(sim::NodeId node, const sim::Envelope& env) {
  const auto& s = servers_.at(static_cast<std::size_t>(node));
  if (kind_of(env.msg) == MessageKind::kClientUpdate && !s.in_sync) return cfg_.compute.sync_spyker_aggregation_ms;
  return 0.0;
}

void SyncSpykerSystem::handle_at_server(sim::Simulator& sim, sim::NodeId node, sim::Envelope env) {
  auto& s = servers_.at(static_cast<std::size_t>(node));
  if (const auto* u = std::get_if<ClientUpdate>(&env.msg)) {
    auto it = s.clients.find(env.src);
    if (it == s.clients.end()) throw ProtocolViolation("update from a client of another server");
    if (s.in_sync) {
      s.buffered.push_back(std::move(env));
      ++buffered_total_;
      return;
    }
    const double w = model::client_staleness_weight(std::max(s.age, u->sent_age), u->sent_age,
                                                    cfg_.hyper.staleness_mode);
    auto merged = model::spyker_client_merge(*s.model, *u->model, w, cfg_.hyper.eta_server);
    merged.require_finite("server model after client update");
    s.model = share(std::move(merged));
    s.age += 1.0;
    auto& c = it->second;
    ++c.updates;
    ++s.total_client_updates;
    const double base = base_lr(c.updates);
    const double mean = static_cast<double>(s.total_client_updates) / static_cast<double>(s.clients.size());
    c.lr = cfg_.hyper.decay_enabled ? model::decay(base, c.updates, mean, cfg_.hyper.beta, cfg_.hyper.eta_min) : base;
    count_update(env.src);
    sim.send(node, env.src, ModelDispatch{s.model, s.age, c.lr});
    if (cfg_.n_servers > 1 && s.age - s.age_prev >= cfg_.hyper.h_intra) begin_round(sim, node);
    return;
  }
  const auto* b = std::get_if<ModelBroadcast>(&env.msg);
  if (!b || env.src < 0 || env.src >= cfg_.n_servers) throw ProtocolViolation("unexpected message at a server");
  if (b->bid <= s.round) throw ProtocolViolation("model for an already completed round");
  s.received[b->bid].emplace(env.src, *b);
  if (!s.in_sync && b->bid == s.round + 1) begin_round(sim, node);
  maybe_finalize(sim, node);
}

void SyncSpykerSystem::begin_round(sim::Simulator& sim, int id) {
  auto& s = servers_[static_cast<std::size_t>(id)];
  s.in_sync = true;
  s.snapshot = s.model;
  s.snapshot_age = s.age;
  for (int j = 0; j < cfg_.n_servers; ++j) {
    if (j != id) sim.send(id, j, ModelBroadcast{s.snapshot, s.snapshot_age, s.round + 1});
  }
  maybe_finalize(sim, id);
}

void SyncSpykerSystem::maybe_finalize(sim::Simulator& sim, int id) {
  auto& s = servers_[static_cast<std::size_t>(id)];
  if (!s.in_sync || s.finalizing) return;
  auto it = s.received.find(s.round + 1);
  if (it == s.received.end() || static_cast<int>(it->second.size()) != cfg_.n_servers - 1) return;

  // Every server folds the same n models in ascending id order, starting
  // from the lowest id, so all of them end with the same bits.
  std::vector<std::pair<SharedModel, Age>> ordered;
  for (int j = 0; j < cfg_.n_servers; ++j) {
    if (j == id) {
      ordered.emplace_back(s.snapshot, s.snapshot_age);
    } else {
      const auto& m = it->second.at(j);
      ordered.emplace_back(m.model, m.age);
    }
  }
  model::ModelVector w = *ordered.front().first;
  Age a = ordered.front().second;
  for (std::size_t j = 1; j < ordered.size(); ++j) {
    auto merged = model::server_merge(w, a, *ordered[j].first, ordered[j].second, cfg_.hyper.eta_a, cfg_.hyper.phi);
    w = std::move(merged.model);
    a = merged.age;
  }
  w.require_finite("server model after synchronization");
  s.pending_model = share(std::move(w));
  s.pending_age = a;
  s.finalizing = true;
  sim.schedule_timer(id, static_cast<double>(cfg_.n_servers - 1) * cfg_.compute.sync_spyker_aggregation_ms,
                     kFinalizeTag);
}

void SyncSpykerSystem::on_timer(sim::Simulator& sim, sim::NodeId node, int tag) {
  if (tag != kFinalizeTag) return;
  auto& s = servers_.at(static_cast<std::size_t>(node));
  s.model = std::move(s.pending_model);
  s.age = s.pending_age;
  s.age_prev = s.age;
  ++s.round;
  s.received.erase(s.round);
  s.in_sync = false;
  s.finalizing = false;
  s.snapshot.reset();

  auto [slot, first] = round_result_.try_emplace(s.round, s.model, s.age);
  if (first) {
    ++completed_rounds_;
  } else if (!(*slot->second.first == *s.model) || slot->second.second != s.age) {
    ++mismatched_rounds_;
  }

  sim.requeue_front(node, std::move(s.buffered));
  s.buffered.clear();
  if (s.received.count(s.round + 1)) begin_round(sim, node);
}

std::vector<SharedModel> SyncSpykerSystem::server_models() const {
  std::vector<SharedModel> out;
  for (const auto& s : servers_) out.push_back(s.model);
  return out;
}

std::vector<std::uint64_t> SyncSpykerSystem::server_rounds() const {
  std::vector<std::uint64_t> out;
  for (const auto& s : servers_) out.push_back(s.round);
  return out;
}

std::vector<Age> SyncSpykerSystem::server_ages() const {
  std::vector<Age> out;
  for (const auto& s : servers_) out.push_back(s.age);
  return out;
}

SharedModel SyncSpykerSystem::system_model() const {
  if (servers_.empty()) return share(initial_.front());
  if (servers_.size() == 1) return servers_.front().model;
  return share(age_weighted_average(server_models(), server_ages()));
}

}  // namespace spyker::protocol
