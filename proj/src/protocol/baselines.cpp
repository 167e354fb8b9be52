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
#include <cmath>
#include <numeric>

#include "spyker/errors.hpp"
#include "spyker/model/aggregation.hpp"
#include "spyker/protocol/systems.hpp"

namespace spyker::protocol {

namespace {

constexpr int kAggregateTag = 1;
constexpr int kCloudTag = 2;

model::ModelVector weighted_average(const std::map<int, SharedModel>& models, const std::vector<long>& weights) {
  std::vector<model::WeightedModel> in;
  in.reserve(models.size());
  for (const auto& [k, m] : models) in.push_back({m.get(), weights[static_cast<std::size_t>(k)]});
  auto out = model::fedavg_aggregate(in);
  out.require_finite("aggregated model");
  return out;
}

void require_single_server(const SystemConfig& cfg, const char* name) {
  if (cfg.n_servers != 1) throw ConfigError("n_servers", std::string(name) + " runs exactly one server");
}

}  // namespace

// ---- FedAvg

FedAvgSystem::FedAvgSystem(SystemConfig cfg, std::vector<ClientState> clients, std::vector<model::ModelVector> initial_models)
    : FlSystem(std::move(cfg), std::move(clients), std::move(initial_models)), selection_rng_(cfg_.selection_seed) {
  require_single_server(cfg_, "fedavg");
}

void FedAvgSystem::start(sim::Simulator& sim) {
  global_ = share(initial_.front());
  begin_round(sim);
}

void FedAvgSystem::begin_round(sim::Simulator& sim) {
  const int n = cfg_.n_clients();
  selected_.resize(static_cast<std::size_t>(n));
  std::iota(selected_.begin(), selected_.end(), 0);
  if (cfg_.fedavg_fraction < 1.0) {
    fisher_yates(std::span<int>(selected_), selection_rng_);
    const auto m = std::max<long>(1, std::lround(cfg_.fedavg_fraction * n));
    selected_.resize(static_cast<std::size_t>(m));
    std::sort(selected_.begin(), selected_.end());
  }
  received_.clear();
  for (int c : selected_) {
    sim.send(0, cfg_.client_node(c), ModelDispatch{global_, static_cast<Age>(round_), base_lr(client_updates()[static_cast<std::size_t>(c)])});
  }
}

double FedAvgSystem::server_service_time(sim::NodeId, const sim::Envelope&) { return 0.0; }

void FedAvgSystem::handle_at_server(sim::Simulator& sim, sim::NodeId node, sim::Envelope env) {
  const auto* u = std::get_if<ClientUpdate>(&env.msg);
  if (!u || !is_client(env.src)) throw ProtocolViolation("fedavg server expects client updates only");
  const int c = client_index(env.src);
  if (!std::binary_search(selected_.begin(), selected_.end(), c) || !received_.emplace(c, u->model).second) {
    throw ProtocolViolation("unexpected fedavg update");
  }
  count_update(env.src);
  if (received_.size() == selected_.size()) sim.schedule_timer(node, cfg_.compute.fedavg_aggregation_ms, kAggregateTag);
}

void FedAvgSystem::on_timer(sim::Simulator& sim, sim::NodeId, int tag) {
  if (tag != kAggregateTag) return;
  std::vector<long> weights(clients_.size());
  for (std::size_t i = 0; i < clients_.size(); ++i) weights[i] = data_points(static_cast<int>(i));
  global_ = share(weighted_average(received_, weights));
  ++round_;
  begin_round(sim);
}

// ---- FedAsync

FedAsyncSystem::FedAsyncSystem(SystemConfig cfg, std::vector<ClientState> clients, std::vector<model::ModelVector> initial_models)
    : FlSystem(std::move(cfg), std::move(clients), std::move(initial_models)) {
  require_single_server(cfg_, "fedasync");
  for (int i = 0; i < cfg_.n_clients(); ++i) total_data_ += data_points(i);
}

void FedAsyncSystem::start(sim::Simulator& sim) {
  global_ = share(initial_.front());
  sent_model_.assign(clients_.size(), global_);
  sent_version_.assign(clients_.size(), 0);
  for (int c = 0; c < cfg_.n_clients(); ++c) {
    sim.send(0, cfg_.client_node(c), ModelDispatch{global_, 0.0, base_lr(0)});
  }
}

double FedAsyncSystem::server_service_time(sim::NodeId, const sim::Envelope&) {
  return cfg_.compute.fedasync_aggregation_ms;
}

void FedAsyncSystem::handle_at_server(sim::Simulator& sim, sim::NodeId node, sim::Envelope env) {
  const auto* u = std::get_if<ClientUpdate>(&env.msg);
  if (!u || !is_client(env.src)) throw ProtocolViolation("fedasync server expects client updates only");
  const auto c = static_cast<std::size_t>(client_index(env.src));
  const long staleness = version_ - sent_version_[c];
  auto merged = model::fedasync_merge(*global_, *sent_model_[c], *u->model, staleness, data_points(static_cast<int>(c)),
                                      total_data_, cfg_.hyper.alpha_fedasync);
  merged.require_finite("global model after fedasync merge");
  global_ = share(std::move(merged));
  ++version_;
  count_update(env.src);
  sent_model_[c] = global_;
  sent_version_[c] = version_;
  sim.send(node, env.src, ModelDispatch{global_, static_cast<Age>(version_), base_lr(client_updates()[c])});
}

// ---- HierFAVG

HierFavgSystem::HierFavgSystem(SystemConfig cfg, std::vector<ClientState> clients, std::vector<model::ModelVector> initial_models)
    : FlSystem(std::move(cfg), std::move(clients), std::move(initial_models)) {
  edges_.resize(static_cast<std::size_t>(cfg_.n_servers));
  for (int c = 0; c < cfg_.n_clients(); ++c) {
    auto& e = edges_[static_cast<std::size_t>(cfg_.client_home[static_cast<std::size_t>(c)])];
    e.clients.push_back(c);
    e.data += data_points(c);
  }
}

void HierFavgSystem::start(sim::Simulator& sim) {
  cloud_model_ = share(initial_.front());
  for (int e = 0; e < cfg_.n_servers; ++e) {
    edges_[static_cast<std::size_t>(e)].model = share(initial_[static_cast<std::size_t>(e)]);
    begin_edge_round(sim, e);
  }
}

void HierFavgSystem::begin_edge_round(sim::Simulator& sim, int e) {
  auto& edge = edges_[static_cast<std::size_t>(e)];
  edge.received.clear();
  for (int c : edge.clients) {
    sim.send(e, cfg_.client_node(c),
             ModelDispatch{edge.model, static_cast<Age>(edge.rounds), base_lr(client_updates()[static_cast<std::size_t>(c)])});
  }
}

double HierFavgSystem::server_service_time(sim::NodeId, const sim::Envelope&) { return 0.0; }

void HierFavgSystem::handle_at_server(sim::Simulator& sim, sim::NodeId node, sim::Envelope env) {
  const sim::NodeId cloud = cfg_.cloud_node();
  if (node == cloud) {
    const auto* b = std::get_if<ModelBroadcast>(&env.msg);
    if (!b || env.src < 0 || env.src >= cfg_.n_servers) throw ProtocolViolation("cloud expects edge models only");
    cloud_received_.emplace(env.src, b->model);
    long active = 0;
    for (const auto& e : edges_) active += e.clients.empty() ? 0 : 1;
    if (static_cast<long>(cloud_received_.size()) == active) {
      sim.schedule_timer(cloud, cfg_.compute.hierfavg_aggregation_ms, kCloudTag);
    }
    return;
  }
  auto& edge = edges_.at(static_cast<std::size_t>(node));
  if (const auto* b = std::get_if<ModelBroadcast>(&env.msg)) {
    if (env.src != cloud) throw ProtocolViolation("edge got a model from another edge");
    edge.model = b->model;
    begin_edge_round(sim, node);
    return;
  }
  const auto* u = std::get_if<ClientUpdate>(&env.msg);
  if (!u || !is_client(env.src)) throw ProtocolViolation("unexpected message at an edge");
  const int c = client_index(env.src);
  if (cfg_.client_home[static_cast<std::size_t>(c)] != node || !edge.received.emplace(c, u->model).second) {
    throw ProtocolViolation("unexpected hierfavg update");
  }
  count_update(env.src);
  if (edge.received.size() == edge.clients.size()) {
    sim.schedule_timer(node, cfg_.compute.hierfavg_aggregation_ms, kAggregateTag);
  }
}

void HierFavgSystem::on_timer(sim::Simulator& sim, sim::NodeId node, int tag) {
  const sim::NodeId cloud = cfg_.cloud_node();
  if (tag == kCloudTag && node == cloud) {
    std::vector<long> weights;
    for (const auto& e : edges_) weights.push_back(e.data);
    cloud_model_ = share(weighted_average(cloud_received_, weights));
    cloud_received_.clear();
    ++cloud_round_;
    for (int e = 0; e < cfg_.n_servers; ++e) {
      if (!edges_[static_cast<std::size_t>(e)].clients.empty()) {
        sim.send(cloud, e, ModelBroadcast{cloud_model_, 0.0, cloud_round_});
      }
    }
    return;
  }
  if (tag != kAggregateTag) return;
  auto& edge = edges_.at(static_cast<std::size_t>(node));
  std::vector<long> weights(clients_.size());
  for (std::size_t i = 0; i < clients_.size(); ++i) weights[i] = data_points(static_cast<int>(i));
  edge.model = share(weighted_average(edge.received, weights));
  ++edge.rounds;
  if (edge.rounds % static_cast<std::uint64_t>(cfg_.hierfavg_period) == 0) {
    sim.send(node, cloud, ModelBroadcast{edge.model, 0.0, edge.rounds});
  } else {
    begin_edge_round(sim, node);
  }
}

std::vector<SharedModel> HierFavgSystem::server_models() const {
  std::vector<SharedModel> out;
  for (const auto& e : edges_) out.push_back(e.model);
  return out;
}

}  // namespace spyker::protocol
