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

#include "spyker/protocol/systems.hpp"

#include <string>

#include "spyker/errors.hpp"
#include "spyker/model/aggregation.hpp"

namespace spyker::protocol {

Algorithm parse_algorithm(const std::string& s) {
  if (s == "spyker") return Algorithm::kSpyker;
  if (s == "sync-spyker") return Algorithm::kSyncSpyker;
  if (s == "fedavg") return Algorithm::kFedAvg;
  if (s == "fedasync") return Algorithm::kFedAsync;
  if (s == "hierfavg") return Algorithm::kHierFavg;
  throw ConfigError("algorithm", "unknown algorithm '" + s + "'");
}

const char* to_string(Algorithm a) {
  switch (a) {
    case Algorithm::kSpyker: return "spyker";
    case Algorithm::kSyncSpyker: return "sync-spyker";
    case Algorithm::kFedAvg: return "fedavg";
    case Algorithm::kFedAsync: return "fedasync";
    case Algorithm::kHierFavg: return "hierfavg";
  }
  return "unknown";
}

bool is_single_server(Algorithm a) { return a == Algorithm::kFedAvg || a == Algorithm::kFedAsync; }

bool is_asynchronous(Algorithm a) { return a == Algorithm::kSpyker || a == Algorithm::kFedAsync; }

void SystemConfig::validate() const {
  if (n_servers < 1) throw ConfigError("n_servers", "must be >= 1");
  for (int h : client_home) {
    if (h < 0 || h >= n_servers) throw ConfigError("clients", "client assigned to unknown server " + std::to_string(h));
  }
  if (hierfavg_period < 1) throw ConfigError("hierfavg_period", "must be >= 1");
  if (!(fedavg_fraction > 0.0 && fedavg_fraction <= 1.0)) throw ConfigError("fedavg_fraction", "must lie in (0, 1]");
  hyper.validate();
  compute.validate();
}

FlSystem::FlSystem(SystemConfig cfg, std::vector<ClientState> clients, std::vector<model::ModelVector> initial_models)
    : cfg_(std::move(cfg)), clients_(std::move(clients)), initial_(std::move(initial_models)) {
  cfg_.validate();
  if (static_cast<int>(clients_.size()) != cfg_.n_clients()) {
    throw ConfigError("clients", "client states do not match the client assignment");
  }
  for (int i = 0; i < cfg_.n_clients(); ++i) {
    auto& c = clients_[static_cast<std::size_t>(i)];
    if (c.home_server != cfg_.client_home[static_cast<std::size_t>(i)]) {
      throw ConfigError("clients", "client " + std::to_string(i) + " home server disagrees with the assignment");
    }
    if (c.data.empty()) throw ConfigError("partition", "client " + std::to_string(i) + " has no data");
  }
  if (initial_.size() == 1) initial_.resize(static_cast<std::size_t>(cfg_.n_servers), initial_.front());
  if (static_cast<int>(initial_.size()) != cfg_.n_servers) {
    throw ConfigError("init", "need one shared initial model or one per server");
  }
  client_updates_.assign(clients_.size(), 0);
}

std::vector<Age> FlSystem::server_ages() const { return std::vector<Age>(server_models().size(), 0.0); }

std::vector<sim::NodeId> FlSystem::server_nodes() const {
  std::vector<sim::NodeId> out;
  for (int i = 0; i < cfg_.n_servers; ++i) out.push_back(i);
  return out;
}

void FlSystem::count_update(sim::NodeId client_node) {
  ++updates_processed_;
  ++client_updates_[static_cast<std::size_t>(client_index(client_node))];
}

double FlSystem::base_lr(long updates) const {
  return model::base_learning_rate(cfg_.hyper.base_schedule, cfg_.hyper.eta_init, updates);
}

double FlSystem::service_time(sim::NodeId node, const sim::Envelope& env) {
  return is_client(node) ? 0.0 : server_service_time(node, env);
}

void FlSystem::handle(sim::Simulator& sim, sim::NodeId node, sim::Envelope env) {
  if (!is_client(node)) {
    handle_at_server(sim, node, std::move(env));
    return;
  }
  const auto* d = std::get_if<ModelDispatch>(&env.msg);
  if (!d) throw ProtocolViolation("client received a non-dispatch message");
  auto& c = clients_[static_cast<std::size_t>(client_index(node))];
  auto r = client_handle_dispatch(c, *d, env.src);
  sim.send(node, env.src, std::move(r.update), r.duration_ms);
}

model::ModelVector age_weighted_average(const std::vector<SharedModel>& models, const std::vector<Age>& ages) {
  if (models.empty()) throw InvalidInput("age_weighted_average: no models");
  if (ages.size() != models.size()) throw InvalidInput("age_weighted_average: ages/models size mismatch");
  double total = 0.0;
  for (Age a : ages) total += a;
  model::ModelVector out(models.front()->dim(), 0.0);
  for (std::size_t i = 0; i < models.size(); ++i) {
    const double w = total > 0.0 ? ages[i] / total : 1.0 / static_cast<double>(models.size());
    out.axpy(w, *models[i]);
  }
  return out;
}

std::unique_ptr<FlSystem> make_system(Algorithm a, SystemConfig cfg, std::vector<ClientState> clients,
                                      std::vector<model::ModelVector> initial_models) {
  switch (a) {
    case Algorithm::kSpyker:
      return std::make_unique<SpykerSystem>(std::move(cfg), std::move(clients), std::move(initial_models));
    case Algorithm::kSyncSpyker:
      return std::make_unique<SyncSpykerSystem>(std::move(cfg), std::move(clients), std::move(initial_models));
    case Algorithm::kFedAvg:
      return std::make_unique<FedAvgSystem>(std::move(cfg), std::move(clients), std::move(initial_models));
    case Algorithm::kFedAsync:
      return std::make_unique<FedAsyncSystem>(std::move(cfg), std::move(clients), std::move(initial_models));
    case Algorithm::kHierFavg:
      return std::make_unique<HierFavgSystem>(std::move(cfg), std::move(clients), std::move(initial_models));
  }
  throw ConfigError("algorithm", "unknown algorithm");
}

}  // namespace spyker::protocol
