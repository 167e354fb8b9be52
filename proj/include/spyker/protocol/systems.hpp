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
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "spyker/model/hyperparams.hpp"
#include "spyker/protocol/client.hpp"
#include "spyker/protocol/spyker_server.hpp"
#include "spyker/sim/compute_profile.hpp"
#include "spyker/sim/simulator.hpp"

namespace spyker::protocol {

enum class Algorithm { kSpyker, kSyncSpyker, kFedAvg, kFedAsync, kHierFavg };

Algorithm parse_algorithm(const std::string& s);
const char* to_string(Algorithm a);
// Algorithms that run a single server regardless of the configured count.
bool is_single_server(Algorithm a);
bool is_asynchronous(Algorithm a);

/// Node layout shared by every system: servers are 0..n_servers-1, client i
/// is node n_servers + i, the HierFAVG cloud (if any) is the last node.
struct SystemConfig {
  int n_servers = 1;
  std::vector<int> client_home;  // server index for each client
  model::HyperParams hyper;
  sim::ComputeProfile compute;
  std::vector<int> ring_order;   // Spyker token ring
  int hierfavg_period = 5;       // edge rounds per cloud round
  double fedavg_fraction = 1.0;  // clients selected per FedAvg round
  std::uint64_t selection_seed = 0;

  int n_clients() const noexcept { return static_cast<int>(client_home.size()); }
  sim::NodeId client_node(int i) const noexcept { return n_servers + i; }
  sim::NodeId cloud_node() const noexcept { return n_servers + n_clients(); }
  void validate() const;
};

/// Common driver surface: client behaviour, update bookkeeping and the models
/// the metrics layer evaluates.
class FlSystem : public sim::Process {
 public:
  FlSystem(SystemConfig cfg, std::vector<ClientState> clients, std::vector<model::ModelVector> initial_models);

  virtual Algorithm algorithm() const = 0;
  // One model per server (per edge for HierFAVG).
  virtual std::vector<SharedModel> server_models() const = 0;
  virtual std::vector<Age> server_ages() const;
  // The model whose accuracy is reported for the whole system.
  virtual SharedModel system_model() const = 0;

  long updates_processed() const noexcept { return updates_processed_; }
  const std::vector<long>& client_updates() const noexcept { return client_updates_; }
  const SystemConfig& config() const noexcept { return cfg_; }
  const std::vector<ClientState>& clients() const noexcept { return clients_; }
  std::vector<sim::NodeId> server_nodes() const;

  double service_time(sim::NodeId node, const sim::Envelope& env) override;
  void handle(sim::Simulator& sim, sim::NodeId node, sim::Envelope env) override;

 protected:
  bool is_client(sim::NodeId n) const noexcept { return n >= cfg_.n_servers && n < cfg_.cloud_node(); }
  int client_index(sim::NodeId n) const noexcept { return n - cfg_.n_servers; }
  // Counts a client update that a server has absorbed.
  void count_update(sim::NodeId client_node);
  // Initial learning rate for a client with `updates` updates, before decay.
  double base_lr(long updates) const;
  long data_points(int client) const { return static_cast<long>(clients_[static_cast<std::size_t>(client)].data.size()); }

  virtual double server_service_time(sim::NodeId node, const sim::Envelope& env) = 0;
  virtual void handle_at_server(sim::Simulator& sim, sim::NodeId node, sim::Envelope env) = 0;

  SystemConfig cfg_;
  std::vector<ClientState> clients_;
  std::vector<model::ModelVector> initial_;

 private:
  long updates_processed_ = 0;
  std::vector<long> client_updates_;
};

// Age-weighted mean of server models; the plain mean when all ages are 0.
model::ModelVector age_weighted_average(const std::vector<SharedModel>& models, const std::vector<Age>& ages);

class SpykerSystem : public FlSystem {
 public:
  struct Audit {
    std::uint64_t token_passes = 0;
    // Passes where the holder had not received n-1 broadcasts of its bid.
    std::uint64_t early_passes = 0;
    // (server, bid) pairs that broadcast more than once.
    std::uint64_t duplicate_broadcasts = 0;
    std::uint64_t synchronizations = 0;
  };

  using FlSystem::FlSystem;
  Algorithm algorithm() const override { return Algorithm::kSpyker; }
  void start(sim::Simulator& sim) override;
  std::vector<SharedModel> server_models() const override;
  std::vector<Age> server_ages() const override;
  SharedModel system_model() const override;

  const std::vector<ServerState>& servers() const noexcept { return servers_; }
  int token_holders() const;
  const Audit& audit() const noexcept { return audit_; }

 protected:
  double server_service_time(sim::NodeId node, const sim::Envelope& env) override;
  void handle_at_server(sim::Simulator& sim, sim::NodeId node, sim::Envelope env) override;

 private:
  void emit(sim::Simulator& sim, sim::NodeId node, Outbox& out);

  std::vector<ServerState> servers_;
  Audit audit_;
  std::map<std::pair<int, std::uint64_t>, int> broadcasts_;
  std::map<std::pair<int, std::uint64_t>, int> received_;
};

class SyncSpykerSystem : public FlSystem {
 public:
  using FlSystem::FlSystem;
  Algorithm algorithm() const override { return Algorithm::kSyncSpyker; }
  void start(sim::Simulator& sim) override;
  void on_timer(sim::Simulator& sim, sim::NodeId node, int tag) override;
  std::vector<SharedModel> server_models() const override;
  std::vector<Age> server_ages() const override;
  SharedModel system_model() const override;

  std::uint64_t completed_rounds() const noexcept { return completed_rounds_; }
  // Rounds in which some server finished with a model or age that differed
  // bitwise from the first server to finish that round.
  std::uint64_t mismatched_rounds() const noexcept { return mismatched_rounds_; }
  std::uint64_t buffered_total() const noexcept { return buffered_total_; }
  // Last completed exchange round of every server.
  std::vector<std::uint64_t> server_rounds() const;

 protected:
  double server_service_time(sim::NodeId node, const sim::Envelope& env) override;
  void handle_at_server(sim::Simulator& sim, sim::NodeId node, sim::Envelope env) override;

 private:
  struct Server {
    SharedModel model;
    Age age = 0.0;
    Age age_prev = 0.0;
    std::map<sim::NodeId, ClientCounters> clients;
    long total_client_updates = 0;
    std::uint64_t round = 0;  // last completed round
    bool in_sync = false;
    bool finalizing = false;
    SharedModel snapshot;
    Age snapshot_age = 0.0;
    std::map<std::uint64_t, std::map<int, ModelBroadcast>> received;  // round -> peer -> model
    std::vector<sim::Envelope> buffered;
    SharedModel pending_model;
    Age pending_age = 0.0;
  };
  void begin_round(sim::Simulator& sim, int id);
  void maybe_finalize(sim::Simulator& sim, int id);

  std::vector<Server> servers_;
  std::map<std::uint64_t, std::pair<SharedModel, Age>> round_result_;
  std::uint64_t completed_rounds_ = 0;
  std::uint64_t mismatched_rounds_ = 0;
  std::uint64_t buffered_total_ = 0;
};

class FedAvgSystem : public FlSystem {
 public:
  FedAvgSystem(SystemConfig cfg, std::vector<ClientState> clients, std::vector<model::ModelVector> initial_models);
  Algorithm algorithm() const override { return Algorithm::kFedAvg; }
  void start(sim::Simulator& sim) override;
  void on_timer(sim::Simulator& sim, sim::NodeId node, int tag) override;
  std::vector<SharedModel> server_models() const override { return {global_}; }
  SharedModel system_model() const override { return global_; }
  std::uint64_t rounds() const noexcept { return round_; }

 protected:
  double server_service_time(sim::NodeId node, const sim::Envelope& env) override;
  void handle_at_server(sim::Simulator& sim, sim::NodeId node, sim::Envelope env) override;

 private:
  void begin_round(sim::Simulator& sim);

  SharedModel global_;
  std::uint64_t round_ = 0;
  Rng selection_rng_;
  std::vector<int> selected_;
  std::map<int, SharedModel> received_;
};

class FedAsyncSystem : public FlSystem {
 public:
  FedAsyncSystem(SystemConfig cfg, std::vector<ClientState> clients, std::vector<model::ModelVector> initial_models);
  Algorithm algorithm() const override { return Algorithm::kFedAsync; }
  void start(sim::Simulator& sim) override;
  std::vector<SharedModel> server_models() const override { return {global_}; }
  std::vector<Age> server_ages() const override { return {static_cast<Age>(version_)}; }
  SharedModel system_model() const override { return global_; }

 protected:
  double server_service_time(sim::NodeId node, const sim::Envelope& env) override;
  void handle_at_server(sim::Simulator& sim, sim::NodeId node, sim::Envelope env) override;

 private:
  SharedModel global_;
  long version_ = 0;
  long total_data_ = 0;
  std::vector<SharedModel> sent_model_;
  std::vector<long> sent_version_;
};

class HierFavgSystem : public FlSystem {
 public:
  HierFavgSystem(SystemConfig cfg, std::vector<ClientState> clients, std::vector<model::ModelVector> initial_models);
  Algorithm algorithm() const override { return Algorithm::kHierFavg; }
  void start(sim::Simulator& sim) override;
  void on_timer(sim::Simulator& sim, sim::NodeId node, int tag) override;
  std::vector<SharedModel> server_models() const override;
  SharedModel system_model() const override { return cloud_model_; }
  std::uint64_t cloud_rounds() const noexcept { return cloud_round_; }

 protected:
  double server_service_time(sim::NodeId node, const sim::Envelope& env) override;
  void handle_at_server(sim::Simulator& sim, sim::NodeId node, sim::Envelope env) override;

 private:
  struct Edge {
    SharedModel model;
    std::vector<int> clients;
    long data = 0;
    std::uint64_t rounds = 0;
    std::map<int, SharedModel> received;
  };
  void begin_edge_round(sim::Simulator& sim, int e);

  std::vector<Edge> edges_;
  SharedModel cloud_model_;
  std::map<int, SharedModel> cloud_received_;
  std::uint64_t cloud_round_ = 0;
};

std::unique_ptr<FlSystem> make_system(Algorithm a, SystemConfig cfg, std::vector<ClientState> clients,
                                      std::vector<model::ModelVector> initial_models);

}  // namespace spyker::protocol
