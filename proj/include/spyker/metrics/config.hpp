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
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "spyker/model/hyperparams.hpp"
#include "spyker/model/tiny_model.hpp"
#include "spyker/protocol/systems.hpp"
#include "spyker/sim/compute_profile.hpp"
#include "spyker/sim/link_model.hpp"

namespace spyker::metrics {

enum class EvalTarget { kAgeWeighted, kAverage, kBest };

struct TopologyConfig {
  int n_servers = 4;
  int n_clients = 40;
  std::string assignment = "balanced";  // or "explicit"
  std::vector<int> client_counts;       // per server, for "explicit"
  std::vector<std::string> server_locations = {"Hongkong", "Paris", "Sydney", "California"};
  std::string single_server_location = "California";
  std::string cloud_location = "California";
};

struct NetworkConfig {
  std::string latency = "aws";  // "aws", "uniform" (every entry = aws mean) or "custom"
  sim::LatencyMatrix custom;
  double bandwidth_bps = 100e6;
};

struct DatasetConfig {
  std::string kind = "synthetic";  // "synthetic", "mnist", "cifar10-gray"
  // synthetic
  std::size_t n_train = 4000;
  std::size_t n_test = 1000;
  std::size_t dim = 1000;
  int n_classes = 2;
  double separation = 4.0;
  double blob_std = 1.0;
  double offset = 0.0;
  // files; empty means $SPYKER_DATA_DIR/<kind>
  std::string data_dir;
  std::size_t train_limit = 0;  // 0 keeps every sample
  std::size_t test_limit = 0;
};

struct StopConfig {
  double horizon_ms = 60000.0;
  std::optional<double> target_accuracy;
  std::optional<long> max_updates;
};

struct EvalConfig {
  double interval_ms = 100.0;
  EvalTarget target = EvalTarget::kAgeWeighted;
  bool per_server = false;
};

struct MetricsConfig {
  double queue_sample_ms = 0.0;  // 0 disables the queue trace
  double bytes_window_start_ms = 0.0;
  bool trace = false;            // line-delimited handler trace
};

struct ExperimentConfig {
  std::string preset = "desk-synth";
  protocol::Algorithm algorithm = protocol::Algorithm::kSpyker;
  std::uint64_t seed = 1;
  TopologyConfig topology;
  NetworkConfig network;
  DatasetConfig dataset;
  int labels_per_client = 2;
  model::ModelKind model_kind = model::ModelKind::kLogisticRegression;
  std::size_t hidden_dim = 0;
  model::HyperParams hyper;
  bool h_inter_auto = true;  // n_clients / (5 n_servers)
  sim::ComputeProfile compute;
  int hierfavg_period = 5;
  double fedavg_fraction = 1.0;
  bool shared_init = true;
  StopConfig stop;
  EvalConfig eval;
  MetricsConfig metrics;

  // Throws ConfigError naming the offending field.
  void validate() const;
  // Clients per server location, balanced or explicit.
  std::vector<int> clients_per_region() const;
};

EvalTarget parse_eval_target(const std::string& s);
const char* to_string(EvalTarget t);

std::vector<std::string> preset_names();
// Complete JSON document for a preset. Throws ConfigError for unknown names.
nlohmann::json preset_json(const std::string& name);

// Recursively merges `patch` into `base`. Keys absent from `base` are
// rejected so typos surface as config errors.
void merge_into(nlohmann::json& base, const nlohmann::json& patch, const std::string& path = "");

// "a.b.c=value"; value is parsed as JSON when possible, else kept as a string.
void apply_override(nlohmann::json& doc, const std::string& assignment);

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& c);

/// preset (from the file's "preset" key, else `default_preset`) <- file <- overrides.
ExperimentConfig load_config(const std::string& file, const std::vector<std::string>& overrides,
                             const std::string& default_preset = "desk-synth");

}  // namespace spyker::metrics
