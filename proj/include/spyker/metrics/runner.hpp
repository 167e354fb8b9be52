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
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "spyker/data/dataset.hpp"
#include "spyker/metrics/config.hpp"
#include "spyker/protocol/systems.hpp"
#include "spyker/sim/manifest.hpp"
#include "spyker/sim/simulator.hpp"

namespace spyker::metrics {

struct Row {
  double sim_time_ms = 0.0;
  long updates_processed = 0;
  double accuracy = 0.0;
  std::vector<double> server_accuracy;  // only when eval.per_server
  std::vector<std::size_t> queue;       // per server, at the eval instant
};

struct QueueSample {
  double sim_time_ms = 0.0;
  std::vector<std::size_t> queue;
};

struct Summary {
  std::optional<double> time_to_90;
  std::optional<double> time_to_95;
  std::optional<long> updates_to_90;
  std::optional<double> target_accuracy;
  std::optional<double> time_to_target;
  std::optional<long> updates_to_target;
  double final_accuracy = 0.0;
  double end_time_ms = 0.0;
  long updates_processed = 0;
  std::uint64_t events = 0;
  bool early_stop = false;
  std::uint64_t bytes_server_server = 0;
  std::uint64_t bytes_server_client = 0;
  std::uint64_t messages_server_server = 0;
  std::uint64_t messages_server_client = 0;
  std::vector<std::size_t> peak_queue;  // per server
  std::string trace_hash;
};

struct MetricsFrame {
  std::string algorithm;
  int n_servers = 0;
  std::vector<Row> rows;
  std::vector<QueueSample> queue_samples;
  std::vector<long> client_updates;
  std::vector<int> client_home;   // region (server location index) per client
  std::vector<double> client_delay_ms;
  Summary summary;
};

struct RunOutput {
  MetricsFrame frame;
  sim::RunManifest manifest;
};

struct RunOptions {
  // Line-delimited handler trace destination; empty disables it.
  std::filesystem::path trace_path;
  // Log one line per run to stderr.
  bool verbose = false;
  // Test and audit hooks. observer runs after every simulated event, tracer
  // right before each message is handled, on_finish once after the run.
  std::function<void(const sim::Simulator&, const protocol::FlSystem&)> observer;
  std::function<void(const sim::Envelope&)> tracer;
  std::function<void(const sim::Simulator&, const protocol::FlSystem&)> on_finish;
};

// Train/test split for a config; file-backed datasets are cached per process.
struct DataSplit {
  std::shared_ptr<const data::Dataset> train;
  std::shared_ptr<const data::Dataset> test;
};
DataSplit load_data(const ExperimentConfig& c);

// Root for dataset files: $SPYKER_DATA_DIR, else /root/data.
std::filesystem::path data_root();

RunOutput run_experiment(const ExperimentConfig& c, const RunOptions& opts = {});

// First-crossing summaries computed from eval rows.
std::optional<double> time_to(const std::vector<Row>& rows, double threshold);
std::optional<long> updates_to(const std::vector<Row>& rows, double threshold);

// ---- files

void write_outputs(const std::filesystem::path& dir, const RunOutput& out);
void write_timeseries_csv(const std::filesystem::path& file, const MetricsFrame& f);
std::vector<Row> read_timeseries_csv(const std::filesystem::path& file);
void write_queues_csv(const std::filesystem::path& file, const MetricsFrame& f);
void write_clients_csv(const std::filesystem::path& file, const MetricsFrame& f);
nlohmann::json summary_to_json(const MetricsFrame& f);
Summary summary_from_json(const nlohmann::json& j);

// Shortest text that parses back to the same double.
std::string format_double(double v);

}  // namespace spyker::metrics
