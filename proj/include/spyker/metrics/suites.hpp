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

#include <filesystem>
#include <optional>
#include <vector>

#include "spyker/metrics/runner.hpp"

namespace spyker::metrics {

// Median where nullopt means "never reached" and sorts above every value.
// Returns nullopt when the median itself is unreached.
std::optional<double> median(std::vector<std::optional<double>> values);

// Seeds base.seed, base.seed + 1, ...
std::vector<std::uint64_t> suite_seeds(const ExperimentConfig& base, int n_seeds);

struct ScalabilityCell {
  protocol::Algorithm algorithm;
  int n_clients = 0;
  std::vector<std::optional<double>> times;
  std::vector<std::optional<double>> updates;
  std::optional<double> median_time;
  std::optional<double> median_updates;
  std::optional<double> time_multiplier;    // vs. the first count
  std::optional<double> update_multiplier;
};

/// Runs every (algorithm, client count, seed) cell to `target` and reports
/// medians and multipliers relative to counts.front().
std::vector<ScalabilityCell> scalability_suite(const ExperimentConfig& base, const std::vector<int>& counts,
                                               const std::vector<protocol::Algorithm>& algorithms, int n_seeds,
                                               double target, const std::filesystem::path& out_dir = {});

/// One run with queue sampling on (every `sample_ms` when the config has none).
RunOutput queue_trace(ExperimentConfig c, double sample_ms = 50.0, const std::filesystem::path& out_dir = {});

/// One run; per-client update counts are in frame.client_updates.
RunOutput update_histogram(const ExperimentConfig& c, const std::filesystem::path& out_dir = {});

struct BandwidthRow {
  protocol::Algorithm algorithm;
  std::uint64_t server_server = 0;
  std::uint64_t server_client = 0;
  std::uint64_t total() const noexcept { return server_server + server_client; }
};

/// Runs each algorithm for exactly [window_start, window_start + window_ms]
/// with accuracy stopping disabled and reports bytes sent inside the window.
std::vector<BandwidthRow> bandwidth_report(const ExperimentConfig& base, const std::vector<protocol::Algorithm>& algorithms,
                                           double window_ms, const std::filesystem::path& out_dir = {});

struct AblationArm {
  bool decay = true;
  std::vector<std::optional<double>> times;
  std::vector<std::vector<Row>> curves;  // one per seed
  std::optional<double> median_time;
};

struct DecayAblation {
  AblationArm on;
  AblationArm off;
};

/// Paired seeds with the decay function on and off. `target` is the accuracy
/// whose first crossing is compared.
DecayAblation decay_ablation(const ExperimentConfig& base, int n_seeds, double target,
                             const std::filesystem::path& out_dir = {});

const std::vector<protocol::Algorithm>& all_algorithms();

}  // namespace spyker::metrics
