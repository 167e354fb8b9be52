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

#include "spyker/metrics/suites.hpp"

#include <algorithm>
#include <fstream>
#include <limits>

#include "spyker/errors.hpp"

namespace spyker::metrics {

namespace fs = std::filesystem;
using protocol::Algorithm;

namespace {

std::string opt_cell(const std::optional<double>& v) { return v ? format_double(*v) : "unreached"; }

std::ofstream open_csv(const fs::path& file) {
  fs::create_directories(file.parent_path());
  std::ofstream out(file);
  if (!out) throw ConfigError("out_dir", "cannot write " + file.string());
  return out;
}

}  // namespace

std::optional<double> median(std::vector<std::optional<double>> values) {
  if (values.empty()) return std::nullopt;
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> v;
  for (const auto& x : values) v.push_back(x.value_or(inf));
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  const double m = n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
  if (m == inf) return std::nullopt;
  return m;
}

std::vector<std::uint64_t> suite_seeds(const ExperimentConfig& base, int n_seeds) {
  std::vector<std::uint64_t> out;
  for (int k = 0; k < n_seeds; ++k) out.push_back(base.seed + static_cast<std::uint64_t>(k));
  return out;
}

const std::vector<Algorithm>& all_algorithms() {
  static const std::vector<Algorithm> a = {Algorithm::kSpyker, Algorithm::kSyncSpyker, Algorithm::kFedAvg,
                                           Algorithm::kFedAsync, Algorithm::kHierFavg};
  return a;
}

std::vector<ScalabilityCell> scalability_suite(const ExperimentConfig& base, const std::vector<int>& counts,
                                               const std::vector<Algorithm>& algorithms, int n_seeds, double target,
                                               const fs::path& out_dir) {
  if (counts.empty()) throw ConfigError("counts", "need at least one client count");
  std::vector<ScalabilityCell> cells;
  for (Algorithm a : algorithms) {
    std::optional<double> base_time, base_updates;
    for (std::size_t k = 0; k < counts.size(); ++k) {
      ScalabilityCell cell{a, counts[k], {}, {}, {}, {}, {}, {}};
      for (auto seed : suite_seeds(base, n_seeds)) {
        ExperimentConfig c = base;
        c.algorithm = a;
        c.seed = seed;
        c.topology.n_clients = counts[k];
        c.topology.assignment = "balanced";
        c.stop.target_accuracy = target;
        auto out = run_experiment(c);
        cell.times.push_back(out.frame.summary.time_to_target);
        const auto u = out.frame.summary.updates_to_target;
        cell.updates.push_back(u ? std::optional<double>(static_cast<double>(*u)) : std::nullopt);
        if (!out_dir.empty()) {
          write_outputs(out_dir / (std::string(protocol::to_string(a)) + "-n" + std::to_string(counts[k]) + "-seed" +
                                   std::to_string(seed)),
                        out);
        }
      }
      cell.median_time = median(cell.times);
      cell.median_updates = median(cell.updates);
      if (k == 0) {
        base_time = cell.median_time;
        base_updates = cell.median_updates;
      }
      if (base_time && cell.median_time) cell.time_multiplier = *cell.median_time / *base_time;
      if (base_updates && cell.median_updates) cell.update_multiplier = *cell.median_updates / *base_updates;
      cells.push_back(std::move(cell));
    }
  }
  if (!out_dir.empty()) {
    auto out = open_csv(out_dir / "scalability.csv");
    out << "algorithm,n_clients,median_time_ms,median_updates,time_multiplier,update_multiplier\n";
    for (const auto& c : cells) {
      out << protocol::to_string(c.algorithm) << ',' << c.n_clients << ',' << opt_cell(c.median_time) << ','
          << opt_cell(c.median_updates) << ',' << opt_cell(c.time_multiplier) << ',' << opt_cell(c.update_multiplier)
          << '\n';
    }
  }
  return cells;
}

RunOutput queue_trace(ExperimentConfig c, double sample_ms, const fs::path& out_dir) {
  if (c.metrics.queue_sample_ms <= 0.0) c.metrics.queue_sample_ms = sample_ms;
  auto out = run_experiment(c);
  if (!out_dir.empty()) write_outputs(out_dir, out);
  return out;
}

RunOutput update_histogram(const ExperimentConfig& c, const fs::path& out_dir) {
  auto out = run_experiment(c);
  if (!out_dir.empty()) write_outputs(out_dir, out);
  return out;
}

std::vector<BandwidthRow> bandwidth_report(const ExperimentConfig& base, const std::vector<Algorithm>& algorithms,
                                           double window_ms, const fs::path& out_dir) {
  std::vector<BandwidthRow> rows;
  for (Algorithm a : algorithms) {
    ExperimentConfig c = base;
    c.algorithm = a;
    c.stop.target_accuracy.reset();
    c.stop.max_updates.reset();
    c.stop.horizon_ms = c.metrics.bytes_window_start_ms + window_ms;
    auto out = run_experiment(c);
    rows.push_back({a, out.frame.summary.bytes_server_server, out.frame.summary.bytes_server_client});
    if (!out_dir.empty()) write_outputs(out_dir / protocol::to_string(a), out);
  }
  if (!out_dir.empty()) {
    auto out = open_csv(out_dir / "bandwidth.csv");
    out << "algorithm,server_server_bytes,server_client_bytes,total_bytes\n";
    for (const auto& r : rows) {
      out << protocol::to_string(r.algorithm) << ',' << r.server_server << ',' << r.server_client << ',' << r.total()
          << '\n';
    }
  }
  return rows;
}

DecayAblation decay_ablation(const ExperimentConfig& base, int n_seeds, double target, const fs::path& out_dir) {
  if (base.algorithm != Algorithm::kSpyker) throw ConfigError("algorithm", "decay ablation runs spyker only");
  DecayAblation result;
  result.on.decay = true;
  result.off.decay = false;
  for (auto seed : suite_seeds(base, n_seeds)) {
    for (AblationArm* arm : {&result.on, &result.off}) {
      ExperimentConfig c = base;
      c.seed = seed;
      c.hyper.decay_enabled = arm->decay;
      c.stop.target_accuracy = target;
      auto out = run_experiment(c);
      arm->times.push_back(out.frame.summary.time_to_target);
      arm->curves.push_back(out.frame.rows);
      if (!out_dir.empty()) {
        write_outputs(out_dir / ((arm->decay ? "decay-on-seed" : "decay-off-seed") + std::to_string(seed)), out);
      }
    }
  }
  result.on.median_time = median(result.on.times);
  result.off.median_time = median(result.off.times);
  if (!out_dir.empty()) {
    auto out = open_csv(out_dir / "decay_ablation.csv");
    out << "arm,seed,time_to_target_ms\n";
    const auto seeds = suite_seeds(base, n_seeds);
    for (const AblationArm* arm : {&result.on, &result.off}) {
      for (std::size_t i = 0; i < seeds.size(); ++i) {
        out << (arm->decay ? "on" : "off") << ',' << seeds[i] << ',' << opt_cell(arm->times[i]) << '\n';
      }
    }
    auto curves = open_csv(out_dir / "decay_curves.csv");
    curves << "arm,seed,sim_time_ms,updates_processed,accuracy\n";
    for (const AblationArm* arm : {&result.on, &result.off}) {
      for (std::size_t i = 0; i < seeds.size(); ++i) {
        for (const auto& r : arm->curves[i]) {
          curves << (arm->decay ? "on" : "off") << ',' << seeds[i] << ',' << format_double(r.sim_time_ms) << ','
                 << r.updates_processed << ',' << format_double(r.accuracy) << '\n';
        }
      }
    }
  }
  return result;
}

}  // namespace spyker::metrics
