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

// Runs the simulated single-server FedAvg for R rounds and the sequential
// oracle on the same inputs (data shards, client seeds, initial model).

#include <cmath>

#include "oracles.hpp"
#include "spyker/data/partition.hpp"
#include "spyker/metrics/runner.hpp"

namespace harness {

struct FedAvgComparison {
  std::vector<double> simulated;
  std::vector<double> reference;
  double max_abs_diff = 0.0;
};

inline FedAvgComparison compare_fedavg(spyker::metrics::ExperimentConfig c, int rounds) {
  using namespace spyker;
  c.algorithm = protocol::Algorithm::kFedAvg;
  c.fedavg_fraction = 1.0;
  c.stop.target_accuracy.reset();
  c.stop.max_updates.reset();

  FedAvgComparison out;
  metrics::RunOptions o;
  o.observer = [&](const sim::Simulator&, const protocol::FlSystem& sys) {
    const auto& f = dynamic_cast<const protocol::FedAvgSystem&>(sys);
    if (out.simulated.empty() && f.rounds() == static_cast<std::uint64_t>(rounds)) {
      const auto& m = *f.system_model();
      out.simulated.assign(m.data(), m.data() + m.dim());
    }
  };
  // stop once round R + 1 has collected its updates
  c.stop.horizon_ms = 1e9;
  const long cap = static_cast<long>(c.topology.n_clients) * (rounds + 1);
  c.stop.max_updates = cap;
  metrics::run_experiment(c, o);

  // Oracle inputs, rebuilt from the same seeds.
  const auto split = metrics::load_data(c);
  const auto shards = data::partition_noniid(
      *split.train, {c.topology.n_clients, c.labels_per_client, derive_seed(c.seed, seed_purpose::kPartition, 0)});
  std::vector<data::Dataset> client_data;
  std::vector<std::mt19937_64> rngs;
  for (int i = 0; i < c.topology.n_clients; ++i) {
    client_data.push_back(split.train->subset(shards[static_cast<std::size_t>(i)]));
    rngs.emplace_back(derive_seed(c.seed, seed_purpose::kClientShuffle, static_cast<std::uint64_t>(i)));
  }
  const model::ModelArch arch{c.model_kind, split.train->dim, c.hidden_dim, split.train->n_classes};
  const auto init = model::TinyModel::random_init(arch, derive_seed(c.seed, seed_purpose::kModelInit, 0)).params;
  out.reference = oracle::fedavg(std::vector<double>(init.data(), init.data() + init.dim()), split.train->dim,
                                 split.train->n_classes, client_data, rngs, c.hyper.eta_init, c.hyper.local_epochs,
                                 static_cast<std::size_t>(c.hyper.batch_size), rounds);
  if (out.simulated.size() != out.reference.size()) {
    out.max_abs_diff = INFINITY;
    return out;
  }
  for (std::size_t i = 0; i < out.reference.size(); ++i) {
    out.max_abs_diff = std::max(out.max_abs_diff, std::abs(out.simulated[i] - out.reference[i]));
  }
  return out;
}

}  // namespace harness
