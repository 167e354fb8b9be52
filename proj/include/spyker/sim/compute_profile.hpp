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

#include <vector>

#include "spyker/rng.hpp"

namespace spyker::sim {

enum class Procedure {
  kLocalTraining,
  kSpykerAggregation,
  kSyncSpykerAggregation,
  kFedAvgAggregation,
  kHierFavgAggregation,
  kFedAsyncAggregation,
};

enum class TrainingDelayModel { kFixed, kGaussian };

/// Simulated computation costs in milliseconds.
struct ComputeProfile {
  double local_training_ms = 200.0;  // used by the fixed delay model
  double spyker_aggregation_ms = 2.0;
  double sync_spyker_aggregation_ms = 2.0;
  double fedavg_aggregation_ms = 15.0;
  double hierfavg_aggregation_ms = 15.0;
  double fedasync_aggregation_ms = 2.0;

  TrainingDelayModel training_model = TrainingDelayModel::kGaussian;
  double training_mean_ms = 150.0;
  double training_sigma_ms = 7.5;

  // A seeded subset of clients trains `fast_client_speedup` times faster.
  double fast_client_fraction = 0.0;
  double fast_client_speedup = 1.0;

  void validate() const;

  // Fixed per-procedure cost; kLocalTraining returns local_training_ms.
  double duration(Procedure p) const;

  /// One per-epoch training delay per client, drawn once per run. Gaussian
  /// draws are resampled until strictly positive.
  std::vector<double> sample_training_delays(int n_clients, Rng& rng) const;
};

// Duration of one local training call: per-epoch delay times epochs.
inline double impose_training(double per_epoch_delay_ms, int epochs) {
  return per_epoch_delay_ms * epochs;
}

}  // namespace spyker::sim
