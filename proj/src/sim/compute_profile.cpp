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

#include "spyker/sim/compute_profile.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "spyker/errors.hpp"

namespace spyker::sim {

void ComputeProfile::validate() const {
  for (double v : {local_training_ms, spyker_aggregation_ms, sync_spyker_aggregation_ms,
                   fedavg_aggregation_ms, hierfavg_aggregation_ms, fedasync_aggregation_ms}) {
    if (!(v >= 0.0)) throw ConfigError("compute", "procedure delays must be >= 0");
  }
  if (!(training_mean_ms > 0.0)) throw ConfigError("compute.training_mean_ms", "must be > 0");
  if (!(training_sigma_ms >= 0.0)) throw ConfigError("compute.training_sigma_ms", "must be >= 0");
  if (!(fast_client_fraction >= 0.0 && fast_client_fraction <= 1.0)) {
    throw ConfigError("compute.fast_client_fraction", "must lie in [0, 1]");
  }
  if (!(fast_client_speedup >= 1.0)) throw ConfigError("compute.fast_client_speedup", "must be >= 1");
}

double ComputeProfile::duration(Procedure p) const {
  switch (p) {
    case Procedure::kLocalTraining: return local_training_ms;
    case Procedure::kSpykerAggregation: return spyker_aggregation_ms;
    case Procedure::kSyncSpykerAggregation: return sync_spyker_aggregation_ms;
    case Procedure::kFedAvgAggregation: return fedavg_aggregation_ms;
    case Procedure::kHierFavgAggregation: return hierfavg_aggregation_ms;
    case Procedure::kFedAsyncAggregation: return fedasync_aggregation_ms;
  }
  return 0.0;
}

std::vector<double> ComputeProfile::sample_training_delays(int n_clients, Rng& rng) const {
  std::vector<double> out(static_cast<std::size_t>(std::max(0, n_clients)));
  std::normal_distribution<double> gauss(training_mean_ms, training_sigma_ms);
  for (auto& d : out) {
    if (training_model == TrainingDelayModel::kFixed) {
      d = local_training_ms;
      continue;
    }
    do {
      d = gauss(rng);
    } while (!(d > 0.0));
  }
  const auto n_fast = static_cast<std::size_t>(std::llround(fast_client_fraction * static_cast<double>(out.size())));
  if (n_fast > 0 && fast_client_speedup > 1.0) {
    std::vector<std::size_t> idx(out.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    fisher_yates(std::span<std::size_t>(idx), rng);
    for (std::size_t i = 0; i < n_fast; ++i) out[idx[i]] /= fast_client_speedup;
  }
  return out;
}

}  // namespace spyker::sim
