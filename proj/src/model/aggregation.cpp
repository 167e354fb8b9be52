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

#include "spyker/model/aggregation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "spyker/errors.hpp"

namespace spyker::model {

ModelVector fedavg_aggregate(const std::vector<WeightedModel>& updates) {
  if (updates.empty()) throw InvalidInput("fedavg_aggregate: empty update list");
  long total = 0;
  for (const auto& u : updates) {
    if (u.data_points <= 0) throw InvalidInput("fedavg_aggregate: d_k must be positive");
    require_same_dim(*updates.front().model, *u.model, "fedavg_aggregate");
    total += u.data_points;
  }
  ModelVector out(updates.front().model->dim(), 0.0);
  const double d = static_cast<double>(total);
  for (const auto& u : updates) out.axpy(static_cast<double>(u.data_points) / d, *u.model);
  out.require_finite("fedavg_aggregate");
  return out;
}

double staleness_factor(long staleness, double alpha) {
  if (staleness < 0) throw InvalidInput("staleness_factor: negative staleness");
  return std::pow(1.0 + static_cast<double>(staleness), -alpha);
}

ModelVector fedasync_merge(const ModelVector& global, const ModelVector& sent,
                           const ModelVector& returned, long staleness, long d_k, long d,
                           double alpha) {
  require_same_dim(global, sent, "fedasync_merge");
  require_same_dim(global, returned, "fedasync_merge");
  if (d_k < 1 || d < d_k) throw InvalidInput("fedasync_merge: need d >= d_k >= 1");
  const double coeff = staleness_factor(staleness, alpha) * static_cast<double>(d_k) /
                       static_cast<double>(d);
  ModelVector out = global;
  for (std::size_t i = 0; i < out.dim(); ++i) out[i] -= coeff * (sent[i] - returned[i]);
  out.require_finite("fedasync_merge");
  return out;
}

double client_staleness_weight(Age server_age, Age sent_age, StalenessMode mode) {
  if (server_age < sent_age) {
    throw ProtocolViolation("client update carries age " + std::to_string(sent_age) +
                            " newer than server age " + std::to_string(server_age));
  }
  const double gap = server_age - sent_age;
  return mode == StalenessMode::kLiteral ? gap : 1.0 / (1.0 + gap);
}

ModelVector spyker_client_merge(const ModelVector& server, const ModelVector& client,
                                double weight, double eta_server) {
  require_same_dim(server, client, "spyker_client_merge");
  if (weight < 0.0) throw InvalidInput("spyker_client_merge: negative weight");
  const double coeff = eta_server * weight;
  ModelVector out = server;
  for (std::size_t i = 0; i < out.dim(); ++i) out[i] += coeff * (client[i] - server[i]);
  out.require_finite("spyker_client_merge");
  return out;
}

double base_learning_rate(BaseLrSchedule schedule, double eta_init, long updates) {
  if (schedule == BaseLrSchedule::kInverseSqrt) {
    return eta_init / std::sqrt(1.0 + static_cast<double>(updates));
  }
  return eta_init;
}

double decay(double base_lr, long u_k, double u_mean, double beta, double eta_min) {
  const double u = static_cast<double>(u_k);
  if (u < u_mean) return base_lr;
  return std::max(eta_min, base_lr - beta * (u - u_mean));
}

double server_pair_weight(Age a_i, Age a_j, double phi) {
  const double denom = std::max(a_i, 1.0);
  const double a = phi * (a_j - a_i) / denom;
  return 1.0 / (1.0 + std::exp(-a));
}

MergedModel server_merge(const ModelVector& w_i, Age a_i, const ModelVector& w_j, Age a_j,
                         double eta_a, double phi) {
  require_same_dim(w_i, w_j, "server_merge");
  if (!(eta_a > 0.0 && eta_a <= 1.0)) throw InvalidInput("server_merge: eta_a must lie in (0, 1]");
  const double c = eta_a * server_pair_weight(a_i, a_j, phi);
  ModelVector out = w_i;
  for (std::size_t k = 0; k < out.dim(); ++k) out[k] += c * (w_j[k] - w_i[k]);
  out.require_finite("server_merge");
  // Same as (1 - c) a_i + c a_j, but exact when a_i == a_j.
  return {std::move(out), a_i + c * (a_j - a_i)};
}

}  // namespace spyker::model
