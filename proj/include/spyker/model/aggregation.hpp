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

#include <utility>
#include <vector>

#include "spyker/model/hyperparams.hpp"
#include "spyker/model/model_vector.hpp"

namespace spyker::model {

// Count of client updates absorbed into a model. Real-valued because the
// server-server merge moves it by a convex combination.
using Age = double;

struct WeightedModel {
  const ModelVector* model;
  long data_points;
};

/// Data-size weighted average: sum_k (d_k / d) W_k.
ModelVector fedavg_aggregate(const std::vector<WeightedModel>& updates);

/// Polynomial staleness dampening s(tau) = (1 + tau)^-alpha.
double staleness_factor(long staleness, double alpha);

/// W_global - s(tau) * (d_k / d) * (W_sent - W_returned).
ModelVector fedasync_merge(const ModelVector& global, const ModelVector& sent,
                           const ModelVector& returned, long staleness, long d_k, long d,
                           double alpha);

/// Weight of a client update given the server's current age and the age the
/// client trained on. Throws ProtocolViolation when server_age < sent_age.
double client_staleness_weight(Age server_age, Age sent_age, StalenessMode mode);

/// W_server + eta_server * weight * (W_client - W_server).
ModelVector spyker_client_merge(const ModelVector& server, const ModelVector& client,
                                double weight, double eta_server);

// Learning rate a client would use after `updates` updates, before decay.
double base_learning_rate(BaseLrSchedule schedule, double eta_init, long updates);

/// Throttles clients that have sent more updates than the per-server mean:
/// base_lr when u_k < u_mean, otherwise max(eta_min, base_lr - beta (u_k - u_mean)).
double decay(double base_lr, long u_k, double u_mean, double beta, double eta_min);

/// Sigmoid of phi (A_j - A_i) / A_i. The denominator is max(A_i, 1) so the
/// weight stays defined before a server has absorbed any update.
double server_pair_weight(Age a_i, Age a_j, double phi);

struct MergedModel {
  ModelVector model;
  Age age;
};

/// Merges peer model j into local model i and moves the local age by the same
/// coefficient eta_a * w_ij.
MergedModel server_merge(const ModelVector& w_i, Age a_i, const ModelVector& w_j, Age a_j,
                         double eta_a, double phi);

}  // namespace spyker::model
