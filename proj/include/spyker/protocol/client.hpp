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

#include "spyker/data/dataset.hpp"
#include "spyker/model/tiny_model.hpp"
#include "spyker/protocol/messages.hpp"
#include "spyker/rng.hpp"

namespace spyker::protocol {

struct ClientState {
  int id = 0;
  int home_server = 0;
  model::ModelArch arch;
  data::Dataset data;
  int epochs = 1;
  int batch_size = 32;
  double training_delay_ms = 0.0;  // per epoch, fixed for the whole run
  Rng rng;
  long updates_sent = 0;
};

struct TrainingResult {
  ClientUpdate update;
  double duration_ms;
};

/// Trains the dispatched model on the client's data with the dispatched lr
/// and echoes the dispatched age. Throws ProtocolViolation when `from` is
/// not the home server.
TrainingResult client_handle_dispatch(ClientState& c, const ModelDispatch& msg, int from);

// Trained parameters only, for drivers that do not use ages.
model::ModelVector client_train(ClientState& c, const model::ModelVector& params, double lr);

}  // namespace spyker::protocol
