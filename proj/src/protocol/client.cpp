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

#include "spyker/protocol/client.hpp"

#include <string>

#include "spyker/errors.hpp"
#include "spyker/sim/compute_profile.hpp"

namespace spyker::protocol {

model::ModelVector client_train(ClientState& c, const model::ModelVector& params, double lr) {
  auto m = model::TinyModel::with_params(c.arch, params);
  ++c.updates_sent;
  return model::local_training(m, c.data, lr, c.epochs, c.batch_size, c.rng).params;
}

TrainingResult client_handle_dispatch(ClientState& c, const ModelDispatch& msg, int from) {
  if (from != c.home_server) {
    throw ProtocolViolation("client " + std::to_string(c.id) + " got a dispatch from non-home server " +
                            std::to_string(from));
  }
  auto trained = client_train(c, *msg.model, msg.lr);
  return {ClientUpdate{share(std::move(trained)), msg.age},
          sim::impose_training(c.training_delay_ms, c.epochs)};
}

}  // namespace spyker::protocol
