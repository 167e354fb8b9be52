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

#include <string>

namespace spyker::model {

// How a server weighs a client update by the age gap of the model it trained on.
enum class StalenessMode {
  kDampened,  // 1 / (1 + gap)
  kLiteral,   // gap, exactly as the pseudocode writes it
};

// The per-client learning rate a client would use before any decay is applied.
enum class BaseLrSchedule {
  kConstant,    // eta_init
  kInverseSqrt, // eta_init / sqrt(1 + u)
};

struct HyperParams {
  double eta_init = 0.05;
  double eta_min = 1e-6;
  double beta = 0.05;
  double h_inter = 5.0;    // n_clients / (5 * n_servers) for the reference topology
  double h_intra = 350.0;
  double phi = 1.5;
  double eta_a = 0.6;        // server-server aggregation rate
  double eta_server = 0.6;   // client-update aggregation rate
  double alpha_fedasync = 0.5;
  int local_epochs = 1;
  int batch_size = 32;
  StalenessMode staleness_mode = StalenessMode::kDampened;
  BaseLrSchedule base_schedule = BaseLrSchedule::kConstant;
  bool decay_enabled = true;

  // Throws ConfigError naming the first violated bound.
  void validate() const;

  // h_inter = n_clients / (5 n_servers)
  static double default_h_inter(int n_clients, int n_servers) {
    return static_cast<double>(n_clients) / (5.0 * n_servers);
  }
};

StalenessMode parse_staleness_mode(const std::string& s);
BaseLrSchedule parse_base_schedule(const std::string& s);
const char* to_string(StalenessMode m);
const char* to_string(BaseLrSchedule s);

}  // namespace spyker::model
