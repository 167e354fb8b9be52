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

#include "spyker/model/hyperparams.hpp"

#include "spyker/errors.hpp"

namespace spyker::model {

void HyperParams::validate() const {
  if (!(eta_min <= eta_init)) throw ConfigError("hyper.eta_min", "must be <= eta_init");
  if (!(eta_min >= 0.0)) throw ConfigError("hyper.eta_min", "must be >= 0");
  if (!(beta >= 0.0)) throw ConfigError("hyper.beta", "must be >= 0");
  if (!(phi > 0.0)) throw ConfigError("hyper.phi", "must be > 0");
  if (!(eta_a > 0.0 && eta_a <= 1.0)) throw ConfigError("hyper.eta_a", "must lie in (0, 1]");
  if (!(eta_server > 0.0 && eta_server <= 1.0)) throw ConfigError("hyper.eta_server", "must lie in (0, 1]");
  if (!(h_inter > 0.0)) throw ConfigError("hyper.h_inter", "must be > 0");
  if (!(h_intra > 0.0)) throw ConfigError("hyper.h_intra", "must be > 0");
  if (!(alpha_fedasync >= 0.0)) throw ConfigError("hyper.alpha_fedasync", "must be >= 0");
  if (local_epochs < 1) throw ConfigError("hyper.local_epochs", "must be >= 1");
  if (batch_size < 1) throw ConfigError("hyper.batch_size", "must be >= 1");
}

StalenessMode parse_staleness_mode(const std::string& s) {
  if (s == "dampened") return StalenessMode::kDampened;
  if (s == "literal") return StalenessMode::kLiteral;
  throw ConfigError("hyper.staleness_mode", "expected 'dampened' or 'literal', got '" + s + "'");
}

BaseLrSchedule parse_base_schedule(const std::string& s) {
  if (s == "constant") return BaseLrSchedule::kConstant;
  if (s == "inverse-sqrt") return BaseLrSchedule::kInverseSqrt;
  throw ConfigError("hyper.base_schedule", "expected 'constant' or 'inverse-sqrt', got '" + s + "'");
}

const char* to_string(StalenessMode m) {
  return m == StalenessMode::kDampened ? "dampened" : "literal";
}

const char* to_string(BaseLrSchedule s) {
  return s == BaseLrSchedule::kConstant ? "constant" : "inverse-sqrt";
}

}  // namespace spyker::model
