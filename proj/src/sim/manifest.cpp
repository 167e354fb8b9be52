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

#include "spyker/sim/manifest.hpp"

#include <cstdio>

#include "spyker/sim/simulator.hpp"

namespace spyker::sim {

std::string config_hash(const nlohmann::json& config) {
  // nlohmann::json objects keep keys sorted, so dump() is canonical.
  const std::string s = config.dump();
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(s.data(), s.size())));
  return buf;
}

void to_json(nlohmann::json& j, const RunManifest& m) {
  j = nlohmann::json{{"master_seed", m.master_seed},
                     {"node_seeds", m.node_seeds},
                     {"ring_order", m.ring_order},
                     {"config_hash", m.config_hash},
                     {"code_version", m.code_version},
                     {"config", m.config}};
}

void from_json(const nlohmann::json& j, RunManifest& m) {
  j.at("master_seed").get_to(m.master_seed);
  j.at("node_seeds").get_to(m.node_seeds);
  j.at("ring_order").get_to(m.ring_order);
  j.at("config_hash").get_to(m.config_hash);
  j.at("code_version").get_to(m.code_version);
  m.config = j.at("config");
}

}  // namespace spyker::sim
