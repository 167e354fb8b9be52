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

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace spyker::sim {

inline constexpr const char* kCodeVersion = "spyker-sim 1.0.0";

/// Everything needed to reproduce a run. Two runs with equal manifests
/// produce identical outputs.
struct RunManifest {
  std::uint64_t master_seed = 0;
  std::vector<std::uint64_t> node_seeds;  // client shuffle seeds, by client index
  std::vector<int> ring_order;
  std::string config_hash;  // FNV-1a of the canonical config JSON, hex
  std::string code_version = kCodeVersion;
  nlohmann::json config;    // the resolved config the hash covers
};

void to_json(nlohmann::json& j, const RunManifest& m);
void from_json(const nlohmann::json& j, RunManifest& m);

// Hex FNV-1a of the canonical (sorted-key, compact) dump.
std::string config_hash(const nlohmann::json& config);

}  // namespace spyker::sim
