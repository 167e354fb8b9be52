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

#include <cstddef>
#include <cstdint>
#include <memory>
#include <variant>
#include <vector>

#include "spyker/model/aggregation.hpp"
#include "spyker/model/model_vector.hpp"

namespace spyker::protocol {

using model::Age;
using SharedModel = std::shared_ptr<const model::ModelVector>;

inline SharedModel share(model::ModelVector m) {
  return std::make_shared<const model::ModelVector>(std::move(m));
}

// Serialized size model: 32-bit parameters plus a fixed header. Ages travel
// as 64-bit values.
inline constexpr std::size_t kHeaderBytes = 64;
inline constexpr std::size_t kBytesPerParam = 4;
inline constexpr std::size_t kBytesPerAge = 8;

struct Token {
  std::uint64_t bid = 1;
  std::vector<Age> ages;
};

// server -> client
struct ModelDispatch {
  SharedModel model;
  Age age = 0.0;
  double lr = 0.0;
};

// client -> server; echoes the age of the dispatched model
struct ClientUpdate {
  SharedModel model;
  Age sent_age = 0.0;
};

// server -> server
struct ModelBroadcast {
  SharedModel model;
  Age age = 0.0;
  std::uint64_t bid = 0;
};

struct AgeBroadcast {
  Age age = 0.0;
};

struct TokenPass {
  Token token;
};

using Message = std::variant<ModelDispatch, ClientUpdate, ModelBroadcast, AgeBroadcast, TokenPass>;

enum class MessageKind : std::uint8_t {
  kModelDispatch = 0,
  kClientUpdate = 1,
  kModelBroadcast = 2,
  kAgeBroadcast = 3,
  kTokenPass = 4,
};
inline constexpr std::size_t kMessageKinds = 5;

inline MessageKind kind_of(const Message& m) { return static_cast<MessageKind>(m.index()); }
const char* to_string(MessageKind k);

std::size_t payload_bytes(const Message& m);

}  // namespace spyker::protocol
