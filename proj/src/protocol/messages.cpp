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

#include "spyker/protocol/messages.hpp"

namespace spyker::protocol {

const char* to_string(MessageKind k) {
  switch (k) {
    case MessageKind::kModelDispatch: return "model_dispatch";
    case MessageKind::kClientUpdate: return "client_update";
    case MessageKind::kModelBroadcast: return "model_broadcast";
    case MessageKind::kAgeBroadcast: return "age_broadcast";
    case MessageKind::kTokenPass: return "token_pass";
  }
  return "unknown";
}

std::size_t payload_bytes(const Message& m) {
  struct Visitor {
    std::size_t operator()(const ModelDispatch& d) const { return kHeaderBytes + kBytesPerParam * d.model->dim(); }
    std::size_t operator()(const ClientUpdate& u) const { return kHeaderBytes + kBytesPerParam * u.model->dim(); }
    std::size_t operator()(const ModelBroadcast& b) const { return kHeaderBytes + kBytesPerParam * b.model->dim(); }
    std::size_t operator()(const AgeBroadcast&) const { return kHeaderBytes + kBytesPerAge; }
    std::size_t operator()(const TokenPass& t) const { return kHeaderBytes + kBytesPerAge * t.token.ages.size(); }
  };
  return std::visit(Visitor{}, m);
}

}  // namespace spyker::protocol
