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

#include <algorithm>
#include <set>

#include "doctest.h"
#include "spyker/data/partition.hpp"
#include "spyker/errors.hpp"
#include "spyker/model/tiny_model.hpp"
#include "spyker/protocol/client.hpp"
#include "spyker/protocol/spyker_server.hpp"

using namespace spyker::protocol;
using spyker::ConfigError;
using spyker::ProtocolViolation;
using spyker::model::HyperParams;
using spyker::model::ModelVector;

namespace {

SharedModel vec(std::initializer_list<double> v) { return share(ModelVector(v)); }

HyperParams hp(double h_inter = 5.0, double h_intra = 350.0) {
  HyperParams h;
  h.h_inter = h_inter;
  h.h_intra = h_intra;
  return h;
}

// Four servers, ring 0 -> 1 -> 2 -> 3, token at 0. Server i owns clients
// 10i .. 10i+3 (node ids only matter as keys here).
std::vector<ServerState> four(HyperParams h = hp()) {
  std::vector<ServerState> s;
  for (int i = 0; i < 4; ++i) {
    std::vector<NodeId> clients;
    for (int k = 0; k < 4; ++k) clients.push_back(10 * i + k + 100);
    s.push_back(server_init(i, 4, vec({0.0}), {0, 1, 2, 3}, clients, h));
  }
  return s;
}

template <typename T>
std::vector<const T*> of_kind(const Outbox& out) {
  std::vector<const T*> v;
  for (const auto& o : out) {
    if (const auto* m = std::get_if<T>(&o.msg)) v.push_back(m);
  }
  return v;
}

std::set<NodeId> destinations(const Outbox& out) {
  std::set<NodeId> d;
  for (const auto& o : out) d.insert(o.dst);
  return d;
}

}  // namespace

TEST_CASE("server_init places a single token at the first ring position") {
  auto s = four();
  CHECK(s[0].has_token());
  for (int i = 1; i < 4; ++i) CHECK_FALSE(s[static_cast<std::size_t>(i)].has_token());
  CHECK(s[0].token->bid == 1);
  CHECK(s[0].token->ages == std::vector<Age>(4, 0.0));
  for (const auto& x : s) {
    CHECK(x.ages == std::vector<Age>(4, 0.0));
    CHECK(x.age == 0.0);
    CHECK_FALSE(x.ongoing_synchro);
    CHECK(*x.model == *s[0].model);  // shared init, bitwise equal
  }
  CHECK(s[3].ring_successor == 0);
  CHECK(s[1].ring_successor == 2);

  auto t = server_init(2, 4, vec({0.0}), {2, 0, 3, 1}, {}, hp());
  CHECK(t.has_token());
  CHECK(t.ring_successor == 0);
}

TEST_CASE("server_init rejects malformed rings and duplicate clients") {
  CHECK_THROWS_AS(server_init(0, 3, vec({0.0}), {0, 0, 1}, {}, hp()), ConfigError);
  CHECK_THROWS_AS(server_init(0, 3, vec({0.0}), {0, 1}, {}, hp()), ConfigError);
  CHECK_THROWS_AS(server_init(0, 2, vec({0.0}), {0, 2}, {}, hp()), ConfigError);
  CHECK_THROWS_AS(server_init(0, 2, vec({0.0}), {0, 1}, {5, 5}, hp()), ConfigError);
}

TEST_CASE("first client update at a fresh server uses weight one") {
  auto s = four();
  Outbox out;
  on_client_update(s[1], ClientUpdate{vec({2.0}), 0.0}, 110, out);
  // 0 + 0.6 * 1 * (2 - 0)
  CHECK((*s[1].model)[0] == doctest::Approx(1.2).epsilon(1e-15));
  CHECK(s[1].age == 1.0);
  REQUIRE(out.size() == 1);
  CHECK(out[0].dst == 110);
  const auto& d = std::get<ModelDispatch>(out[0].msg);
  CHECK(d.age == 1.0);  // post-merge age
  CHECK(d.model == s[1].model);
}

TEST_CASE("stale client updates are dampened by the age gap") {
  auto s = four(hp(1e9, 1e9));
  Outbox out;
  for (int k = 0; k < 4; ++k) on_client_update(s[0], ClientUpdate{vec({0.0}), 0.0}, 100, out);
  REQUIRE(s[0].age == 4.0);
  on_client_update(s[0], ClientUpdate{vec({5.0}), 0.0}, 101, out);
  // gap 4 -> weight 0.2 -> step 0.6 * 0.2 * 5
  CHECK((*s[0].model)[0] == doctest::Approx(0.6).epsilon(1e-15));
}

TEST_CASE("client update errors") {
  auto s = four();
  Outbox out;
  CHECK_THROWS_AS(on_client_update(s[0], ClientUpdate{vec({1.0}), 0.0}, 110, out), ProtocolViolation);
  CHECK_THROWS_AS(on_client_update(s[0], ClientUpdate{vec({1.0}), 3.0}, 100, out), ProtocolViolation);
  CHECK_THROWS_AS(initial_dispatch(s[0], 110), ProtocolViolation);
}

TEST_CASE("mean update count and decayed learning rate") {
  HyperParams h = hp(1e9, 1e9);
  h.eta_init = 0.5;
  auto s = four(h);
  Outbox out;
  for (int k = 0; k < 6; ++k) on_client_update(s[0], ClientUpdate{vec({0.0}), s[0].age}, 100, out);
  CHECK(s[0].mean_updates() == doctest::Approx(6.0 / 4.0));
  // u = 6 above the mean 1.5 -> 0.5 - 0.05 * 4.5
  CHECK(s[0].clients.at(100).lr == doctest::Approx(0.275).epsilon(1e-12));
  const auto& last = std::get<ModelDispatch>(out.back().msg);
  CHECK(last.lr == doctest::Approx(0.275).epsilon(1e-12));
  CHECK(s[0].clients.at(101).lr == 0.5);
}

TEST_CASE("h_inter spread at the holder triggers a model broadcast") {
  auto s = four();  // h_inter = 5 (n_C = 100, n = 4)
  CHECK(HyperParams::default_h_inter(100, 4) == 5.0);
  s[0].ages = {0.0, 1.0, 2.0, 4.0};
  Outbox out;
  check_synchronization(s[0], out);
  CHECK(out.empty());
  s[0].ages[3] = 5.0;
  check_synchronization(s[0], out);
  auto b = of_kind<ModelBroadcast>(out);
  REQUIRE(b.size() == 3);
  CHECK(destinations(out) == std::set<NodeId>{1, 2, 3});
  for (auto* m : b) CHECK(m->bid == 1);
  CHECK(s[0].ongoing_synchro);
  CHECK(s[0].did_broadcast.count(1) == 1);
  CHECK(s[0].cnt[1] == 1);
  CHECK(s[0].age_prev == s[0].age);

  Outbox again;
  check_synchronization(s[0], again);
  CHECK(again.empty());  // ongoing synchronization guard
}

TEST_CASE("h_intra growth triggers regardless of spread") {
  auto s = four(hp(1e9, 350.0));
  s[0].age = 349.0;
  s[0].ages = {349.0, 349.0, 349.0, 349.0};
  Outbox out;
  check_synchronization(s[0], out);
  CHECK(out.empty());
  s[0].age = 350.0;
  check_synchronization(s[0], out);
  CHECK(of_kind<ModelBroadcast>(out).size() == 3);
}

TEST_CASE("non-holder broadcasts its age, throttled to growth of one") {
  auto s = four();
  s[2].age = 5.0;
  Outbox out;
  check_synchronization(s[2], out);
  auto a = of_kind<AgeBroadcast>(out);
  REQUIRE(a.size() == 3);
  CHECK(a[0]->age == 5.0);
  CHECK(destinations(out) == std::set<NodeId>{0, 1, 3});

  Outbox quiet;
  s[2].age = 5.5;
  check_synchronization(s[2], quiet);
  CHECK(quiet.empty());
  s[2].age = 6.0;
  check_synchronization(s[2], quiet);
  CHECK(of_kind<AgeBroadcast>(quiet).size() == 3);
}

TEST_CASE("on_rcv_age max-merges and can trigger") {
  auto s = four();
  s[0].ages[2] = 3.0;
  Outbox out;
  on_rcv_age(s[0], AgeBroadcast{1.0}, 2, out);
  CHECK(s[0].ages[2] == 3.0);
  CHECK(out.empty());

  on_rcv_age(s[0], AgeBroadcast{5.0}, 2, out);
  CHECK(s[0].ages[2] == 5.0);
  CHECK(of_kind<ModelBroadcast>(out).size() == 3);

  Outbox o2;
  on_rcv_age(s[1], AgeBroadcast{7.0}, 3, o2);
  CHECK(of_kind<AgeBroadcast>(o2).size() == 3);
  CHECK(of_kind<ModelBroadcast>(o2).empty());

  CHECK_THROWS_AS(on_rcv_age(s[1], AgeBroadcast{1.0}, 9, o2), ProtocolViolation);
}

TEST_CASE("token receipt merges ages, bumps the bid and may broadcast at once") {
  auto s = four();
  s[1].ages = {0.0, 0.0, 4.0, 0.0};
  Outbox out;
  on_rcv_token(s[1], TokenPass{Token{7, {1.0, 0.0, 2.0, 3.0}}}, out);
  CHECK(s[1].ages == std::vector<Age>{1.0, 0.0, 4.0, 3.0});
  REQUIRE(s[1].has_token());
  CHECK(s[1].token->bid == 8);
  CHECK(out.empty());

  Outbox o2;
  CHECK_THROWS_AS(on_rcv_token(s[1], TokenPass{Token{1, {0, 0, 0, 0}}}, o2), ProtocolViolation);

  s[2].ages = {0.0, 0.0, 0.0, 6.0};
  on_rcv_token(s[2], TokenPass{Token{3, {0, 0, 0, 0}}}, o2);
  auto b = of_kind<ModelBroadcast>(o2);
  REQUIRE(b.size() == 3);
  CHECK(b[0]->bid == 4);
}

TEST_CASE("non-holder echoes an unseen bid exactly once, then aggregates") {
  auto s = four();
  s[1].model = vec({1.0});
  s[1].age = 10.0;
  Outbox out;
  on_rcv_model(s[1], ModelBroadcast{vec({3.0}), 10.0, 1}, 0, out);
  auto echo = of_kind<ModelBroadcast>(out);
  REQUIRE(echo.size() == 3);
  CHECK((*echo[0]->model)[0] == 1.0);  // pre-merge model
  CHECK(echo[0]->bid == 1);
  CHECK(destinations(out) == std::set<NodeId>{0, 2, 3});
  // equal ages: w = 0.5, step 0.6 * 0.5 * (3 - 1)
  CHECK((*s[1].model)[0] == doctest::Approx(1.6).epsilon(1e-15));
  CHECK(s[1].age == 10.0);

  Outbox dup;
  on_rcv_model(s[1], ModelBroadcast{vec({3.0}), 10.0, 1}, 2, dup);
  CHECK(dup.empty());
  CHECK((*s[1].model)[0] == doctest::Approx(1.6 + 0.3 * 1.4).epsilon(1e-15));
}

TEST_CASE("holder passes the token once cnt reaches n") {
  auto s = four();
  s[0].ages[1] = 5.0;
  Outbox out;
  check_synchronization(s[0], out);
  REQUIRE(s[0].cnt[1] == 1);
  for (int j = 1; j <= 3; ++j) {
    Outbox o;
    on_rcv_model(s[0], ModelBroadcast{vec({1.0}), 5.0, 1}, j, o);
    if (j < 3) {
      CHECK(o.empty());
      CHECK(s[0].cnt[1] == 1 + j);
      CHECK(s[0].has_token());
    } else {
      REQUIRE(o.size() == 1);
      CHECK(o[0].dst == 1);
      const auto& t = std::get<TokenPass>(o[0].msg).token;
      CHECK(t.bid == 1);
      CHECK(t.ages[0] == s[0].age);
      CHECK_FALSE(s[0].has_token());
      CHECK_FALSE(s[0].ongoing_synchro);
    }
  }
}

TEST_CASE("full exchange among four servers passes exactly one token") {
  auto s = four();
  s[0].ages[3] = 5.0;
  // deliver every message FIFO until quiescent
  std::vector<std::pair<NodeId, Outgoing>> queue;  // (src, msg)
  Outbox first;
  check_synchronization(s[0], first);
  for (auto& o : first) queue.emplace_back(0, o);
  int tokens = 0;
  std::size_t head = 0;
  while (head < queue.size()) {
    auto [src, o] = queue[head++];
    Outbox next;
    if (const auto* m = std::get_if<ModelBroadcast>(&o.msg)) on_rcv_model(s[static_cast<std::size_t>(o.dst)], *m, src, next);
    if (const auto* t = std::get_if<TokenPass>(&o.msg)) {
      ++tokens;
      CHECK(o.dst == 1);
      (void)t;
      continue;  // keep the token in flight
    }
    for (auto& n : next) queue.emplace_back(o.dst, n);
  }
  CHECK(tokens == 1);
  // each server broadcast once for bid 1: 4 servers x 3 peers
  CHECK(std::count_if(queue.begin(), queue.end(),
                      [](const auto& q) { return std::holds_alternative<ModelBroadcast>(q.second.msg); }) == 12);
  for (const auto& x : s) CHECK(x.did_broadcast.count(1) == 1);
}

TEST_CASE("age stays within the merged pair's range across server merges") {
  auto s = four();
  s[1].age = 100.0;
  Outbox out;
  on_rcv_model(s[1], ModelBroadcast{vec({1.0}), 160.0, 1}, 0, out);
  CHECK(s[1].age == doctest::Approx(125.5941820945).epsilon(1e-9));
  CHECK(s[1].age >= 100.0);
  CHECK(s[1].age <= 160.0);
}

TEST_CASE("a single server never synchronizes") {
  auto s = server_init(0, 1, vec({0.0}), {0}, {7}, hp(0.1, 0.1));
  Outbox out;
  for (int k = 0; k < 5; ++k) on_client_update(s, ClientUpdate{vec({1.0}), s.age}, 7, out);
  CHECK(out.size() == 5);
  for (const auto& o : out) CHECK(std::holds_alternative<ModelDispatch>(o.msg));
}

namespace {

ClientState make_client(int home) {
  spyker::data::SyntheticSpec spec;
  spec.seed = 4;
  spec.n_samples = 64;
  spec.dim = 3;
  spec.n_classes = 2;
  spec.separation = 3.0;
  ClientState c;
  c.id = 0;
  c.home_server = home;
  c.arch = {spyker::model::ModelKind::kLogisticRegression, 3, 0, 2};
  c.data = spyker::data::synthetic_dataset(spec);
  c.epochs = 2;
  c.batch_size = 16;
  c.training_delay_ms = 150.0;
  c.rng = spyker::Rng(9);
  return c;
}

}  // namespace

TEST_CASE("client echoes the dispatched age and reports training time") {
  auto c = make_client(2);
  auto init = share(spyker::model::TinyModel::random_init(c.arch, 1).params);
  auto r = client_handle_dispatch(c, ModelDispatch{init, 17.5, 0.1}, 2);
  CHECK(r.update.sent_age == 17.5);
  CHECK(r.duration_ms == 300.0);  // 150 ms per epoch, 2 epochs
  CHECK(*r.update.model != *init);
  CHECK(c.updates_sent == 1);
}

TEST_CASE("zero learning rate returns the dispatched model") {
  auto c = make_client(0);
  auto init = share(spyker::model::TinyModel::random_init(c.arch, 1).params);
  auto r = client_handle_dispatch(c, ModelDispatch{init, 0.0, 0.0}, 0);
  CHECK(*r.update.model == *init);
}

TEST_CASE("client training is deterministic for a fixed seed") {
  auto a = make_client(0);
  auto b = make_client(0);
  auto init = share(spyker::model::TinyModel::random_init(a.arch, 1).params);
  auto ra = client_handle_dispatch(a, ModelDispatch{init, 0.0, 0.2}, 0);
  auto rb = client_handle_dispatch(b, ModelDispatch{init, 0.0, 0.2}, 0);
  CHECK(*ra.update.model == *rb.update.model);
}

TEST_CASE("client rejects dispatches from a non-home server") {
  auto c = make_client(1);
  auto init = share(spyker::model::TinyModel::random_init(c.arch, 1).params);
  CHECK_THROWS_AS(client_handle_dispatch(c, ModelDispatch{init, 0.0, 0.1}, 0), ProtocolViolation);
}

TEST_CASE("payload sizes follow the header plus parameters rule") {
  auto m = share(ModelVector(std::vector<double>(250, 0.0)));
  CHECK(payload_bytes(ModelDispatch{m, 0.0, 0.1}) == 4 * 250 + 64);
  CHECK(payload_bytes(ClientUpdate{m, 0.0}) == 4 * 250 + 64);
  CHECK(payload_bytes(ModelBroadcast{m, 0.0, 3}) == 4 * 250 + 64);
  CHECK(payload_bytes(AgeBroadcast{1.0}) == 72);
  CHECK(payload_bytes(TokenPass{Token{1, std::vector<Age>(4, 0.0)}}) == 64 + 8 * 4);
}
