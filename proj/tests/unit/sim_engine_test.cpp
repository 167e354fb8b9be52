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

#include <cmath>
#include <map>
#include <vector>

#include "doctest.h"
#include "spyker/errors.hpp"
#include "spyker/sim/compute_profile.hpp"
#include "spyker/sim/link_model.hpp"
#include "spyker/sim/manifest.hpp"
#include "spyker/sim/simulator.hpp"

using namespace spyker::sim;
using spyker::ConfigError;
using spyker::protocol::AgeBroadcast;
using spyker::protocol::ModelBroadcast;
using spyker::protocol::MessageKind;
using spyker::protocol::payload_bytes;
using spyker::protocol::share;
using spyker::model::ModelVector;

namespace {

constexpr int kHongkong = 0;
constexpr int kParis = 1;
constexpr int kSydney = 2;
constexpr int kCalifornia = 3;

struct Handled {
  NodeId node;
  NodeId src;
  double at;
  double sent_at;
  double age;
};

// Scripted process: start() runs a callback, every message costs `service`
// ms and is recorded at completion.
struct Recorder : Process {
  std::function<void(Simulator&)> on_start;
  double service = 0.0;
  std::vector<Handled> log;
  std::vector<std::pair<NodeId, int>> timers;
  std::function<void(Simulator&, NodeId, const Envelope&)> react;

  void start(Simulator& sim) override {
    if (on_start) on_start(sim);
  }
  double service_time(NodeId, const Envelope&) override { return service; }
  void handle(Simulator& sim, NodeId node, Envelope env) override {
    double age = 0.0;
    if (const auto* a = std::get_if<AgeBroadcast>(&env.msg)) age = a->age;
    log.push_back({node, env.src, sim.now(), env.sent_at, age});
    if (react) react(sim, node, env);
  }
  void on_timer(Simulator& sim, NodeId node, int tag) override {
    timers.emplace_back(node, tag);
    (void)sim;
  }
};

LinkModel aws_links(std::vector<int> locations, double bw = 100e6) {
  LinkModel links(LatencyMatrix::aws_reference(), bw);
  for (int loc : locations) links.add_node(NodeRole::kServer, loc);
  return links;
}

constexpr std::size_t kAgeBytes = 72;  // header + one age

}  // namespace

TEST_CASE("latency lookups match the reference matrix") {
  auto links = aws_links({kHongkong, kParis, kSydney, kCalifornia});
  CHECK(links.latency_ms(1, 2) == 278.83);
  CHECK(links.latency_ms(0, 0) == 1.41);
  // asymmetry is kept
  CHECK(links.latency_ms(0, 1) == 194.9);
  CHECK(links.latency_ms(1, 0) == 197.91);
}

TEST_CASE("1 MB at 100 Mbps takes 80 ms") {
  auto links = aws_links({kParis});
  CHECK(links.transfer_ms(1'000'000) == doctest::Approx(80.0).epsilon(1e-12));
}

TEST_CASE("Paris to Sydney delivery is latency plus transfer") {
  Recorder p;
  Simulator sim(aws_links({kParis, kSydney}));
  p.on_start = [](Simulator& s) { s.send(0, 1, AgeBroadcast{3.0}); };
  auto r = sim.run(p, {1e6, {}});
  REQUIRE(p.log.size() == 1);
  const double transfer = kAgeBytes * 8.0 / 100e6 * 1000.0;
  CHECK(p.log[0].at == doctest::Approx(278.83 + transfer).epsilon(1e-12));
  CHECK(r.early_stop);
  CHECK(sim.links().bytes(LinkClass::kServerServer) == kAgeBytes);
}

TEST_CASE("client to home server in Hongkong costs the diagonal entry") {
  Recorder p;
  LinkModel links(LatencyMatrix::aws_reference(), 100e6);
  links.add_node(NodeRole::kServer, kHongkong);
  links.add_node(NodeRole::kClient, kHongkong);
  Simulator sim(std::move(links));
  p.on_start = [](Simulator& s) { s.send(1, 0, AgeBroadcast{0.0}); };
  sim.run(p, {1e6, {}});
  REQUIRE(p.log.size() == 1);
  CHECK(p.log[0].at == doctest::Approx(1.41 + kAgeBytes * 8.0 / 1e5).epsilon(1e-12));
  CHECK(sim.links().bytes(LinkClass::kServerClient) == kAgeBytes);
  CHECK(sim.links().bytes(LinkClass::kServerServer) == 0);
}

TEST_CASE("unknown nodes are config errors") {
  Simulator sim(aws_links({kParis}));
  CHECK_THROWS_AS(sim.send(0, 5, AgeBroadcast{}), ConfigError);
  LinkModel links(LatencyMatrix::aws_reference(), 100e6);
  CHECK_THROWS_AS(links.add_node(NodeRole::kServer, 7), ConfigError);
  CHECK_THROWS_AS(LinkModel(LatencyMatrix::aws_reference(), 0.0), ConfigError);
}

TEST_CASE("FIFO clamp keeps a small message behind a large one") {
  Recorder p;
  Simulator sim(aws_links({kParis, kSydney}, 1e6));  // slow link so size matters
  auto big = share(ModelVector(std::vector<double>(25'000, 0.0)));
  p.on_start = [&](Simulator& s) {
    s.send(0, 1, ModelBroadcast{big, 1.0, 1});
    s.send(0, 1, AgeBroadcast{2.0});
  };
  sim.run(p, {1e7, {}});
  REQUIRE(p.log.size() == 2);
  CHECK(p.log[0].at <= p.log[1].at);
  CHECK(p.log[1].age == 2.0);
  // the clamp does not change byte accounting
  CHECK(sim.links().bytes(LinkClass::kServerServer) == payload_bytes(ModelBroadcast{big, 1.0, 1}) + kAgeBytes);
  CHECK(sim.payload_total() == sim.links().total_bytes());
}

TEST_CASE("delivery is never earlier than send time plus latency") {
  Recorder p;
  Simulator sim(aws_links({kHongkong, kParis, kSydney, kCalifornia}));
  p.on_start = [](Simulator& s) {
    for (int src = 0; src < 4; ++src) {
      for (int dst = 0; dst < 4; ++dst) {
        if (src != dst) s.send(src, dst, AgeBroadcast{static_cast<double>(src)}, 3.0 * src);
      }
    }
  };
  sim.run(p, {1e6, {}});
  CHECK(p.log.size() == 12);
  for (const auto& h : p.log) CHECK(h.at >= h.sent_at + sim.links().latency_ms(h.src, h.node));
}

TEST_CASE("events at the same time are handled in send order") {
  Recorder p;
  Simulator sim(aws_links({kParis, kParis}));
  p.on_start = [](Simulator& s) {
    for (int i = 0; i < 5; ++i) s.schedule_timer(1, 10.0, i);
  };
  sim.run(p, {100.0, {}});
  REQUIRE(p.timers.size() == 5);
  for (int i = 0; i < 5; ++i) CHECK(p.timers[static_cast<std::size_t>(i)].second == i);
}

TEST_CASE("burst of k simultaneous arrivals peaks the queue at k - 1") {
  for (int k : {1, 2, 5, 9}) {
    Recorder p;
    p.service = 2.0;
    LinkModel links(LatencyMatrix::aws_reference(), 100e6);
    links.add_node(NodeRole::kServer, kCalifornia);
    for (int i = 0; i < k; ++i) links.add_node(NodeRole::kClient, kCalifornia);
    Simulator sim(std::move(links));
    p.on_start = [k](Simulator& s) {
      for (int i = 1; i <= k; ++i) s.send(i, 0, AgeBroadcast{});
    };
    sim.run(p, {1e6, {}});
    CHECK(sim.peak_queue_length(0) == static_cast<std::size_t>(k - 1));
    CHECK(p.log.size() == static_cast<std::size_t>(k));
    // service is sequential: completions 2 ms apart
    for (std::size_t i = 1; i < p.log.size(); ++i) CHECK(p.log[i].at - p.log[i - 1].at == doctest::Approx(2.0));
  }
}

TEST_CASE("no queue builds when arrivals are slower than service") {
  Recorder p;
  p.service = 2.0;
  Simulator sim(aws_links({kCalifornia, kCalifornia}));
  p.on_start = [](Simulator& s) {
    for (int i = 0; i < 10; ++i) s.send(1, 0, AgeBroadcast{}, 5.0 * i);
  };
  sim.run(p, {1e6, {}});
  CHECK(sim.peak_queue_length(0) == 0);
}

TEST_CASE("in-flight counts run from send to handle") {
  Recorder p;
  p.service = 2.0;
  Simulator sim(aws_links({kParis, kSydney}));
  std::vector<std::int64_t> seen;
  p.on_start = [](Simulator& s) { s.send(0, 1, AgeBroadcast{}); };
  sim.set_event_observer([&] { seen.push_back(sim.in_flight(MessageKind::kAgeBroadcast)); });
  CHECK(sim.in_flight(MessageKind::kAgeBroadcast) == 0);
  sim.run(p, {1e6, {}});
  // delivered (still in service) then handled
  CHECK(seen == std::vector<std::int64_t>{1, 0});
  CHECK(sim.sent_count(MessageKind::kAgeBroadcast) == 1);
}

TEST_CASE("empty system stops immediately and early") {
  Recorder p;
  Simulator sim(aws_links({}));
  int hooks = 0;
  sim.add_periodic(100.0, [&](double) { ++hooks; });
  auto r = sim.run(p, {1000.0, {}});
  CHECK(r.early_stop);
  CHECK(r.events == 0);
  CHECK(hooks == 0);
  CHECK(r.end_time_ms == 0.0);
}

TEST_CASE("horizon stops the run and periodic hooks fire on the grid") {
  Recorder p;
  Simulator sim(aws_links({kParis}));
  std::vector<double> at;
  sim.add_periodic(100.0, [&](double t) { at.push_back(t); });
  // a self-rescheduling timer keeps the system alive forever
  struct Ticker : Recorder {
    void on_timer(Simulator& s, NodeId n, int tag) override { s.schedule_timer(n, 30.0, tag); }
  } t;
  t.on_start = [](Simulator& s) { s.schedule_timer(0, 30.0, 0); };
  auto r = sim.run(t, {450.0, {}});
  CHECK_FALSE(r.early_stop);
  CHECK(r.end_time_ms == 450.0);
  CHECK(at == std::vector<double>{100.0, 200.0, 300.0, 400.0});
}

TEST_CASE("stop predicate and request_stop end the run") {
  Recorder p;
  Simulator sim(aws_links({kParis, kParis}));
  p.on_start = [](Simulator& s) {
    for (int i = 0; i < 10; ++i) s.send(0, 1, AgeBroadcast{static_cast<double>(i)}, i);
  };
  auto r = sim.run(p, {1e6, [&] { return p.log.size() >= 3; }});
  CHECK(r.predicate_stop);
  CHECK(p.log.size() == 3);

  Recorder q;
  Simulator sim2(aws_links({kParis, kParis}));
  q.on_start = p.on_start;
  q.react = [](Simulator& s, NodeId, const Envelope&) { s.request_stop(); };
  auto r2 = sim2.run(q, {1e6, {}});
  CHECK(r2.predicate_stop);
  CHECK(q.log.size() == 1);
}

TEST_CASE("requeued envelopes are served first and counted in flight again") {
  Recorder p;
  p.service = 1.0;
  Simulator sim(aws_links({kParis, kParis}));
  bool requeued = false;
  p.on_start = [](Simulator& s) {
    s.send(1, 0, AgeBroadcast{1.0});
    s.send(1, 0, AgeBroadcast{2.0}, 50.0);
  };
  p.react = [&](Simulator& s, NodeId node, const Envelope& env) {
    if (!requeued) {
      requeued = true;
      Envelope again = env;
      std::get<AgeBroadcast>(again.msg).age = 10.0;
      s.requeue_front(node, {again});
      CHECK(s.in_flight(MessageKind::kAgeBroadcast) == 2);
    }
  };
  sim.run(p, {1e6, {}});
  REQUIRE(p.log.size() == 3);
  CHECK(p.log[1].age == 10.0);
  CHECK(p.log[2].age == 2.0);
  CHECK(sim.in_flight(MessageKind::kAgeBroadcast) == 0);
}

TEST_CASE("trace hash is a pure function of the event sequence") {
  auto once = [](double delay) {
    Recorder p;
    p.service = 2.0;
    Simulator sim(aws_links({kHongkong, kParis, kSydney}));
    p.on_start = [delay](Simulator& s) {
      for (int i = 0; i < 3; ++i) s.send(i, (i + 1) % 3, AgeBroadcast{}, delay * i);
    };
    return sim.run(p, {1e6, {}}).trace_hash;
  };
  CHECK(once(1.0) == once(1.0));
  CHECK(once(1.0) != once(2.0));
}

TEST_CASE("fnv1a matches the published test vectors") {
  CHECK(fnv1a("", 0) == 0xcbf29ce484222325ULL);
  CHECK(fnv1a("a", 1) == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a("foobar", 6) == 0x85944171f73967e8ULL);
}

TEST_CASE("fixed compute costs per procedure") {
  ComputeProfile c;
  CHECK(c.duration(Procedure::kSpykerAggregation) == 2.0);
  CHECK(c.duration(Procedure::kFedAsyncAggregation) == 2.0);
  CHECK(c.duration(Procedure::kFedAvgAggregation) == 15.0);
  CHECK(c.duration(Procedure::kHierFavgAggregation) == 15.0);
  CHECK(c.duration(Procedure::kLocalTraining) == 200.0);
  CHECK(impose_training(150.0, 3) == 450.0);
}

TEST_CASE("training delays are positive, seeded and reproducible") {
  ComputeProfile c;
  c.training_sigma_ms = 200.0;  // wide enough that raw draws go negative
  spyker::Rng a(42), b(42);
  auto da = c.sample_training_delays(500, a);
  auto db = c.sample_training_delays(500, b);
  CHECK(da == db);
  for (double d : da) CHECK(d > 0.0);

  ComputeProfile fixed;
  fixed.training_model = TrainingDelayModel::kFixed;
  spyker::Rng r(1);
  for (double d : fixed.sample_training_delays(4, r)) CHECK(d == 200.0);
}

TEST_CASE("fast client subset trains faster by the speedup") {
  ComputeProfile c;
  c.training_model = TrainingDelayModel::kFixed;
  c.fast_client_fraction = 0.25;
  c.fast_client_speedup = 4.0;
  spyker::Rng r(3);
  auto d = c.sample_training_delays(40, r);
  int fast = 0;
  for (double v : d) {
    if (v == 50.0) ++fast;
    else CHECK(v == 200.0);
  }
  CHECK(fast == 10);
}

TEST_CASE("uniform latency keeps the mean of the reference matrix") {
  auto m = LatencyMatrix::aws_reference();
  auto u = m.uniform_of_mean();
  CHECK(u.mean() == doctest::Approx(m.mean()).epsilon(1e-12));
  for (const auto& row : u.ms) {
    for (double v : row) CHECK(v == u.ms[0][0]);
  }
}

TEST_CASE("manifest round-trips through json") {
  RunManifest m;
  m.master_seed = 7;
  m.node_seeds = {1, 2, 3};
  m.ring_order = {2, 0, 1, 3};
  m.config = nlohmann::json{{"a", 1}};
  m.config_hash = config_hash(m.config);
  const nlohmann::json j = m;
  const auto back = j.get<RunManifest>();
  CHECK(back.master_seed == 7);
  CHECK(back.node_seeds == m.node_seeds);
  CHECK(back.ring_order == m.ring_order);
  CHECK(back.config_hash == m.config_hash);
  CHECK(back.code_version == m.code_version);
  CHECK(config_hash(nlohmann::json{{"a", 2}}) != m.config_hash);
}
