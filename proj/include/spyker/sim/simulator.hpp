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
#include <deque>
#include <functional>
#include <queue>
#include <variant>
#include <vector>

#include "spyker/protocol/messages.hpp"
#include "spyker/sim/link_model.hpp"

namespace spyker::sim {

using protocol::Message;

struct Envelope {
  NodeId src = -1;
  NodeId dst = -1;
  Message msg;
  double sent_at = 0.0;
};

class Simulator;

/// The protocol side of a simulation. Ingress messages at a node are served
/// one at a time in arrival order; service_time() is the simulated compute
/// cost of a message and handle() runs when that service completes.
class Process {
 public:
  virtual ~Process() = default;
  virtual void start(Simulator& sim) = 0;
  virtual double service_time(NodeId node, const Envelope& env) = 0;
  virtual void handle(Simulator& sim, NodeId node, Envelope env) = 0;
  virtual void on_timer(Simulator& /*sim*/, NodeId /*node*/, int /*tag*/) {}
};

struct StopCondition {
  double horizon_ms = 0.0;
  // Checked after every handled message; the run stops once it returns true.
  std::function<bool()> predicate;
};

struct RunResult {
  double end_time_ms = 0.0;
  std::uint64_t events = 0;
  bool early_stop = false;      // ran out of work before the horizon
  bool predicate_stop = false;  // stop predicate or request_stop()
  std::uint64_t trace_hash = 0;
};

class Simulator {
 public:
  explicit Simulator(LinkModel links);

  LinkModel& links() noexcept { return links_; }
  const LinkModel& links() const noexcept { return links_; }
  double now() const noexcept { return now_; }

  // Sends a message `delay_ms` from now (e.g. after a local computation).
  void send(NodeId src, NodeId dst, Message msg, double delay_ms = 0.0);
  void schedule_timer(NodeId node, double delay_ms, int tag);
  // Puts messages back at the head of a node's ingress queue, in order.
  void requeue_front(NodeId node, std::vector<Envelope> envs);

  // Hooks at t = interval, 2*interval, ... up to the horizon. They do not
  // keep the simulation alive on their own.
  void add_periodic(double interval_ms, std::function<void(double)> fn);
  // Called after each event with the current time.
  void set_event_observer(std::function<void()> fn) { observer_ = std::move(fn); }
  // Called right before a message is handled.
  void set_handle_tracer(std::function<void(const Envelope&)> fn) { tracer_ = std::move(fn); }

  void request_stop() noexcept { stop_requested_ = true; }

  RunResult run(Process& process, const StopCondition& stop);

  std::size_t queue_length(NodeId node) const;
  std::size_t peak_queue_length(NodeId node) const;
  // Messages sent but not yet handled, by kind.
  std::int64_t in_flight(protocol::MessageKind k) const { return in_flight_[static_cast<std::size_t>(k)]; }
  std::uint64_t sent_count(protocol::MessageKind k) const { return sent_[static_cast<std::size_t>(k)]; }
  std::uint64_t payload_total() const noexcept { return payload_total_; }

 private:
  struct Deliver {
    Envelope env;
  };
  struct ServiceDone {
    NodeId node;
  };
  struct Timer {
    NodeId node;
    int tag;
  };
  struct Periodic {
    std::size_t hook;
  };
  struct Event {
    double time;
    std::uint64_t seq;
    std::variant<Deliver, ServiceDone, Timer, Periodic> kind;
  };
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      return a.time != b.time ? a.time > b.time : a.seq > b.seq;
    }
  };
  struct NodeQueue {
    std::deque<Envelope> waiting;
    bool busy = false;
    Envelope in_service;
    std::size_t peak = 0;
  };

  void push(double time, decltype(Event::kind) kind);
  void ensure_node(NodeId n);
  void try_start(NodeId n);
  void finish(NodeId n, Envelope env);
  void touch(NodeId n);
  void hash_event(const Event& e);

  LinkModel links_;
  Process* process_ = nullptr;
  double now_ = 0.0;
  double horizon_ = 0.0;
  std::uint64_t seq_ = 0;
  std::uint64_t pending_ = 0;
  std::uint64_t hash_ = 0;
  bool stop_requested_ = false;
  std::priority_queue<Event, std::vector<Event>, Later> events_;
  std::vector<NodeQueue> nodes_;
  std::vector<std::pair<double, std::function<void(double)>>> periodic_;
  std::function<void()> observer_;
  std::function<void(const Envelope&)> tracer_;
  std::int64_t in_flight_[protocol::kMessageKinds] = {};
  std::uint64_t sent_[protocol::kMessageKinds] = {};
  std::uint64_t payload_total_ = 0;
};

// FNV-1a over raw bytes, chained from `h`.
std::uint64_t fnv1a(const void* data, std::size_t n, std::uint64_t h = 0xcbf29ce484222325ULL);

}  // namespace spyker::sim
