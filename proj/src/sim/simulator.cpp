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

#include "spyker/sim/simulator.hpp"

#include <algorithm>
#include <cstring>

#include "spyker/errors.hpp"

namespace spyker::sim {

std::uint64_t fnv1a(const void* data, std::size_t n, std::uint64_t h) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

Simulator::Simulator(LinkModel links) : links_(std::move(links)) {}

void Simulator::push(double time, decltype(Event::kind) kind) {
  if (!std::holds_alternative<Periodic>(kind)) ++pending_;
  events_.push(Event{time, seq_++, std::move(kind)});
}

void Simulator::ensure_node(NodeId n) {
  if (n < 0 || static_cast<std::size_t>(n) >= links_.node_count()) {
    throw ConfigError("topology", "unknown node " + std::to_string(n));
  }
  if (nodes_.size() < links_.node_count()) nodes_.resize(links_.node_count());
}

void Simulator::send(NodeId src, NodeId dst, Message msg, double delay_ms) {
  ensure_node(src);
  ensure_node(dst);
  const std::size_t bytes = protocol::payload_bytes(msg);
  const double sent_at = now_ + delay_ms;
  const double at = links_.schedule(src, dst, bytes, sent_at);
  const auto k = static_cast<std::size_t>(protocol::kind_of(msg));
  ++in_flight_[k];
  ++sent_[k];
  payload_total_ += bytes;
  push(at, Deliver{Envelope{src, dst, std::move(msg), sent_at}});
}

void Simulator::schedule_timer(NodeId node, double delay_ms, int tag) {
  ensure_node(node);
  push(now_ + delay_ms, Timer{node, tag});
}

void Simulator::requeue_front(NodeId node, std::vector<Envelope> envs) {
  ensure_node(node);
  auto& q = nodes_[static_cast<std::size_t>(node)].waiting;
  for (const auto& e : envs) ++in_flight_[static_cast<std::size_t>(protocol::kind_of(e.msg))];
  q.insert(q.begin(), std::make_move_iterator(envs.begin()), std::make_move_iterator(envs.end()));
}

void Simulator::add_periodic(double interval_ms, std::function<void(double)> fn) {
  if (!(interval_ms > 0.0)) throw ConfigError("eval_interval_ms", "periodic interval must be > 0");
  periodic_.emplace_back(interval_ms, std::move(fn));
}

std::size_t Simulator::queue_length(NodeId node) const {
  const auto i = static_cast<std::size_t>(node);
  return i < nodes_.size() ? nodes_[i].waiting.size() : 0;
}

std::size_t Simulator::peak_queue_length(NodeId node) const {
  const auto i = static_cast<std::size_t>(node);
  return i < nodes_.size() ? nodes_[i].peak : 0;
}

void Simulator::finish(NodeId n, Envelope env) {
  --in_flight_[static_cast<std::size_t>(protocol::kind_of(env.msg))];
  if (tracer_) tracer_(env);
  process_->handle(*this, n, std::move(env));
}

void Simulator::try_start(NodeId n) {
  auto& q = nodes_[static_cast<std::size_t>(n)];
  while (!q.busy && !q.waiting.empty()) {
    Envelope env = std::move(q.waiting.front());
    q.waiting.pop_front();
    const double st = process_->service_time(n, env);
    if (st > 0.0) {
      q.busy = true;
      q.in_service = std::move(env);
      push(now_ + st, ServiceDone{n});
    } else {
      finish(n, std::move(env));
    }
  }
}

void Simulator::touch(NodeId n) {
  auto& q = nodes_[static_cast<std::size_t>(n)];
  q.peak = std::max(q.peak, q.waiting.size());
}

void Simulator::hash_event(const Event& e) {
  std::uint64_t words[5] = {0, e.seq, e.kind.index(), 0, 0};
  std::memcpy(&words[0], &e.time, sizeof(double));
  if (const auto* d = std::get_if<Deliver>(&e.kind)) {
    words[3] = (static_cast<std::uint64_t>(static_cast<std::uint32_t>(d->env.src)) << 32) |
               static_cast<std::uint32_t>(d->env.dst);
    words[4] = static_cast<std::uint64_t>(protocol::kind_of(d->env.msg));
  } else if (const auto* s = std::get_if<ServiceDone>(&e.kind)) {
    words[3] = static_cast<std::uint64_t>(s->node);
  } else if (const auto* t = std::get_if<Timer>(&e.kind)) {
    words[3] = static_cast<std::uint64_t>(t->node);
    words[4] = static_cast<std::uint64_t>(t->tag);
  }
  hash_ = fnv1a(words, sizeof(words), hash_);
}

RunResult Simulator::run(Process& process, const StopCondition& stop) {
  process_ = &process;
  horizon_ = stop.horizon_ms;
  hash_ = 0xcbf29ce484222325ULL;
  stop_requested_ = false;
  if (nodes_.size() < links_.node_count()) nodes_.resize(links_.node_count());
  for (std::size_t i = 0; i < periodic_.size(); ++i) {
    if (periodic_[i].first <= horizon_) push(periodic_[i].first, Periodic{i});
  }
  process.start(*this);

  RunResult r;
  while (!events_.empty()) {
    if (pending_ == 0) {
      r.early_stop = true;
      break;
    }
    if (events_.top().time > horizon_) {
      now_ = horizon_;
      break;
    }
    Event e = events_.top();
    events_.pop();
    now_ = e.time;
    hash_event(e);
    if (const auto* per = std::get_if<Periodic>(&e.kind)) {
      auto& [interval, fn] = periodic_[per->hook];
      fn(now_);
      if (now_ + interval <= horizon_) push(now_ + interval, Periodic{per->hook});
    } else {
      --pending_;
      ++r.events;
      if (auto* d = std::get_if<Deliver>(&e.kind)) {
        const NodeId dst = d->env.dst;
        nodes_[static_cast<std::size_t>(dst)].waiting.push_back(std::move(d->env));
        try_start(dst);
        touch(dst);
      } else if (const auto* s = std::get_if<ServiceDone>(&e.kind)) {
        auto& q = nodes_[static_cast<std::size_t>(s->node)];
        q.busy = false;
        finish(s->node, std::move(q.in_service));
        try_start(s->node);
        touch(s->node);
      } else if (const auto* t = std::get_if<Timer>(&e.kind)) {
        process.on_timer(*this, t->node, t->tag);
        try_start(t->node);
        touch(t->node);
      }
    }
    if (observer_) observer_();
    if (stop_requested_ || (stop.predicate && stop.predicate())) {
      r.predicate_stop = true;
      break;
    }
  }
  if (events_.empty() && pending_ == 0 && !r.predicate_stop) r.early_stop = true;
  r.end_time_ms = now_;
  r.trace_hash = hash_;
  process_ = nullptr;
  return r;
}

}  // namespace spyker::sim
