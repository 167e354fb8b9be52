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

#include "spyker/metrics/runner.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>

#include "spyker/data/loaders.hpp"
#include "spyker/data/partition.hpp"
#include "spyker/errors.hpp"
#include "spyker/protocol/systems.hpp"
#include "spyker/rng.hpp"

namespace spyker::metrics {

namespace fs = std::filesystem;
using nlohmann::json;
using protocol::Algorithm;

fs::path data_root() {
  if (const char* env = std::getenv("SPYKER_DATA_DIR"); env && *env) return env;
  return "/root/data";
}

namespace {

std::shared_ptr<const data::Dataset> cached(const std::string& key, const std::function<data::Dataset()>& load) {
  static std::map<std::string, std::shared_ptr<const data::Dataset>> cache;
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  auto d = std::make_shared<const data::Dataset>(load());
  cache.emplace(key, d);
  return d;
}

std::shared_ptr<const data::Dataset> head(std::shared_ptr<const data::Dataset> d, std::size_t limit) {
  if (limit == 0 || limit >= d->size()) return d;
  std::vector<std::size_t> idx(limit);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return std::make_shared<const data::Dataset>(d->subset(idx, d->name));
}

double accuracy_of(const model::ModelArch& arch, const protocol::SharedModel& m, const data::Dataset& test) {
  return data::evaluate(model::TinyModel::with_params(arch, *m), test);
}

std::uint64_t bid_of(const protocol::Message& m) {
  if (const auto* b = std::get_if<protocol::ModelBroadcast>(&m)) return b->bid;
  if (const auto* t = std::get_if<protocol::TokenPass>(&m)) return t->token.bid;
  return 0;
}

json ages_of(const protocol::Message& m) {
  struct V {
    json operator()(const protocol::ModelDispatch& d) const { return d.age; }
    json operator()(const protocol::ClientUpdate& u) const { return u.sent_age; }
    json operator()(const protocol::ModelBroadcast& b) const { return b.age; }
    json operator()(const protocol::AgeBroadcast& a) const { return a.age; }
    json operator()(const protocol::TokenPass& t) const { return t.token.ages; }
  };
  return std::visit(V{}, m);
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

DataSplit load_data(const ExperimentConfig& c) {
  const auto& d = c.dataset;
  if (d.kind == "synthetic") {
    data::SyntheticSpec spec;
    spec.seed = derive_seed(c.seed, seed_purpose::kSynthetic, 0);
    spec.n_samples = d.n_train + d.n_test;
    spec.dim = d.dim;
    spec.n_classes = d.n_classes;
    spec.separation = d.separation;
    spec.blob_std = d.blob_std;
    spec.offset = d.offset;
    const auto full = data::synthetic_dataset(spec);
    std::vector<std::size_t> tr(d.n_train), te(d.n_test);
    std::iota(tr.begin(), tr.end(), std::size_t{0});
    std::iota(te.begin(), te.end(), d.n_train);
    return {std::make_shared<const data::Dataset>(full.subset(tr, "synthetic-train")),
            std::make_shared<const data::Dataset>(full.subset(te, "synthetic-test"))};
  }
  const fs::path dir = d.data_dir.empty() ? data_root() / (d.kind == "mnist" ? "mnist" : "cifar10") : fs::path(d.data_dir);
  std::shared_ptr<const data::Dataset> train, test;
  if (d.kind == "mnist") {
    train = cached(dir.string() + "#train", [&] {
      return data::load_idx(dir / "train-images-idx3-ubyte", dir / "train-labels-idx1-ubyte", "mnist-train");
    });
    test = cached(dir.string() + "#test", [&] {
      return data::load_idx(dir / "t10k-images-idx3-ubyte", dir / "t10k-labels-idx1-ubyte", "mnist-test");
    });
  } else {
    train = cached(dir.string() + "#train", [&] {
      std::vector<fs::path> batches;
      for (int i = 1; i <= 5; ++i) batches.push_back(dir / ("data_batch_" + std::to_string(i) + ".bin"));
      return data::load_cifar10_gray16(batches, "cifar10-train");
    });
    test = cached(dir.string() + "#test", [&] { return data::load_cifar10_gray16({dir / "test_batch.bin"}, "cifar10-test"); });
  }
  return {head(train, d.train_limit), head(test, d.test_limit)};
}

std::optional<double> time_to(const std::vector<Row>& rows, double threshold) {
  for (const auto& r : rows) {
    if (r.accuracy >= threshold) return r.sim_time_ms;
  }
  return std::nullopt;
}

std::optional<long> updates_to(const std::vector<Row>& rows, double threshold) {
  for (const auto& r : rows) {
    if (r.accuracy >= threshold) return r.updates_processed;
  }
  return std::nullopt;
}

RunOutput run_experiment(const ExperimentConfig& c, const RunOptions& opts) {
  c.validate();
  const DataSplit ds = load_data(c);
  const Algorithm alg = c.algorithm;
  const bool single = protocol::is_single_server(alg);
  const int regions = c.topology.n_servers;
  const int n_servers = single ? 1 : regions;
  const int nc = c.topology.n_clients;

  std::vector<int> region;
  const auto per_region = c.clients_per_region();
  for (int r = 0; r < regions; ++r) region.insert(region.end(), static_cast<std::size_t>(per_region[static_cast<std::size_t>(r)]), r);

  const auto shards = data::partition_noniid(
      *ds.train, {nc, c.labels_per_client, derive_seed(c.seed, seed_purpose::kPartition, 0)});

  sim::LatencyMatrix matrix = c.network.latency == "custom" ? c.network.custom : sim::LatencyMatrix::aws_reference();
  if (c.network.latency == "uniform") matrix = matrix.uniform_of_mean();
  sim::LinkModel links(matrix, c.network.bandwidth_bps);
  for (int s = 0; s < n_servers; ++s) {
    const auto& loc = single ? c.topology.single_server_location : c.topology.server_locations[static_cast<std::size_t>(s)];
    links.add_node(sim::NodeRole::kServer, matrix.index_of(loc));
  }
  for (int i = 0; i < nc; ++i) {
    links.add_node(sim::NodeRole::kClient,
                   matrix.index_of(c.topology.server_locations[static_cast<std::size_t>(region[static_cast<std::size_t>(i)])]));
  }
  if (alg == Algorithm::kHierFavg) links.add_node(sim::NodeRole::kCloud, matrix.index_of(c.topology.cloud_location));
  links.set_count_window_start(c.metrics.bytes_window_start_ms);

  Rng delay_rng(derive_seed(c.seed, seed_purpose::kClientDelay, 0));
  const auto delays = c.compute.sample_training_delays(nc, delay_rng);

  model::ModelArch arch{c.model_kind, ds.train->dim, c.hidden_dim, ds.train->n_classes};
  sim::RunManifest manifest;
  manifest.master_seed = c.seed;
  std::vector<protocol::ClientState> clients;
  clients.reserve(static_cast<std::size_t>(nc));
  for (int i = 0; i < nc; ++i) {
    const auto seed = derive_seed(c.seed, seed_purpose::kClientShuffle, static_cast<std::uint64_t>(i));
    manifest.node_seeds.push_back(seed);
    protocol::ClientState cs;
    cs.id = i;
    cs.home_server = single ? 0 : region[static_cast<std::size_t>(i)];
    cs.arch = arch;
    cs.data = ds.train->subset(shards[static_cast<std::size_t>(i)], "client-" + std::to_string(i));
    cs.epochs = c.hyper.local_epochs;
    cs.batch_size = c.hyper.batch_size;
    cs.training_delay_ms = delays[static_cast<std::size_t>(i)];
    cs.rng = Rng(seed);
    clients.push_back(std::move(cs));
  }

  std::vector<model::ModelVector> init;
  const int n_init = c.shared_init ? 1 : n_servers;
  for (int s = 0; s < n_init; ++s) {
    init.push_back(model::TinyModel::random_init(arch, derive_seed(c.seed, seed_purpose::kModelInit, static_cast<std::uint64_t>(s))).params);
  }

  std::vector<int> ring(static_cast<std::size_t>(n_servers));
  std::iota(ring.begin(), ring.end(), 0);
  Rng ring_rng(derive_seed(c.seed, seed_purpose::kRing, 0));
  fisher_yates(std::span<int>(ring), ring_rng);
  manifest.ring_order = ring;
  manifest.config = config_to_json(c);
  manifest.config_hash = sim::config_hash(manifest.config);

  protocol::SystemConfig sc;
  sc.n_servers = n_servers;
  for (const auto& cs : clients) sc.client_home.push_back(cs.home_server);
  sc.hyper = c.hyper;
  if (c.h_inter_auto) sc.hyper.h_inter = model::HyperParams::default_h_inter(nc, regions);
  sc.compute = c.compute;
  sc.ring_order = ring;
  sc.hierfavg_period = c.hierfavg_period;
  sc.fedavg_fraction = c.fedavg_fraction;
  sc.selection_seed = derive_seed(c.seed, seed_purpose::kClientSelection, 0);
  auto system = protocol::make_system(alg, sc, std::move(clients), std::move(init));
  const auto server_nodes = system->server_nodes();

  sim::Simulator sim(std::move(links));
  MetricsFrame f;
  f.algorithm = protocol::to_string(alg);
  f.n_servers = n_servers;
  f.client_home = region;
  f.client_delay_ms = delays;

  const data::Dataset& test = *ds.test;
  auto system_accuracy = [&]() {
    const auto models = system->server_models();
    switch (c.eval.target) {
      case EvalTarget::kAgeWeighted:
        return accuracy_of(arch, system->system_model(), test);
      case EvalTarget::kAverage:
        return accuracy_of(arch, protocol::share(protocol::age_weighted_average(models, std::vector<protocol::Age>(models.size(), 0.0))), test);
      case EvalTarget::kBest: {
        double best = 0.0;
        for (const auto& m : models) best = std::max(best, accuracy_of(arch, m, test));
        return best;
      }
    }
    return 0.0;
  };
  auto queues_now = [&]() {
    std::vector<std::size_t> q;
    for (auto n : server_nodes) q.push_back(sim.queue_length(n));
    return q;
  };

  sim.add_periodic(c.eval.interval_ms, [&](double t) {
    Row r;
    r.sim_time_ms = t;
    r.updates_processed = system->updates_processed();
    r.accuracy = system_accuracy();
    if (c.eval.per_server) {
      for (const auto& m : system->server_models()) r.server_accuracy.push_back(accuracy_of(arch, m, test));
    }
    r.queue = queues_now();
    f.rows.push_back(std::move(r));
    if (c.stop.target_accuracy && f.rows.back().accuracy >= *c.stop.target_accuracy) sim.request_stop();
  });
  if (c.metrics.queue_sample_ms > 0.0) {
    sim.add_periodic(c.metrics.queue_sample_ms, [&](double t) { f.queue_samples.push_back({t, queues_now()}); });
  }

  std::ofstream trace;
  if (!opts.trace_path.empty()) {
    trace.open(opts.trace_path);
    if (!trace) throw ConfigError("metrics.trace", "cannot open " + opts.trace_path.string());
  }
  if (opts.observer) sim.set_event_observer([&] { opts.observer(sim, *system); });
  if (trace.is_open() || opts.tracer) {
    sim.set_handle_tracer([&](const sim::Envelope& e) {
      if (opts.tracer) opts.tracer(e);
      if (!trace.is_open()) return;
      json line = {{"t", sim.now()},
                   {"node", e.dst},
                   {"src", e.src},
                   {"kind", protocol::to_string(protocol::kind_of(e.msg))},
                   {"bid", bid_of(e.msg)},
                   {"ages", ages_of(e.msg)}};
      trace << line.dump() << '\n';
    });
  }

  sim::StopCondition stop;
  stop.horizon_ms = c.stop.horizon_ms;
  if (c.stop.max_updates) {
    const long cap = *c.stop.max_updates;
    stop.predicate = [&, cap] { return system->updates_processed() >= cap; };
  }
  const auto result = sim.run(*system, stop);
  if (opts.on_finish) opts.on_finish(sim, *system);

  auto& s = f.summary;
  s.time_to_90 = time_to(f.rows, 0.90);
  s.time_to_95 = time_to(f.rows, 0.95);
  s.updates_to_90 = updates_to(f.rows, 0.90);
  s.target_accuracy = c.stop.target_accuracy;
  if (c.stop.target_accuracy) {
    s.time_to_target = time_to(f.rows, *c.stop.target_accuracy);
    s.updates_to_target = updates_to(f.rows, *c.stop.target_accuracy);
  }
  s.final_accuracy = system_accuracy();
  s.end_time_ms = result.end_time_ms;
  s.updates_processed = system->updates_processed();
  s.events = result.events;
  s.early_stop = result.early_stop;
  const auto& lm = sim.links();
  s.bytes_server_server = lm.bytes(sim::LinkClass::kServerServer);
  s.bytes_server_client = lm.bytes(sim::LinkClass::kServerClient);
  s.messages_server_server = lm.messages(sim::LinkClass::kServerServer);
  s.messages_server_client = lm.messages(sim::LinkClass::kServerClient);
  for (auto n : server_nodes) s.peak_queue.push_back(sim.peak_queue_length(n));
  s.trace_hash = hex64(result.trace_hash);
  f.client_updates = system->client_updates();

  if (opts.verbose) {
    std::cerr << "[run] " << f.algorithm << " seed=" << c.seed << " clients=" << nc << " t_end=" << s.end_time_ms
              << "ms updates=" << s.updates_processed << " acc=" << s.final_accuracy << '\n';
  }
  return {std::move(f), std::move(manifest)};
}

// ---- files

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

void write_timeseries_csv(const fs::path& file, const MetricsFrame& f) {
  std::ofstream out(file);
  if (!out) throw ConfigError("out_dir", "cannot write " + file.string());
  const std::size_t n_acc = f.rows.empty() ? 0 : f.rows.front().server_accuracy.size();
  const std::size_t n_q = f.rows.empty() ? static_cast<std::size_t>(f.n_servers) : f.rows.front().queue.size();
  out << "sim_time_ms,updates_processed,accuracy";
  for (std::size_t i = 0; i < n_acc; ++i) out << ",accuracy_s" << i;
  for (std::size_t i = 0; i < n_q; ++i) out << ",queue_s" << i;
  out << '\n';
  for (const auto& r : f.rows) {
    out << format_double(r.sim_time_ms) << ',' << r.updates_processed << ',' << format_double(r.accuracy);
    for (double a : r.server_accuracy) out << ',' << format_double(a);
    for (auto q : r.queue) out << ',' << q;
    out << '\n';
  }
}

std::vector<Row> read_timeseries_csv(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("timeseries", "cannot open " + file.string());
  std::string line;
  std::getline(in, line);
  std::size_t n_acc = 0, n_q = 0;
  {
    std::stringstream hs(line);
    std::string col;
    while (std::getline(hs, col, ',')) {
      if (col.rfind("accuracy_s", 0) == 0) ++n_acc;
      if (col.rfind("queue_s", 0) == 0) ++n_q;
    }
  }
  std::vector<Row> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() != 3 + n_acc + n_q) throw ConfigError("timeseries", "ragged row in " + file.string());
    Row r;
    r.sim_time_ms = std::stod(cells[0]);
    r.updates_processed = std::stol(cells[1]);
    r.accuracy = std::stod(cells[2]);
    for (std::size_t i = 0; i < n_acc; ++i) r.server_accuracy.push_back(std::stod(cells[3 + i]));
    for (std::size_t i = 0; i < n_q; ++i) r.queue.push_back(std::stoul(cells[3 + n_acc + i]));
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_queues_csv(const fs::path& file, const MetricsFrame& f) {
  std::ofstream out(file);
  if (!out) throw ConfigError("out_dir", "cannot write " + file.string());
  out << "sim_time_ms";
  for (int i = 0; i < f.n_servers; ++i) out << ",queue_s" << i;
  out << '\n';
  for (const auto& s : f.queue_samples) {
    out << format_double(s.sim_time_ms);
    for (auto q : s.queue) out << ',' << q;
    out << '\n';
  }
}

void write_clients_csv(const fs::path& file, const MetricsFrame& f) {
  std::ofstream out(file);
  if (!out) throw ConfigError("out_dir", "cannot write " + file.string());
  out << "client,region,training_delay_ms,updates\n";
  for (std::size_t i = 0; i < f.client_updates.size(); ++i) {
    out << i << ',' << f.client_home[i] << ',' << format_double(f.client_delay_ms[i]) << ',' << f.client_updates[i] << '\n';
  }
}

namespace {
template <typename T>
json opt(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}
template <typename T>
std::optional<T> opt_get(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}
}  // namespace

json summary_to_json(const MetricsFrame& f) {
  const auto& s = f.summary;
  return json{{"algorithm", f.algorithm},
              {"n_servers", f.n_servers},
              {"time_to_90", opt(s.time_to_90)},
              {"time_to_95", opt(s.time_to_95)},
              {"updates_to_90", opt(s.updates_to_90)},
              {"target_accuracy", opt(s.target_accuracy)},
              {"time_to_target", opt(s.time_to_target)},
              {"updates_to_target", opt(s.updates_to_target)},
              {"final_accuracy", s.final_accuracy},
              {"end_time_ms", s.end_time_ms},
              {"updates_processed", s.updates_processed},
              {"events", s.events},
              {"early_stop", s.early_stop},
              {"bytes", {{"server_server", s.bytes_server_server},
                         {"server_client", s.bytes_server_client},
                         {"total", s.bytes_server_server + s.bytes_server_client}}},
              {"messages", {{"server_server", s.messages_server_server}, {"server_client", s.messages_server_client}}},
              {"peak_queue", s.peak_queue},
              {"trace_hash", s.trace_hash}};
}

Summary summary_from_json(const json& j) {
  Summary s;
  s.time_to_90 = opt_get<double>(j, "time_to_90");
  s.time_to_95 = opt_get<double>(j, "time_to_95");
  s.updates_to_90 = opt_get<long>(j, "updates_to_90");
  s.target_accuracy = opt_get<double>(j, "target_accuracy");
  s.time_to_target = opt_get<double>(j, "time_to_target");
  s.updates_to_target = opt_get<long>(j, "updates_to_target");
  s.final_accuracy = j.at("final_accuracy").get<double>();
  s.end_time_ms = j.at("end_time_ms").get<double>();
  s.updates_processed = j.at("updates_processed").get<long>();
  s.events = j.at("events").get<std::uint64_t>();
  s.early_stop = j.at("early_stop").get<bool>();
  s.bytes_server_server = j.at("bytes").at("server_server").get<std::uint64_t>();
  s.bytes_server_client = j.at("bytes").at("server_client").get<std::uint64_t>();
  s.messages_server_server = j.at("messages").at("server_server").get<std::uint64_t>();
  s.messages_server_client = j.at("messages").at("server_client").get<std::uint64_t>();
  s.peak_queue = j.at("peak_queue").get<std::vector<std::size_t>>();
  s.trace_hash = j.at("trace_hash").get<std::string>();
  return s;
}

void write_outputs(const fs::path& dir, const RunOutput& out) {
  fs::create_directories(dir);
  write_timeseries_csv(dir / "timeseries.csv", out.frame);
  write_clients_csv(dir / "clients.csv", out.frame);
  if (!out.frame.queue_samples.empty()) write_queues_csv(dir / "queues.csv", out.frame);
  {
    std::ofstream o(dir / "summary.json");
    o << summary_to_json(out.frame).dump(2) << '\n';
  }
  {
    std::ofstream o(dir / "manifest.json");
    o << json(out.manifest).dump(2) << '\n';
  }
  {
    std::ofstream o(dir / "trace-hash");
    o << out.frame.summary.trace_hash << '\n';
  }
}

}  // namespace spyker::metrics
