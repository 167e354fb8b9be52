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

#include "spyker/metrics/config.hpp"

#include <fstream>
#include <set>

#include "spyker/errors.hpp"

namespace spyker::metrics {

using nlohmann::json;

EvalTarget parse_eval_target(const std::string& s) {
  if (s == "age-weighted") return EvalTarget::kAgeWeighted;
  if (s == "average") return EvalTarget::kAverage;
  if (s == "best") return EvalTarget::kBest;
  throw ConfigError("eval.target", "expected 'age-weighted', 'average' or 'best', got '" + s + "'");
}

const char* to_string(EvalTarget t) {
  switch (t) {
    case EvalTarget::kAgeWeighted: return "age-weighted";
    case EvalTarget::kAverage: return "average";
    case EvalTarget::kBest: return "best";
  }
  return "unknown";
}

namespace {

const char* delay_model_name(sim::TrainingDelayModel m) {
  return m == sim::TrainingDelayModel::kFixed ? "fixed" : "gaussian";
}

sim::TrainingDelayModel parse_delay_model(const std::string& s) {
  if (s == "fixed") return sim::TrainingDelayModel::kFixed;
  if (s == "gaussian") return sim::TrainingDelayModel::kGaussian;
  throw ConfigError("compute.training_delay", "expected 'fixed' or 'gaussian', got '" + s + "'");
}

// Reads j[path...] as T, reporting the dotted path on failure.
class Reader {
 public:
  explicit Reader(const json& root) : root_(root) {}

  template <typename T>
  T get(const std::string& path) const {
    const json& node = at(path);
    try {
      return node.get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(path, std::string("wrong type: ") + e.what());
    }
  }

  const json& at(const std::string& path) const {
    const json* node = &root_;
    std::size_t start = 0;
    while (start <= path.size()) {
      const auto dot = path.find('.', start);
      const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
      if (!node->is_object() || !node->contains(key)) throw ConfigError(path, "missing");
      node = &(*node)[key];
      if (dot == std::string::npos) break;
      start = dot + 1;
    }
    return *node;
  }

 private:
  const json& root_;
};

json base_document() {
  ExperimentConfig c;
  return config_to_json(c);
}

}  // namespace

std::vector<int> ExperimentConfig::clients_per_region() const {
  const int regions = topology.n_servers;
  std::vector<int> out(static_cast<std::size_t>(regions), 0);
  if (topology.assignment == "explicit") return topology.client_counts;
  for (int i = 0; i < regions; ++i) {
    out[static_cast<std::size_t>(i)] = topology.n_clients / regions + (i < topology.n_clients % regions ? 1 : 0);
  }
  return out;
}

void ExperimentConfig::validate() const {
  const auto& t = topology;
  if (t.n_servers < 1) throw ConfigError("topology.n_servers", "must be >= 1");
  if (t.n_clients < 1) throw ConfigError("topology.n_clients", "must be >= 1");
  if (static_cast<int>(t.server_locations.size()) != t.n_servers) {
    throw ConfigError("topology.server_locations", "need one location per server");
  }
  if (t.assignment == "explicit") {
    if (static_cast<int>(t.client_counts.size()) != t.n_servers) {
      throw ConfigError("topology.client_counts", "need one count per server");
    }
    long sum = 0;
    for (int k : t.client_counts) {
      if (k < 0) throw ConfigError("topology.client_counts", "counts must be >= 0");
      sum += k;
    }
    if (sum != t.n_clients) throw ConfigError("topology.client_counts", "counts must sum to n_clients");
  } else if (t.assignment != "balanced") {
    throw ConfigError("topology.assignment", "expected 'balanced' or 'explicit'");
  }
  sim::LatencyMatrix m = network.latency == "custom" ? network.custom : sim::LatencyMatrix::aws_reference();
  if (network.latency != "aws" && network.latency != "uniform" && network.latency != "custom") {
    throw ConfigError("network.latency", "expected 'aws', 'uniform' or 'custom'");
  }
  m.validate();
  auto check_loc = [&](const std::string& loc, const char* field) {
    if (m.index_of(loc) < 0) throw ConfigError(field, "location '" + loc + "' is not in the latency matrix");
  };
  for (const auto& loc : t.server_locations) check_loc(loc, "topology.server_locations");
  check_loc(t.single_server_location, "topology.single_server_location");
  check_loc(t.cloud_location, "topology.cloud_location");
  if (!(network.bandwidth_bps > 0.0)) throw ConfigError("network.bandwidth_bps", "must be > 0");

  const auto& d = dataset;
  if (d.kind != "synthetic" && d.kind != "mnist" && d.kind != "cifar10-gray") {
    throw ConfigError("dataset.kind", "expected 'synthetic', 'mnist' or 'cifar10-gray'");
  }
  if (d.kind == "synthetic") {
    if (d.n_train == 0 || d.n_test == 0) throw ConfigError("dataset.n_train", "synthetic splits must be non-empty");
    if (d.dim == 0) throw ConfigError("dataset.dim", "must be >= 1");
    if (d.n_classes < 2) throw ConfigError("dataset.n_classes", "must be >= 2");
    if (!(d.separation > 0.0)) throw ConfigError("dataset.separation", "must be > 0");
  }
  if (labels_per_client < 1) throw ConfigError("partition.labels_per_client", "must be >= 1");
  if (model_kind == model::ModelKind::kMlp && hidden_dim == 0) throw ConfigError("model.hidden_dim", "must be >= 1 for mlp");
  hyper.validate();
  compute.validate();
  if (hierfavg_period < 1) throw ConfigError("hierfavg_period", "must be >= 1");
  if (!(fedavg_fraction > 0.0 && fedavg_fraction <= 1.0)) throw ConfigError("fedavg_fraction", "must lie in (0, 1]");
  if (!(stop.horizon_ms > 0.0)) throw ConfigError("stop.horizon_ms", "must be > 0");
  if (stop.target_accuracy && !(*stop.target_accuracy > 0.0 && *stop.target_accuracy <= 1.0)) {
    throw ConfigError("stop.target_accuracy", "must lie in (0, 1]");
  }
  if (stop.max_updates && *stop.max_updates < 1) throw ConfigError("stop.max_updates", "must be >= 1");
  if (!(eval.interval_ms > 0.0)) throw ConfigError("eval.interval_ms", "must be > 0");
  if (!(metrics.queue_sample_ms >= 0.0)) throw ConfigError("metrics.queue_sample_ms", "must be >= 0");
}

json config_to_json(const ExperimentConfig& c) {
  json j;
  j["preset"] = c.preset;
  j["algorithm"] = protocol::to_string(c.algorithm);
  j["seed"] = c.seed;
  j["topology"] = {{"n_servers", c.topology.n_servers},
                   {"n_clients", c.topology.n_clients},
                   {"assignment", c.topology.assignment},
                   {"client_counts", c.topology.client_counts},
                   {"server_locations", c.topology.server_locations},
                   {"single_server_location", c.topology.single_server_location},
                   {"cloud_location", c.topology.cloud_location}};
  j["network"] = {{"latency", c.network.latency},
                  {"matrix", {{"locations", c.network.custom.locations}, {"ms", c.network.custom.ms}}},
                  {"bandwidth_bps", c.network.bandwidth_bps}};
  j["dataset"] = {{"kind", c.dataset.kind},           {"n_train", c.dataset.n_train},
                  {"n_test", c.dataset.n_test},       {"dim", c.dataset.dim},
                  {"n_classes", c.dataset.n_classes}, {"separation", c.dataset.separation},
                  {"blob_std", c.dataset.blob_std},   {"offset", c.dataset.offset},
                  {"data_dir", c.dataset.data_dir},   {"train_limit", c.dataset.train_limit},
                  {"test_limit", c.dataset.test_limit}};
  j["partition"] = {{"labels_per_client", c.labels_per_client}};
  j["model"] = {{"kind", model::to_string(c.model_kind)}, {"hidden_dim", c.hidden_dim}};
  const auto& h = c.hyper;
  j["hyper"] = {{"eta_init", h.eta_init},
                {"eta_min", h.eta_min},
                {"beta", h.beta},
                {"h_inter", c.h_inter_auto ? json(nullptr) : json(h.h_inter)},
                {"h_intra", h.h_intra},
                {"phi", h.phi},
                {"eta_a", h.eta_a},
                {"eta_server", h.eta_server},
                {"alpha_fedasync", h.alpha_fedasync},
                {"local_epochs", h.local_epochs},
                {"batch_size", h.batch_size},
                {"staleness_mode", model::to_string(h.staleness_mode)},
                {"base_schedule", model::to_string(h.base_schedule)},
                {"decay_enabled", h.decay_enabled}};
  const auto& p = c.compute;
  j["compute"] = {{"local_training_ms", p.local_training_ms},
                  {"spyker_aggregation_ms", p.spyker_aggregation_ms},
                  {"sync_spyker_aggregation_ms", p.sync_spyker_aggregation_ms},
                  {"fedavg_aggregation_ms", p.fedavg_aggregation_ms},
                  {"hierfavg_aggregation_ms", p.hierfavg_aggregation_ms},
                  {"fedasync_aggregation_ms", p.fedasync_aggregation_ms},
                  {"training_delay", delay_model_name(p.training_model)},
                  {"training_mean_ms", p.training_mean_ms},
                  {"training_sigma_ms", p.training_sigma_ms},
                  {"fast_client_fraction", p.fast_client_fraction},
                  {"fast_client_speedup", p.fast_client_speedup}};
  j["hierfavg_period"] = c.hierfavg_period;
  j["fedavg_fraction"] = c.fedavg_fraction;
  j["shared_init"] = c.shared_init;
  j["stop"] = {{"horizon_ms", c.stop.horizon_ms},
               {"target_accuracy", c.stop.target_accuracy ? json(*c.stop.target_accuracy) : json(nullptr)},
               {"max_updates", c.stop.max_updates ? json(*c.stop.max_updates) : json(nullptr)}};
  j["eval"] = {{"interval_ms", c.eval.interval_ms}, {"target", to_string(c.eval.target)}, {"per_server", c.eval.per_server}};
  j["metrics"] = {{"queue_sample_ms", c.metrics.queue_sample_ms},
                  {"bytes_window_start_ms", c.metrics.bytes_window_start_ms},
                  {"trace", c.metrics.trace}};
  return j;
}

ExperimentConfig config_from_json(const json& j) {
  Reader r(j);
  ExperimentConfig c;
  c.preset = r.get<std::string>("preset");
  c.algorithm = protocol::parse_algorithm(r.get<std::string>("algorithm"));
  c.seed = r.get<std::uint64_t>("seed");

  c.topology.n_servers = r.get<int>("topology.n_servers");
  c.topology.n_clients = r.get<int>("topology.n_clients");
  c.topology.assignment = r.get<std::string>("topology.assignment");
  c.topology.client_counts = r.get<std::vector<int>>("topology.client_counts");
  c.topology.server_locations = r.get<std::vector<std::string>>("topology.server_locations");
  c.topology.single_server_location = r.get<std::string>("topology.single_server_location");
  c.topology.cloud_location = r.get<std::string>("topology.cloud_location");

  c.network.latency = r.get<std::string>("network.latency");
  c.network.custom.locations = r.get<std::vector<std::string>>("network.matrix.locations");
  c.network.custom.ms = r.get<std::vector<std::vector<double>>>("network.matrix.ms");
  c.network.bandwidth_bps = r.get<double>("network.bandwidth_bps");

  c.dataset.kind = r.get<std::string>("dataset.kind");
  c.dataset.n_train = r.get<std::size_t>("dataset.n_train");
  c.dataset.n_test = r.get<std::size_t>("dataset.n_test");
  c.dataset.dim = r.get<std::size_t>("dataset.dim");
  c.dataset.n_classes = r.get<int>("dataset.n_classes");
  c.dataset.separation = r.get<double>("dataset.separation");
  c.dataset.blob_std = r.get<double>("dataset.blob_std");
  c.dataset.offset = r.get<double>("dataset.offset");
  c.dataset.data_dir = r.get<std::string>("dataset.data_dir");
  c.dataset.train_limit = r.get<std::size_t>("dataset.train_limit");
  c.dataset.test_limit = r.get<std::size_t>("dataset.test_limit");

  c.labels_per_client = r.get<int>("partition.labels_per_client");
  c.model_kind = model::parse_model_kind(r.get<std::string>("model.kind"));
  c.hidden_dim = r.get<std::size_t>("model.hidden_dim");

  auto& h = c.hyper;
  h.eta_init = r.get<double>("hyper.eta_init");
  h.eta_min = r.get<double>("hyper.eta_min");
  h.beta = r.get<double>("hyper.beta");
  c.h_inter_auto = r.at("hyper.h_inter").is_null();
  if (!c.h_inter_auto) h.h_inter = r.get<double>("hyper.h_inter");
  h.h_intra = r.get<double>("hyper.h_intra");
  h.phi = r.get<double>("hyper.phi");
  h.eta_a = r.get<double>("hyper.eta_a");
  h.eta_server = r.get<double>("hyper.eta_server");
  h.alpha_fedasync = r.get<double>("hyper.alpha_fedasync");
  h.local_epochs = r.get<int>("hyper.local_epochs");
  h.batch_size = r.get<int>("hyper.batch_size");
  h.staleness_mode = model::parse_staleness_mode(r.get<std::string>("hyper.staleness_mode"));
  h.base_schedule = model::parse_base_schedule(r.get<std::string>("hyper.base_schedule"));
  h.decay_enabled = r.get<bool>("hyper.decay_enabled");
  if (c.h_inter_auto) h.h_inter = model::HyperParams::default_h_inter(c.topology.n_clients, c.topology.n_servers);

  auto& p = c.compute;
  p.local_training_ms = r.get<double>("compute.local_training_ms");
  p.spyker_aggregation_ms = r.get<double>("compute.spyker_aggregation_ms");
  p.sync_spyker_aggregation_ms = r.get<double>("compute.sync_spyker_aggregation_ms");
  p.fedavg_aggregation_ms = r.get<double>("compute.fedavg_aggregation_ms");
  p.hierfavg_aggregation_ms = r.get<double>("compute.hierfavg_aggregation_ms");
  p.fedasync_aggregation_ms = r.get<double>("compute.fedasync_aggregation_ms");
  p.training_model = parse_delay_model(r.get<std::string>("compute.training_delay"));
  p.training_mean_ms = r.get<double>("compute.training_mean_ms");
  p.training_sigma_ms = r.get<double>("compute.training_sigma_ms");
  p.fast_client_fraction = r.get<double>("compute.fast_client_fraction");
  p.fast_client_speedup = r.get<double>("compute.fast_client_speedup");

  c.hierfavg_period = r.get<int>("hierfavg_period");
  c.fedavg_fraction = r.get<double>("fedavg_fraction");
  c.shared_init = r.get<bool>("shared_init");

  c.stop.horizon_ms = r.get<double>("stop.horizon_ms");
  if (!r.at("stop.target_accuracy").is_null()) c.stop.target_accuracy = r.get<double>("stop.target_accuracy");
  if (!r.at("stop.max_updates").is_null()) c.stop.max_updates = r.get<long>("stop.max_updates");

  c.eval.interval_ms = r.get<double>("eval.interval_ms");
  c.eval.target = parse_eval_target(r.get<std::string>("eval.target"));
  c.eval.per_server = r.get<bool>("eval.per_server");

  c.metrics.queue_sample_ms = r.get<double>("metrics.queue_sample_ms");
  c.metrics.bytes_window_start_ms = r.get<double>("metrics.bytes_window_start_ms");
  c.metrics.trace = r.get<bool>("metrics.trace");

  c.validate();
  return c;
}

void merge_into(json& base, const json& patch, const std::string& path) {
  if (!patch.is_object()) throw ConfigError(path, "expected an object");
  for (const auto& [key, value] : patch.items()) {
    const std::string here = path.empty() ? key : path + "." + key;
    if (!base.contains(key)) throw ConfigError(here, "unknown key");
    json& slot = base[key];
    if (slot.is_object() && value.is_object()) {
      merge_into(slot, value, here);
    } else {
      slot = value;
    }
  }
}

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError(assignment, "override must look like key.path=value");
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;

  // Build {"a": {"b": value}} and merge so unknown keys are rejected.
  json patch = value;
  std::size_t end = path.size();
  while (true) {
    const auto dot = path.rfind('.', end - 1);
    const std::string key = path.substr(dot == std::string::npos ? 0 : dot + 1,
                                        end - (dot == std::string::npos ? 0 : dot + 1));
    if (key.empty()) throw ConfigError(path, "empty key in override");
    patch = json{{key, patch}};
    if (dot == std::string::npos) break;
    end = dot;
  }
  merge_into(doc, patch);
}

std::vector<std::string> preset_names() { return {"desk-synth", "desk-mnist", "full-mnist"}; }

json preset_json(const std::string& name) {
  json doc = base_document();
  doc["preset"] = name;
  if (name == "desk-synth") {
    return doc;
  }
  if (name == "desk-mnist") {
    // 12k/2k subset; batch above the shard size means one full-shard step per update.
    merge_into(doc, json::parse(R"({
      "topology": {"n_clients": 100},
      "dataset": {"kind": "mnist", "n_classes": 10, "train_limit": 12000, "test_limit": 2000},
      "model": {"kind": "mlp", "hidden_dim": 64},
      "hyper": {"eta_init": 3.0, "batch_size": 1024},
      "stop": {"horizon_ms": 120000},
      "eval": {"interval_ms": 1000}
    })"));
    return doc;
  }
  if (name == "full-mnist") {
    merge_into(doc, json::parse(R"({
      "topology": {"n_clients": 100},
      "dataset": {"kind": "mnist", "n_classes": 10},
      "model": {"kind": "mlp", "hidden_dim": 64},
      "hyper": {"eta_init": 0.5},
      "stop": {"horizon_ms": 600000},
      "eval": {"interval_ms": 1000}
    })"));
    return doc;
  }
  throw ConfigError("preset", "unknown preset '" + name + "'");
}

ExperimentConfig load_config(const std::string& file, const std::vector<std::string>& overrides,
                             const std::string& default_preset) {
  json user = json::object();
  if (!file.empty()) {
    std::ifstream in(file);
    if (!in) throw ConfigError("config", "cannot open '" + file + "'");
    user = json::parse(in, nullptr, false, true);
    if (user.is_discarded() || !user.is_object()) throw ConfigError("config", "'" + file + "' is not a JSON object");
  }
  std::string preset = user.value("preset", default_preset);
  for (const auto& o : overrides) {
    if (o.rfind("preset=", 0) == 0) preset = o.substr(7);
  }
  json doc = preset_json(preset);
  merge_into(doc, user);
  doc["preset"] = preset;
  for (const auto& o : overrides) apply_override(doc, o);
  return config_from_json(doc);
}

}  // namespace spyker::metrics
