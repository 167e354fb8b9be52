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

// Command-line front end: single runs and the experiment suites.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "spyker/errors.hpp"
#include "spyker/metrics/suites.hpp"

namespace fs = std::filesystem;
using namespace spyker;
using namespace spyker::metrics;

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

std::vector<protocol::Algorithm> parse_algorithms(const std::vector<std::string>& names) {
  if (names.empty()) return all_algorithms();
  std::vector<protocol::Algorithm> out;
  for (const auto& n : names) out.push_back(protocol::parse_algorithm(n));
  return out;
}

void write_diagnostics(const fs::path& dir, const std::string& kind, const std::string& what) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  std::ofstream out(dir / "diagnostics.json");
  out << nlohmann::json{{"error", kind}, {"message", what}}.dump(2) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discrete-event simulator for multi-server asynchronous federated learning"};
  app.fallthrough();
  app.require_subcommand(1);

  std::string config_file;
  std::string preset = "desk-synth";
  std::optional<std::uint64_t> seed;
  std::string out_dir = "out";
  std::vector<std::string> overrides;
  bool verbose = false;
  app.add_option("--config", config_file, "JSON experiment config")->check(CLI::ExistingFile);
  app.add_option("--preset", preset, "preset used when the config names none")
      ->check(CLI::IsMember(preset_names()));
  app.add_option("--seed", seed, "master seed (overrides the config)");
  app.add_option("--out-dir", out_dir, "output directory");
  app.add_option("--override", overrides, "key.path=value, repeatable");
  app.add_flag("-v,--verbose", verbose, "log one line per run");

  auto* run = app.add_subcommand("run", "single experiment");

  auto* scal = app.add_subcommand("scalability", "time/update multipliers across client counts");
  std::vector<int> counts = {40, 80};
  std::vector<std::string> scal_algs;
  int scal_seeds = 5;
  double scal_target = 0.9;
  scal->add_option("--counts", counts, "client counts; the first is the base")->delimiter(',');
  scal->add_option("--algorithms", scal_algs, "subset of algorithms")->delimiter(',');
  scal->add_option("--seeds", scal_seeds, "seeds per cell")->check(CLI::PositiveNumber);
  scal->add_option("--target", scal_target, "accuracy threshold")->check(CLI::Range(0.0, 1.0));

  auto* queues = app.add_subcommand("queues", "per-server ingress queue length trace");
  double sample_ms = 50.0;
  queues->add_option("--sample-ms", sample_ms, "sampling interval")->check(CLI::PositiveNumber);

  auto* hist = app.add_subcommand("histogram", "per-client update counts");

  auto* bw = app.add_subcommand("bandwidth", "bytes by link class for every algorithm");
  double window_ms = 110000.0;
  std::vector<std::string> bw_algs;
  bw->add_option("--window-ms", window_ms, "measurement window")->check(CLI::PositiveNumber);
  bw->add_option("--algorithms", bw_algs, "subset of algorithms")->delimiter(',');

  auto* abl = app.add_subcommand("ablate-decay", "paired runs with the learning-rate decay on and off");
  int abl_seeds = 5;
  double abl_target = 0.85;
  abl->add_option("--seeds", abl_seeds, "number of paired seeds")->check(CLI::PositiveNumber);
  abl->add_option("--target", abl_target, "accuracy threshold")->check(CLI::Range(0.0, 1.0));

  CLI11_PARSE(app, argc, argv);

  const fs::path out(out_dir);
  try {
    auto cfg = load_config(config_file, overrides, preset);
    if (seed) cfg.seed = *seed;
    cfg.validate();

    if (run->parsed()) {
      RunOptions opts;
      opts.verbose = verbose;
      if (cfg.metrics.trace) {
        fs::create_directories(out);
        opts.trace_path = out / "trace.jsonl";
      }
      auto r = run_experiment(cfg, opts);
      write_outputs(out, r);
      std::cout << summary_to_json(r.frame).dump(2) << '\n';
    } else if (scal->parsed()) {
      auto cells = scalability_suite(cfg, counts, parse_algorithms(scal_algs), scal_seeds, scal_target, out);
      std::cout << "algorithm  clients  time_x  updates_x\n";
      for (const auto& c : cells) {
        std::cout << protocol::to_string(c.algorithm) << "  " << c.n_clients << "  "
                  << (c.time_multiplier ? format_double(*c.time_multiplier) : "unreached") << "  "
                  << (c.update_multiplier ? format_double(*c.update_multiplier) : "unreached") << '\n';
      }
    } else if (queues->parsed()) {
      auto r = queue_trace(cfg, sample_ms, out);
      std::cout << "peak queue per server:";
      for (auto q : r.frame.summary.peak_queue) std::cout << ' ' << q;
      std::cout << '\n';
    } else if (hist->parsed()) {
      auto r = update_histogram(cfg, out);
      long total = 0;
      for (long u : r.frame.client_updates) total += u;
      std::cout << "clients " << r.frame.client_updates.size() << ", updates " << total << " -> "
                << (out / "clients.csv").string() << '\n';
    } else if (bw->parsed()) {
      for (const auto& r : bandwidth_report(cfg, parse_algorithms(bw_algs), window_ms, out)) {
        std::cout << protocol::to_string(r.algorithm) << "  server-server " << r.server_server << "  server-client "
                  << r.server_client << "  total " << r.total() << '\n';
      }
    } else if (abl->parsed()) {
      auto res = decay_ablation(cfg, abl_seeds, abl_target, out);
      auto show = [](const std::optional<double>& v) { return v ? format_double(*v) + " ms" : std::string("unreached"); };
      std::cout << "median time to " << abl_target << ": decay on " << show(res.on.median_time) << ", decay off "
                << show(res.off.median_time) << '\n';
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    write_diagnostics(out, "numerical", e.what());
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    write_diagnostics(out, "runtime", e.what());
    return kExitRuntime;
  }
  return 0;
}
