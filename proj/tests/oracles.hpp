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

// Test-only reference implementations. They deliberately share no code with
// the library's numerical path: plain loops, no Eigen.

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "spyker/data/dataset.hpp"
#include "spyker/model/tiny_model.hpp"

namespace oracle {

// Multinomial logistic regression, layout W[C x D] row-major then b[C].
struct PlainLogReg {
  std::size_t d;
  int c;
  std::vector<double> p;

  std::vector<double> probs(const float* x) const {
    std::vector<double> z(static_cast<std::size_t>(c));
    for (int k = 0; k < c; ++k) {
      double s = p[d * static_cast<std::size_t>(c) + static_cast<std::size_t>(k)];
      for (std::size_t j = 0; j < d; ++j) s += p[static_cast<std::size_t>(k) * d + j] * x[j];
      z[static_cast<std::size_t>(k)] = s;
    }
    double mx = z[0];
    for (double v : z) mx = std::max(mx, v);
    double sum = 0.0;
    for (double& v : z) sum += (v = std::exp(v - mx));
    for (double& v : z) v /= sum;
    return z;
  }

  void step(const spyker::data::Dataset& data, const std::vector<std::size_t>& batch, double lr) {
    std::vector<double> g(p.size(), 0.0);
    const double inv = 1.0 / static_cast<double>(batch.size());
    for (auto i : batch) {
      const float* x = data.features.data() + i * d;
      auto pr = probs(x);
      pr[static_cast<std::size_t>(data.labels[i])] -= 1.0;
      for (int k = 0; k < c; ++k) {
        const double e = pr[static_cast<std::size_t>(k)] * inv;
        for (std::size_t j = 0; j < d; ++j) g[static_cast<std::size_t>(k) * d + j] += e * x[j];
        g[d * static_cast<std::size_t>(c) + static_cast<std::size_t>(k)] += e;
      }
    }
    for (std::size_t i = 0; i < p.size(); ++i) p[i] -= lr * g[i];
  }

  double accuracy(const spyker::data::Dataset& data) const {
    std::size_t ok = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      const auto pr = probs(data.features.data() + i * d);
      int best = 0;
      for (int k = 1; k < c; ++k) {
        if (pr[static_cast<std::size_t>(k)] > pr[static_cast<std::size_t>(best)]) best = k;
      }
      ok += best == data.labels[i] ? 1 : 0;
    }
    return static_cast<double>(ok) / static_cast<double>(data.size());
  }
};

// Same shuffle rule the library documents: j = rng() % i for i = n .. 2.
inline void shuffle(std::vector<std::size_t>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng() % i]);
}

// Epochs of shuffled mini-batch SGD.
inline void train(PlainLogReg& m, const spyker::data::Dataset& data, double lr, int epochs,
                  std::size_t batch_size, std::mt19937_64& rng) {
  std::vector<std::size_t> order(data.size());
  for (int e = 0; e < epochs; ++e) {
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    shuffle(order, rng);
    for (std::size_t s = 0; s < order.size(); s += batch_size) {
      std::vector<std::size_t> b(order.begin() + static_cast<std::ptrdiff_t>(s),
                                 order.begin() + static_cast<std::ptrdiff_t>(std::min(order.size(), s + batch_size)));
      m.step(data, b, lr);
    }
  }
}

// Sequential FedAvg: each round every client trains from the global model,
// in client order, then the global becomes the data-weighted mean.
inline std::vector<double> fedavg(std::vector<double> global, std::size_t dim, int classes,
                                  const std::vector<spyker::data::Dataset>& shards,
                                  std::vector<std::mt19937_64>& rngs, double lr, int epochs,
                                  std::size_t batch_size, int rounds) {
  double total = 0.0;
  for (const auto& s : shards) total += static_cast<double>(s.size());
  for (int r = 0; r < rounds; ++r) {
    std::vector<double> next(global.size(), 0.0);
    for (std::size_t k = 0; k < shards.size(); ++k) {
      PlainLogReg m{dim, classes, global};
      train(m, shards[k], lr, epochs, batch_size, rngs[k]);
      const double w = static_cast<double>(shards[k].size()) / total;
      for (std::size_t i = 0; i < next.size(); ++i) next[i] += w * m.p[i];
    }
    global = std::move(next);
  }
  return global;
}

// Central finite-difference gradient of f at p.
inline std::vector<double> finite_difference(const std::function<double(const std::vector<double>&)>& f,
                                             std::vector<double> p, double eps) {
  std::vector<double> g(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double orig = p[i];
    p[i] = orig + eps;
    const double up = f(p);
    p[i] = orig - eps;
    const double down = f(p);
    p[i] = orig;
    g[i] = (up - down) / (2.0 * eps);
  }
  return g;
}

}  // namespace oracle
