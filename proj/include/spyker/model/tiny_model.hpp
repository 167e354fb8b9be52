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
#include <string>
#include <vector>

#include "spyker/data/dataset.hpp"
#include "spyker/model/model_vector.hpp"
#include "spyker/rng.hpp"

namespace spyker::model {

enum class ModelKind { kLogisticRegression, kMlp };

ModelKind parse_model_kind(const std::string& s);
const char* to_string(ModelKind k);

struct ModelArch {
  ModelKind kind = ModelKind::kLogisticRegression;
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 0;  // MLP only
  int n_classes = 2;

  // Analytic parameter count. Layout:
  //   logistic: W[C x D] row-major, b[C]
  //   mlp:      W1[H x D], b1[H], W2[C x H], b2[C]
  std::size_t param_count() const;

  friend bool operator==(const ModelArch&, const ModelArch&) = default;
};

/// Softmax classifier: multinomial logistic regression or a one-hidden-layer
/// tanh MLP. Loss is mean cross-entropy over a batch.
struct TinyModel {
  ModelArch arch;
  ModelVector params;

  // Gaussian(0, 0.01) for logistic regression, Glorot-uniform weights and
  // zero biases for the MLP.
  static TinyModel random_init(const ModelArch& arch, std::uint64_t seed);
  static TinyModel with_params(const ModelArch& arch, ModelVector params);
};

struct LossAndGradient {
  double loss;
  ModelVector gradient;
};

double loss(const TinyModel& m, const data::BatchView& batch);
LossAndGradient loss_and_gradient(const TinyModel& m, const data::BatchView& batch);

// Class probabilities for one sample.
std::vector<double> predict_proba(const TinyModel& m, std::span<const float> x);

// Argmax predictions with ties broken toward the lowest class index.
std::vector<int> predict(const TinyModel& m, const data::Dataset& data);

/// params - lr * grad. Throws NumericalError when the gradient has a
/// non-finite component.
ModelVector sgd_step(const ModelVector& params, const ModelVector& grad, double lr);

/// One gradient step on `batch`.
TinyModel local_sgd_step(const TinyModel& m, const data::BatchView& batch, double lr);

/// `epochs` passes of mini-batch SGD over `data`, reshuffling each pass with
/// `rng`. The final batch of a pass may be short.
TinyModel local_training(const TinyModel& m, const data::Dataset& data, double lr, int epochs,
                         int batch_size, Rng& rng);

}  // namespace spyker::model
