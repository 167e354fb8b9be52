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

#include "spyker/model/tiny_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>

#include "spyker/errors.hpp"

namespace spyker::model {
namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMatMap = Eigen::Map<const RowMat>;
using MatMap = Eigen::Map<RowMat>;
using ConstVecMap = Eigen::Map<const Eigen::VectorXd>;
using VecMap = Eigen::Map<Eigen::VectorXd>;

struct Layout {
  Eigen::Index d, h, c;
  std::size_t w1, b1, w2, b2;  // offsets
};

Layout layout_of(const ModelArch& a) {
  Layout l{static_cast<Eigen::Index>(a.input_dim), static_cast<Eigen::Index>(a.hidden_dim),
           static_cast<Eigen::Index>(a.n_classes), 0, 0, 0, 0};
  if (a.kind == ModelKind::kLogisticRegression) {
    l.w1 = 0;
    l.b1 = static_cast<std::size_t>(l.c * l.d);
  } else {
    l.w1 = 0;
    l.b1 = static_cast<std::size_t>(l.h * l.d);
    l.w2 = l.b1 + static_cast<std::size_t>(l.h);
    l.b2 = l.w2 + static_cast<std::size_t>(l.c * l.h);
  }
  return l;
}

void check_compat(const TinyModel& m, const data::Dataset& d) {
  if (m.params.dim() != m.arch.param_count()) {
    throw InvalidInput("TinyModel: parameter count does not match architecture");
  }
  if (d.dim != m.arch.input_dim) {
    throw InvalidInput("TinyModel: feature dim " + std::to_string(d.dim) + " != model input dim " +
                       std::to_string(m.arch.input_dim));
  }
}

RowMat gather(const data::Dataset& d, std::span<const std::size_t> idx) {
  RowMat x(static_cast<Eigen::Index>(idx.size()), static_cast<Eigen::Index>(d.dim));
  for (std::size_t r = 0; r < idx.size(); ++r) {
    const float* src = d.features.data() + idx[r] * d.dim;
    for (std::size_t k = 0; k < d.dim; ++k) x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) = src[k];
  }
  return x;
}

// Logits for a batch; `hidden` receives tanh activations for the MLP.
RowMat forward(const ModelArch& a, const ModelVector& p, const RowMat& x, RowMat* hidden) {
  const Layout l = layout_of(a);
  const double* base = p.data();
  if (a.kind == ModelKind::kLogisticRegression) {
    ConstMatMap w(base + l.w1, l.c, l.d);
    ConstVecMap b(base + l.b1, l.c);
    RowMat logits = x * w.transpose();
    logits.rowwise() += b.transpose();
    return logits;
  }
  ConstMatMap w1(base + l.w1, l.h, l.d);
  ConstVecMap b1(base + l.b1, l.h);
  ConstMatMap w2(base + l.w2, l.c, l.h);
  ConstVecMap b2(base + l.b2, l.c);
  RowMat z = x * w1.transpose();
  z.rowwise() += b1.transpose();
  RowMat h = z.array().tanh().matrix();
  RowMat logits = h * w2.transpose();
  logits.rowwise() += b2.transpose();
  if (hidden != nullptr) *hidden = std::move(h);
  return logits;
}

// Turns logits into probabilities in place; returns summed cross-entropy.
double softmax_xent(RowMat& logits, std::span<const std::int32_t> labels) {
  double total = 0.0;
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    auto row = logits.row(r);
    const double mx = row.maxCoeff();
    row.array() -= mx;
    const double lse = std::log(row.array().exp().sum());
    total += lse - row(labels[static_cast<std::size_t>(r)]);
    row = (row.array() - lse).exp().matrix();
  }
  return total;
}

std::vector<std::int32_t> gather_labels(const data::Dataset& d, std::span<const std::size_t> idx) {
  std::vector<std::int32_t> y(idx.size());
  for (std::size_t r = 0; r < idx.size(); ++r) y[r] = d.labels[idx[r]];
  return y;
}

// Mean cross-entropy over the batch; gradient written into `grad` (resized).
double batch_loss_grad(const ModelArch& a, const ModelVector& p, const RowMat& x,
                       std::span<const std::int32_t> y, ModelVector* grad) {
  RowMat hidden;
  RowMat probs = forward(a, p, x, grad != nullptr ? &hidden : nullptr);
  const double n = static_cast<double>(x.rows());
  const double loss = softmax_xent(probs, y) / n;
  if (grad == nullptr) return loss;

  for (std::size_t r = 0; r < y.size(); ++r) probs(static_cast<Eigen::Index>(r), y[r]) -= 1.0;
  probs /= n;  // dL/dlogits

  const Layout l = layout_of(a);
  *grad = ModelVector(p.dim(), 0.0);
  double* g = grad->data();
  if (a.kind == ModelKind::kLogisticRegression) {
    MatMap(g + l.w1, l.c, l.d).noalias() = probs.transpose() * x;
    VecMap(g + l.b1, l.c) = probs.colwise().sum().transpose();
    return loss;
  }
  ConstMatMap w2(p.data() + l.w2, l.c, l.h);
  MatMap(g + l.w2, l.c, l.h).noalias() = probs.transpose() * hidden;
  VecMap(g + l.b2, l.c) = probs.colwise().sum().transpose();
  RowMat dz = probs * w2;
  dz.array() *= (1.0 - hidden.array().square());
  MatMap(g + l.w1, l.h, l.d).noalias() = dz.transpose() * x;
  VecMap(g + l.b1, l.h) = dz.colwise().sum().transpose();
  return loss;
}

void require_batch(const TinyModel& m, const data::BatchView& batch) {
  if (batch.data == nullptr || batch.indices.empty()) throw InvalidInput("empty batch");
  check_compat(m, *batch.data);
}

}  // namespace

ModelKind parse_model_kind(const std::string& s) {
  if (s == "logistic" || s == "logistic-regression") return ModelKind::kLogisticRegression;
  if (s == "mlp" || s == "mlp-1-hidden") return ModelKind::kMlp;
  throw ConfigError("model.kind", "expected 'logistic' or 'mlp', got '" + s + "'");
}

const char* to_string(ModelKind k) {
  return k == ModelKind::kLogisticRegression ? "logistic" : "mlp";
}

std::size_t ModelArch::param_count() const {
  const auto c = static_cast<std::size_t>(n_classes);
  if (kind == ModelKind::kLogisticRegression) return c * input_dim + c;
  return hidden_dim * input_dim + hidden_dim + c * hidden_dim + c;
}

TinyModel TinyModel::random_init(const ModelArch& arch, std::uint64_t seed) {
  if (arch.input_dim == 0 || arch.n_classes < 2 ||
      (arch.kind == ModelKind::kMlp && arch.hidden_dim == 0)) {
    throw InvalidInput("TinyModel: degenerate architecture");
  }
  Rng rng(seed);
  ModelVector p(arch.param_count(), 0.0);
  const Layout l = layout_of(arch);
  if (arch.kind == ModelKind::kLogisticRegression) {
    std::normal_distribution<double> n01(0.0, 0.01);
    for (std::size_t i = 0; i < l.b1; ++i) p[i] = n01(rng);
  } else {
    auto glorot = [&](std::size_t off, Eigen::Index fan_out, Eigen::Index fan_in) {
      const double lim = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
      std::uniform_real_distribution<double> u(-lim, lim);
      for (Eigen::Index i = 0; i < fan_out * fan_in; ++i) p[off + static_cast<std::size_t>(i)] = u(rng);
    };
    glorot(l.w1, l.h, l.d);
    glorot(l.w2, l.c, l.h);
  }
  return {arch, std::move(p)};
}

TinyModel TinyModel::with_params(const ModelArch& arch, ModelVector params) {
  if (params.dim() != arch.param_count()) {
    throw InvalidInput("TinyModel: expected " + std::to_string(arch.param_count()) +
                       " parameters, got " + std::to_string(params.dim()));
  }
  return {arch, std::move(params)};
}

double loss(const TinyModel& m, const data::BatchView& batch) {
  require_batch(m, batch);
  const RowMat x = gather(*batch.data, batch.indices);
  const auto y = gather_labels(*batch.data, batch.indices);
  return batch_loss_grad(m.arch, m.params, x, y, nullptr);
}

LossAndGradient loss_and_gradient(const TinyModel& m, const data::BatchView& batch) {
  require_batch(m, batch);
  const RowMat x = gather(*batch.data, batch.indices);
  const auto y = gather_labels(*batch.data, batch.indices);
  LossAndGradient out{0.0, {}};
  out.loss = batch_loss_grad(m.arch, m.params, x, y, &out.gradient);
  return out;
}

std::vector<double> predict_proba(const TinyModel& m, std::span<const float> x) {
  if (x.size() != m.arch.input_dim) throw InvalidInput("predict_proba: feature dim mismatch");
  RowMat xm(1, static_cast<Eigen::Index>(x.size()));
  for (std::size_t k = 0; k < x.size(); ++k) xm(0, static_cast<Eigen::Index>(k)) = x[k];
  RowMat logits = forward(m.arch, m.params, xm, nullptr);
  const std::int32_t dummy = 0;
  softmax_xent(logits, std::span<const std::int32_t>(&dummy, 1));
  return {logits.data(), logits.data() + logits.size()};
}

std::vector<int> predict(const TinyModel& m, const data::Dataset& data) {
  check_compat(m, data);
  std::vector<int> out(data.size());
  constexpr std::size_t kChunk = 256;
  std::vector<std::size_t> idx;
  for (std::size_t start = 0; start < data.size(); start += kChunk) {
    const std::size_t end = std::min(data.size(), start + kChunk);
    idx.resize(end - start);
    std::iota(idx.begin(), idx.end(), start);
    const RowMat logits = forward(m.arch, m.params, gather(data, idx), nullptr);
    for (Eigen::Index r = 0; r < logits.rows(); ++r) {
      int best = 0;
      for (Eigen::Index c = 1; c < logits.cols(); ++c) {
        if (logits(r, c) > logits(r, best)) best = static_cast<int>(c);
      }
      out[start + static_cast<std::size_t>(r)] = best;
    }
  }
  return out;
}

ModelVector sgd_step(const ModelVector& params, const ModelVector& grad, double lr) {
  require_same_dim(params, grad, "sgd_step");
  if (lr < 0.0) throw InvalidInput("sgd_step: negative learning rate");
  grad.require_finite("sgd_step: gradient");
  ModelVector out = params;
  out.axpy(-lr, grad);
  return out;
}

TinyModel local_sgd_step(const TinyModel& m, const data::BatchView& batch, double lr) {
  auto lg = loss_and_gradient(m, batch);
  return {m.arch, sgd_step(m.params, lg.gradient, lr)};
}

TinyModel local_training(const TinyModel& m, const data::Dataset& data, double lr, int epochs,
                         int batch_size, Rng& rng) {
  if (epochs < 1) throw InvalidInput("local_training: epochs must be >= 1");
  if (batch_size < 1) throw InvalidInput("local_training: batch_size must be >= 1");
  if (data.empty()) throw InvalidInput("local_training: empty dataset");
  if (lr < 0.0) throw InvalidInput("local_training: negative learning rate");
  check_compat(m, data);

  TinyModel cur = m;
  std::vector<std::size_t> order(data.size());
  ModelVector grad;
  for (int e = 0; e < epochs; ++e) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    fisher_yates(std::span<std::size_t>(order), rng);
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(batch_size));
      std::span<const std::size_t> idx(order.data() + start, end - start);
      const RowMat x = gather(data, idx);
      const auto y = gather_labels(data, idx);
      batch_loss_grad(cur.arch, cur.params, x, y, &grad);
      grad.require_finite("local_training: gradient");
      cur.params.axpy(-lr, grad);
    }
  }
  cur.params.require_finite("local_training");
  return cur;
}

}  // namespace spyker::model
