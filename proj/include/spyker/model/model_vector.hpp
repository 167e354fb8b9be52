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
#include <initializer_list>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace spyker::model {

/// Flat parameter vector. Everything exchanged between clients and servers
/// and every aggregation operates on this type.
class ModelVector {
 public:
  ModelVector() = default;
  explicit ModelVector(std::size_t dim, double fill = 0.0) : values_(dim, fill) {}
  explicit ModelVector(std::vector<double> values) : values_(std::move(values)) {}
  ModelVector(std::initializer_list<double> values) : values_(values) {}

  std::size_t dim() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }

  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }
  const double* data() const noexcept { return values_.data(); }
  double* data() noexcept { return values_.data(); }

  Eigen::Map<const Eigen::VectorXd> as_eigen() const {
    return {values_.data(), static_cast<Eigen::Index>(values_.size())};
  }
  Eigen::Map<Eigen::VectorXd> as_eigen() {
    return {values_.data(), static_cast<Eigen::Index>(values_.size())};
  }

  ModelVector& operator+=(const ModelVector& other);
  ModelVector& operator-=(const ModelVector& other);
  ModelVector& operator*=(double s);

  // this += s * x
  ModelVector& axpy(double s, const ModelVector& x);

  bool all_finite() const noexcept;
  // Throws NumericalError carrying the first non-finite index.
  void require_finite(const char* context) const;

  // Bitwise (not tolerance) comparison.
  friend bool operator==(const ModelVector& a, const ModelVector& b) = default;

 private:
  std::vector<double> values_;
};

ModelVector operator+(ModelVector a, const ModelVector& b);
ModelVector operator-(ModelVector a, const ModelVector& b);
ModelVector operator*(double s, ModelVector a);

// Throws InvalidInput when dims differ.
void require_same_dim(const ModelVector& a, const ModelVector& b, const char* context);

double max_abs_diff(const ModelVector& a, const ModelVector& b);

}  // namespace spyker::model
