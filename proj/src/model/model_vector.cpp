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

#include "spyker/model/model_vector.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "spyker/errors.hpp"

namespace spyker::model {

void require_same_dim(const ModelVector& a, const ModelVector& b, const char* context) {
  if (a.dim() != b.dim()) {
    throw InvalidInput(std::string(context) + ": dimension mismatch (" + std::to_string(a.dim()) +
                       " vs " + std::to_string(b.dim()) + ")");
  }
}

ModelVector& ModelVector::operator+=(const ModelVector& other) {
  require_same_dim(*this, other, "ModelVector::operator+=");
  as_eigen() += other.as_eigen();
  return *this;
}

ModelVector& ModelVector::operator-=(const ModelVector& other) {
  require_same_dim(*this, other, "ModelVector::operator-=");
  as_eigen() -= other.as_eigen();
  return *this;
}

ModelVector& ModelVector::operator*=(double s) {
  as_eigen() *= s;
  return *this;
}

ModelVector& ModelVector::axpy(double s, const ModelVector& x) {
  require_same_dim(*this, x, "ModelVector::axpy");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += s * x.values_[i];
  return *this;
}

bool ModelVector::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

void ModelVector::require_finite(const char* context) const {
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) throw NumericalError(std::string(context) + ": non-finite value", i);
  }
}

ModelVector operator+(ModelVector a, const ModelVector& b) { return a += b; }
ModelVector operator-(ModelVector a, const ModelVector& b) { return a -= b; }
ModelVector operator*(double s, ModelVector a) { return a *= s; }

double max_abs_diff(const ModelVector& a, const ModelVector& b) {
  require_same_dim(a, b, "max_abs_diff");
  double m = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace spyker::model
