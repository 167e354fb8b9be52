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

#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "spyker/errors.hpp"
#include "spyker/model/aggregation.hpp"

using namespace spyker::model;
using spyker::InvalidInput;
using spyker::NumericalError;
using spyker::ProtocolViolation;

namespace {

// sigma(0.9) and the values built on it, evaluated with mpmath at 40 significant digits.
constexpr double kSigmoid09 = 0.7109495026250039634630982368;
constexpr double kCoeff06 = 0.4265697015750023780778589421;
constexpr double kMergedAge = 125.5941820945001426846715365;

}  // namespace

TEST_CASE("ModelVector arithmetic preserves dimension and rejects mismatches") {
  ModelVector a{1.0, 2.0, 3.0};
  ModelVector b{0.5, 0.5, 0.5};
  CHECK((a + b) == ModelVector{1.5, 2.5, 3.5});
  CHECK((a - b).dim() == 3);
  CHECK((2.0 * a) == ModelVector{2.0, 4.0, 6.0});
  ModelVector c{1.0};
  CHECK_THROWS_AS(a += c, InvalidInput);
  ModelVector bad{1.0, std::numeric_limits<double>::quiet_NaN()};
  CHECK_FALSE(bad.all_finite());
  try {
    bad.require_finite("test");
    FAIL("expected NumericalError");
  } catch (const NumericalError& e) {
    CHECK(e.index() == 1);
  }
}

TEST_CASE("fedavg_aggregate") {
  SUBCASE("single update is the identity") {
    ModelVector w{0.25, -3.0, 7.5};
    CHECK(fedavg_aggregate({{&w, 17}}) == w);
  }
  SUBCASE("data-weighted mean of two 1-D models") {
    ModelVector a{1.0}, b{3.0};
    CHECK(fedavg_aggregate({{&a, 1}, {&b, 3}})[0] == doctest::Approx(2.5).epsilon(1e-12));
  }
  SUBCASE("equal weights give the componentwise mean") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> n01;
    std::vector<ModelVector> models(6, ModelVector(5));
    for (auto& m : models) {
      for (std::size_t i = 0; i < m.dim(); ++i) m[i] = n01(rng);
    }
    std::vector<WeightedModel> in;
    for (auto& m : models) in.push_back({&m, 4});
    const auto avg = fedavg_aggregate(in);
    for (std::size_t i = 0; i < 5; ++i) {
      double mean = 0.0;
      for (auto& m : models) mean += m[i];
      mean /= 6.0;
      CHECK(std::abs(avg[i] - mean) < 1e-12);
    }
  }
  SUBCASE("empty list is rejected") { CHECK_THROWS_AS(fedavg_aggregate({}), InvalidInput); }
  SUBCASE("dimension mismatch is rejected") {
    ModelVector a{1.0}, b{1.0, 2.0};
    CHECK_THROWS_AS(fedavg_aggregate({{&a, 1}, {&b, 1}}), InvalidInput);
  }
}

TEST_CASE("fedasync_merge") {
  ModelVector g{0.0}, sent{1.0}, ret{0.5};
  SUBCASE("zero client delta leaves the global model untouched") {
    ModelVector g2{0.3, -0.2};
    CHECK(fedasync_merge(g2, g2, g2, 5, 1, 4, 0.5) == g2);
  }
  SUBCASE("fresh update, s(0) = 1") {
    CHECK(std::abs(fedasync_merge(g, sent, ret, 0, 1, 2, 0.5)[0] - (-0.25)) < 1e-12);
  }
  SUBCASE("tau = 3, alpha = 0.5 halves the effect") {
    CHECK(std::abs(staleness_factor(3, 0.5) - 0.5) < 1e-12);
    CHECK(std::abs(fedasync_merge(g, sent, ret, 3, 1, 2, 0.5)[0] - (-0.125)) < 1e-12);
  }
  SUBCASE("errors") {
    ModelVector two{1.0, 2.0};
    CHECK_THROWS_AS(fedasync_merge(g, two, ret, 0, 1, 2, 0.5), InvalidInput);
    CHECK_THROWS_AS(fedasync_merge(g, sent, ret, 0, 3, 2, 0.5), InvalidInput);
  }
}

TEST_CASE("client_staleness_weight") {
  CHECK(client_staleness_weight(7.0, 7.0, StalenessMode::kLiteral) == 0.0);
  CHECK(client_staleness_weight(7.0, 7.0, StalenessMode::kDampened) == 1.0);
  CHECK(client_staleness_weight(14.0, 10.0, StalenessMode::kLiteral) == 4.0);
  CHECK(std::abs(client_staleness_weight(14.0, 10.0, StalenessMode::kDampened) - 0.2) < 1e-12);
  CHECK_THROWS_AS(client_staleness_weight(3.0, 4.0, StalenessMode::kDampened), ProtocolViolation);
}

TEST_CASE("spyker_client_merge") {
  ModelVector s{0.0, 2.0}, c{1.0, 4.0};
  CHECK(spyker_client_merge(s, c, 0.0, 0.6) == s);
  CHECK(spyker_client_merge(s, s, 3.0, 0.6) == s);
  ModelVector s1{0.0}, c1{1.0};
  CHECK(std::abs(spyker_client_merge(s1, c1, 1.0, 0.6)[0] - 0.6) < 1e-12);
  CHECK_THROWS_AS(spyker_client_merge(s1, c, 1.0, 0.6), InvalidInput);
}

TEST_CASE("decay") {
  CHECK(decay(0.5, 5, 10.0, 0.05, 1e-6) == 0.5);
  CHECK(std::abs(decay(0.5, 12, 10.0, 0.05, 1e-6) - 0.4) < 1e-12);
  CHECK(decay(0.5, 20, 10.0, 0.05, 1e-6) == 1e-6);

  SUBCASE("non-increasing in u_k and flat below the mean") {
    double prev = std::numeric_limits<double>::infinity();
    for (long u = 0; u <= 40; ++u) {
      const double v = decay(0.5, u, 12.5, 0.05, 1e-6);
      CHECK(v <= prev);
      if (u < 12.5) CHECK(v == 0.5);
      if (u >= 12.5) CHECK((v >= 1e-6 && v <= 0.5));
      prev = v;
    }
  }
}

TEST_CASE("base learning-rate schedules") {
  CHECK(base_learning_rate(BaseLrSchedule::kConstant, 0.05, 99) == 0.05);
  CHECK(std::abs(base_learning_rate(BaseLrSchedule::kInverseSqrt, 0.05, 3) - 0.025) < 1e-12);
}

TEST_CASE("server_pair_weight") {
  CHECK(server_pair_weight(42.0, 42.0, 1.5) == 0.5);
  CHECK(std::abs(server_pair_weight(100.0, 160.0, 1.5) - kSigmoid09) < 1e-9);
  CHECK(std::abs(server_pair_weight(100.0, 160.0, 1.5) - 0.710950) < 1e-6);
  CHECK(server_pair_weight(1000.0, 0.0, 50.0) < 1e-12);
  // Zero age uses denominator 1 instead of dividing by zero.
  CHECK(std::abs(server_pair_weight(0.0, 2.0, 1.5) - 1.0 / (1.0 + std::exp(-3.0))) < 1e-15);

  SUBCASE("strictly increasing in A_j") {
    double prev = 0.0;
    for (double aj = 0.0; aj < 300.0; aj += 7.0) {
      const double w = server_pair_weight(100.0, aj, 1.5);
      CHECK(w > prev);
      CHECK((w > 0.0 && w < 1.0));
      prev = w;
    }
  }
  SUBCASE("symmetric around 0.5 for mirrored age gaps") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> age(1.0, 500.0), frac(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
      const double a = age(rng);
      const double d = frac(rng) * a * 0.999;
      CHECK(std::abs(server_pair_weight(a, a + d, 1.5) + server_pair_weight(a, a - d, 1.5) - 1.0) < 1e-9);
    }
  }
}

TEST_CASE("server_merge") {
  SUBCASE("full fixed point") {
    ModelVector w{0.1, -0.7};
    const auto m = server_merge(w, 33.0, w, 33.0, 0.6, 1.5);
    CHECK(m.model == w);
    CHECK(m.age == 33.0);
  }
  SUBCASE("reference ages 100 / 160") {
    ModelVector wi{0.0}, wj{1.0};
    const auto m = server_merge(wi, 100.0, wj, 160.0, 0.6, 1.5);
    CHECK(std::abs(m.model[0] - kCoeff06) < 1e-9);
    CHECK(std::abs(m.age - kMergedAge) < 1e-9);
    CHECK(std::abs(m.age - 125.594) < 1e-3);
  }
  SUBCASE("equal ages move 30% of the way, age unchanged") {
    ModelVector wi{1.0, 2.0}, wj{3.0, -2.0};
    const auto m = server_merge(wi, 50.0, wj, 50.0, 0.6, 1.5);
    CHECK(std::abs(m.model[0] - 1.6) < 1e-12);
    CHECK(std::abs(m.model[1] - 0.8) < 1e-12);
    CHECK(m.age == 50.0);
  }
  SUBCASE("outputs are convex combinations of the inputs") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n01;
    std::uniform_real_distribution<double> age(0.0, 400.0), eta(0.01, 1.0);
    for (int t = 0; t < 200; ++t) {
      ModelVector wi(8), wj(8);
      for (std::size_t k = 0; k < 8; ++k) {
        wi[k] = n01(rng);
        wj[k] = n01(rng);
      }
      const double ai = age(rng), aj = age(rng), e = eta(rng);
      const auto m = server_merge(wi, ai, wj, aj, e, 1.5);
      for (std::size_t k = 0; k < 8; ++k) {
        CHECK(m.model[k] >= std::min(wi[k], wj[k]) - 1e-12);
        CHECK(m.model[k] <= std::max(wi[k], wj[k]) + 1e-12);
      }
      CHECK(m.age >= std::min(ai, aj) - 1e-9);
      CHECK(m.age <= std::max(ai, aj) + 1e-9);

      const double w = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
      const auto c = spyker_client_merge(wi, wj, w, e);
      for (std::size_t k = 0; k < 8; ++k) {
        CHECK(c[k] >= std::min(wi[k], wj[k]) - 1e-12);
        CHECK(c[k] <= std::max(wi[k], wj[k]) + 1e-12);
      }
    }
  }
  SUBCASE("dimension mismatch") {
    ModelVector a{1.0}, b{1.0, 2.0};
    CHECK_THROWS_AS(server_merge(a, 1.0, b, 1.0, 0.6, 1.5), InvalidInput);
  }
}

TEST_CASE("operations are bitwise deterministic") {
  ModelVector a{0.123456789, -9.87654321}, b{3.14159, 2.71828};
  CHECK(server_merge(a, 17.3, b, 29.9, 0.6, 1.5).model == server_merge(a, 17.3, b, 29.9, 0.6, 1.5).model);
  CHECK(fedasync_merge(a, b, a, 4, 3, 10, 0.5) == fedasync_merge(a, b, a, 4, 3, 10, 0.5));
}

TEST_CASE("HyperParams validation") {
  HyperParams h;
  CHECK_NOTHROW(h.validate());
  h.eta_a = 0.0;
  CHECK_THROWS_AS(h.validate(), spyker::ConfigError);
  h = {};
  h.eta_min = 1.0;
  CHECK_THROWS_AS(h.validate(), spyker::ConfigError);
  CHECK(HyperParams::default_h_inter(100, 4) == 5.0);
}
