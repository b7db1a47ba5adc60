/*
 * Copyright 2026 The robustpu Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#include <catch_amalgamated.hpp>

#include <cmath>
#include <limits>

#include "robustpu/errors.hpp"
#include "robustpu/numcore.hpp"
#include "test_support.hpp"

using namespace robustpu;
using namespace robustpu::testing;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

DenseMatrix row(std::initializer_list<double> values) {
  DenseMatrix m(1, static_cast<Index>(values.size()));
  Index c = 0;
  for (double v : values) m(0, c++) = v;
  return m;
}

ModelState model_with_logit(double z) {
  ModelState m = ModelState::zeros(1, 2);
  m.params.b2 = z;
  return m;
}

}  // namespace

TEST_CASE("zero model produces zero logits") {
  const ModelState model = ModelState::zeros(3, 4);
  Rng rng(1);
  const Vector z = mlp_forward(model, random_matrix(rng, 5, 3)).logits;
  CHECK(z.size() == 5);
  CHECK(z.isZero(0.0));
}

TEST_CASE("ReLU dead region clamps the hidden unit") {
  ModelState model = ModelState::zeros(1, 4);
  model.params.w1(0, 0) = 1.0;
  model.params.w2(0) = 1.0;
  const ForwardResult fwd = mlp_forward(model, row({-3.0}));
  CHECK(fwd.logits(0) == 0.0);
  CHECK((fwd.hidden_activations.array() >= 0.0).all());
}

TEST_CASE("two-layer composition by hand") {
  ModelState model = ModelState::zeros(2, 4);
  model.params.w1(0, 0) = 1.0;
  model.params.w1(1, 0) = 2.0;
  model.params.w2(0) = 0.5;
  // relu(1*1 + 2*1) * 0.5 = 1.5
  CHECK(mlp_forward(model, row({1.0, 1.0})).logits(0) == 1.5);
  CHECK(logits(model, row({1.0, 1.0}))(0) == 1.5);
}

TEST_CASE("forward rejects a dimension mismatch") {
  const ModelState model = ModelState::zeros(3, 2);
  CHECK_THROWS_AS(mlp_forward(model, DenseMatrix::Zero(2, 4)), ConfigError);
}

TEST_CASE("predict_prob examples") {
  CHECK(predict_prob(model_with_logit(0.0), row({0.0}))(0) == 0.5);
  CHECK_THAT(predict_prob(model_with_logit(2.0), row({0.0}))(0), WithinAbs(logistic(2.0), 1e-15));
  CHECK_THAT(predict_prob(model_with_logit(2.0), row({0.0}))(0), WithinAbs(0.880797, 1e-6));
  const double hi = predict_prob(model_with_logit(1e4), row({0.0}))(0);
  const double lo = predict_prob(model_with_logit(-1e4), row({0.0}))(0);
  CHECK(hi < 1.0);
  CHECK(hi == 1.0 - kProbClamp);
  CHECK(lo > 0.0);
  CHECK(lo == kProbClamp);
}

TEST_CASE("predict_prob stays strictly inside (0, 1)") {
  Rng rng(2);
  for (int k = 0; k < 20; ++k) {
    const ModelState model = random_model(rng, 3, 5);
    const Vector q = predict_prob(model, random_matrix(rng, 50, 3, 30.0));
    CHECK((q.array() > 0.0).all());
    CHECK((q.array() < 1.0).all());
  }
}

TEST_CASE("weighted BCE scalar examples") {
  const std::uint8_t one[] = {1};
  const std::uint8_t zero[] = {0};
  const Vector unit = Vector::Ones(1);

  SECTION("all weights zero") {
    Rng rng(3);
    const ModelState model = random_model(rng, 2, 3);
    const std::uint8_t labels[] = {1, 0, 1};
    const auto r = weighted_bce_grad(model, random_matrix(rng, 3, 2), labels, Vector::Zero(3));
    CHECK(r.loss == 0.0);
    CHECK(r.grads == MlpParams::zeros(2, 3));
  }
  SECTION("y = 1, q = 0.5") {
    const auto r = weighted_bce_grad(model_with_logit(0.0), row({0.0}), one, unit);
    CHECK_THAT(r.loss, WithinAbs(std::log(2.0), 1e-15));
    CHECK_THAT(r.loss, WithinAbs(0.693147, 1e-6));
  }
  SECTION("y = 0, q = 0.9") {
    const auto r = weighted_bce_grad(model_with_logit(std::log(9.0)), row({0.0}), zero, unit);
    CHECK_THAT(r.loss, WithinAbs(-std::log(0.1), 1e-12));
    CHECK_THAT(r.loss, WithinAbs(2.302585, 1e-6));
    // d loss / d b2 = q - y
    CHECK_THAT(r.grads.b2, WithinAbs(0.9, 1e-12));
  }
}

TEST_CASE("weighted BCE input validation") {
  const ModelState model = ModelState::zeros(2, 2);
  const std::uint8_t labels[] = {1, 0};
  CHECK_THROWS_AS(weighted_bce_grad(model, DenseMatrix::Zero(2, 2), labels, Vector::Ones(3)), ConfigError);
  CHECK_THROWS_AS(weighted_bce_grad(model, DenseMatrix::Zero(0, 2), {}, Vector(0)), UsageError);
}

TEST_CASE("weighted BCE gradient matches finite differences") {
  for (int k = 0; k < 25; ++k) {
    Rng rng(derive_seed(100, {static_cast<std::uint64_t>(k)}));
    const Index d = 1 + static_cast<Index>(rng.below(5));
    const Index h = 1 + static_cast<Index>(rng.below(8));
    const Index b = 1 + static_cast<Index>(rng.below(10));
    const ModelState model = random_model(rng, d, h);
    const DenseMatrix batch = random_matrix(rng, b, d);
    BinaryLabels labels(static_cast<std::size_t>(b));
    for (auto& y : labels) y = static_cast<std::uint8_t>(rng.below(2));
    const Vector w = Vector::NullaryExpr(b, [&] { return rng.uniform(); });
    const auto r = weighted_bce_grad(model, batch, labels, w);
    const double err = max_fd_relative_error(model, r.grads, [&](const ModelState& m) {
      return weighted_bce_grad(m, batch, labels, w).loss;
    });
    INFO("model " << k << " d=" << d << " h=" << h);
    CHECK(err <= 1e-4);
  }
}

TEST_CASE("weighted BCE is non-negative and scales linearly with the weights") {
  Rng rng(4);
  for (int k = 0; k < 10; ++k) {
    const ModelState model = random_model(rng, 3, 4);
    const DenseMatrix batch = random_matrix(rng, 8, 3);
    BinaryLabels labels(8);
    for (auto& y : labels) y = static_cast<std::uint8_t>(rng.below(2));
    const Vector w = Vector::NullaryExpr(8, [&] { return rng.uniform(); });
    const auto base = weighted_bce_grad(model, batch, labels, w);
    CHECK(base.loss >= 0.0);
    // Powers of two scale every intermediate exactly.
    for (double c : {1.0, 0.5, 0.125}) {
      const auto scaled = weighted_bce_grad(model, batch, labels, c * w);
      CHECK(scaled.loss == c * base.loss);
      Gradients expected = base.grads;
      expected *= c;
      CHECK(scaled.grads == expected);
    }
    for (double c : {0.3, 0.77}) {
      const auto scaled = weighted_bce_grad(model, batch, labels, c * w);
      CHECK_THAT(scaled.loss, WithinRel(c * base.loss, 1e-12));
      CHECK_THAT(scaled.grads.b2, WithinRel(c * base.grads.b2, 1e-12));
      CHECK(scaled.grads.w1.isApprox(c * base.grads.w1, 1e-12));
    }
  }
}

TEST_CASE("init_model bounds and determinism") {
  const ModelState a = init_model(10, 100, 42);
  const ModelState b = init_model(10, 100, 42);
  const ModelState c = init_model(10, 100, 43);
  CHECK(a == b);
  CHECK_FALSE(a.params == c.params);
  const double bound1 = std::sqrt(6.0 / (10 + 100));
  const double bound2 = std::sqrt(6.0 / (100 + 1));
  CHECK(a.params.w1.cwiseAbs().maxCoeff() <= bound1);
  CHECK(a.params.w2.cwiseAbs().maxCoeff() <= bound2);
  CHECK(a.params.b1.isZero(0.0));
  CHECK(a.params.b2 == 0.0);
  CHECK(a.step == 0);
  CHECK_THROWS_AS(init_model(0, 3, 1), ConfigError);
}

TEST_CASE("Adam with zero gradient") {
  ModelState model = init_model(3, 4, 5);
  const MlpParams before = model.params;
  adam_step(model, MlpParams::zeros(3, 4), AdamSettings{});
  CHECK(model.params == before);
  CHECK(model.step == 1);

  // Existing moments decay geometrically.
  model.adam_m.b2 = 1.0;
  model.adam_v.b2 = 1.0;
  adam_step(model, MlpParams::zeros(3, 4), AdamSettings{});
  CHECK(model.adam_m.b2 == 0.9);
  CHECK(model.adam_v.b2 == 0.999);
}

TEST_CASE("Adam first step moves by lr * g / (|g| + eps)") {
  Rng rng(6);
  ModelState model = random_model(rng, 2, 3);
  const MlpParams before = model.params;
  Gradients g = MlpParams::zeros(2, 3);
  for (Index i = 0; i < g.w1.size(); ++i) g.w1.data()[i] = rng.normal();
  for (Index i = 0; i < 3; ++i) g.b1(i) = rng.normal();
  for (Index i = 0; i < 3; ++i) g.w2(i) = rng.normal();
  g.b2 = -0.25;
  const AdamSettings s{0.01};
  adam_step(model, g, s);
  auto expected_delta = [&](double gi) { return -s.learning_rate * gi / (std::abs(gi) + s.epsilon); };
  for (Index i = 0; i < g.w1.size(); ++i) {
    CHECK_THAT(model.params.w1.data()[i] - before.w1.data()[i], WithinAbs(expected_delta(g.w1.data()[i]), 1e-12));
  }
  for (Index i = 0; i < 3; ++i) {
    CHECK_THAT(model.params.b1(i) - before.b1(i), WithinAbs(expected_delta(g.b1(i)), 1e-12));
    CHECK_THAT(model.params.w2(i) - before.w2(i), WithinAbs(expected_delta(g.w2(i)), 1e-12));
  }
  CHECK_THAT(model.params.b2 - before.b2, WithinAbs(expected_delta(g.b2), 1e-12));
}

TEST_CASE("Adam with a constant gradient decreases the parameter monotonically") {
  ModelState model = ModelState::zeros(1, 1);
  Gradients g = MlpParams::zeros(1, 1);
  g.b2 = 0.3;
  double prev = model.params.b2;
  for (int k = 0; k < 2; ++k) {
    adam_step(model, g, AdamSettings{});
    CHECK(model.params.b2 < prev);
    // Bias-corrected moments equal g and g^2 for a constant gradient.
    CHECK_THAT(prev - model.params.b2, WithinAbs(1e-3 * 0.3 / (0.3 + 1e-8), 1e-15));
    prev = model.params.b2;
  }
}

TEST_CASE("Adam weight decay is decoupled") {
  ModelState model = ModelState::zeros(1, 1);
  model.params.b2 = 2.0;
  adam_step(model, MlpParams::zeros(1, 1), AdamSettings{0.1, 0.5});
  CHECK_THAT(model.params.b2, WithinAbs(2.0 * (1.0 - 0.1 * 0.5), 1e-15));
  CHECK(model.adam_m.b2 == 0.0);
}

TEST_CASE("Adam rejects non-finite gradients and bad settings") {
  ModelState model = ModelState::zeros(1, 1);
  Gradients g = MlpParams::zeros(1, 1);
  g.b2 = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(adam_step(model, g, AdamSettings{}), NumericError);
  CHECK_THROWS_AS(adam_step(model, MlpParams::zeros(1, 1), AdamSettings{0.0}), ConfigError);
  CHECK_THROWS_AS(adam_step(model, MlpParams::zeros(2, 1), AdamSettings{}), ConfigError);
}

TEST_CASE("identical seeds give bit-identical training trajectories") {
  auto run = [] {
    Rng rng(9);
    ModelState model = init_model(4, 6, 11);
    const DenseMatrix x = random_matrix(rng, 16, 4);
    BinaryLabels y(16);
    for (auto& v : y) v = static_cast<std::uint8_t>(rng.below(2));
    std::vector<ModelState> trace;
    for (int k = 0; k < 20; ++k) {
      adam_step(model, weighted_bce_grad(model, x, y, Vector::Ones(16)).grads, AdamSettings{0.01, 1e-4});
      trace.push_back(model);
    }
    return trace;
  };
  CHECK(run() == run());
}

TEST_CASE("gather_rows keeps order") {
  DenseMatrix m(3, 2);
  m << 1, 2, 3, 4, 5, 6;
  const std::vector<Index> rows{2, 0};
  const DenseMatrix g = gather_rows(m, rows);
  CHECK(g.rows() == 2);
  CHECK(g(0, 0) == 5);
  CHECK(g(1, 1) == 2);
}
