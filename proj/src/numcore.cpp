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

#include "robustpu/numcore.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "robustpu/errors.hpp"
#include "robustpu/rng.hpp"

namespace robustpu {

MlpParams MlpParams::zeros(Index input_dim, Index hidden) {
  MlpParams p;
  p.w1 = DenseMatrix::Zero(input_dim, hidden);
  p.b1 = Vector::Zero(hidden);
  p.w2 = Vector::Zero(hidden);
  p.b2 = 0.0;
  return p;
}

bool MlpParams::all_finite() const {
  return w1.allFinite() && b1.allFinite() && w2.allFinite() && std::isfinite(b2);
}

bool MlpParams::same_shape(const MlpParams& other) const {
  return w1.rows() == other.w1.rows() && w1.cols() == other.w1.cols() &&
         b1.size() == other.b1.size() && w2.size() == other.w2.size();
}

MlpParams& MlpParams::operator*=(double c) {
  w1 *= c;
  b1 *= c;
  w2 *= c;
  b2 *= c;
  return *this;
}

MlpParams& MlpParams::operator+=(const MlpParams& other) {
  w1 += other.w1;
  b1 += other.b1;
  w2 += other.w2;
  b2 += other.b2;
  return *this;
}

bool MlpParams::operator==(const MlpParams& other) const {
  return same_shape(other) && w1 == other.w1 && b1 == other.b1 && w2 == other.w2 &&
         b2 == other.b2;
}

ModelState ModelState::zeros(Index input_dim, Index hidden) {
  ModelState m;
  m.params = MlpParams::zeros(input_dim, hidden);
  m.adam_m = MlpParams::zeros(input_dim, hidden);
  m.adam_v = MlpParams::zeros(input_dim, hidden);
  m.step = 0;
  return m;
}

ModelState init_model(Index input_dim, Index hidden, std::uint64_t seed) {
  if (input_dim <= 0 || hidden <= 0) {
    throw ConfigError("init_model: input_dim and hidden must be positive");
  }
  ModelState m = ModelState::zeros(input_dim, hidden);
  Rng rng(seed);
  const double bound1 = std::sqrt(6.0 / static_cast<double>(input_dim + hidden));
  for (Index i = 0; i < input_dim; ++i)
    for (Index j = 0; j < hidden; ++j) m.params.w1(i, j) = rng.uniform(-bound1, bound1);
  const double bound2 = std::sqrt(6.0 / static_cast<double>(hidden + 1));
  for (Index j = 0; j < hidden; ++j) m.params.w2(j) = rng.uniform(-bound2, bound2);
  return m;
}

namespace {

void check_batch(const ModelState& model, const DenseMatrix& batch) {
  if (batch.cols() != model.input_dim()) {
    std::ostringstream os;
    os << "dimension mismatch: batch has " << batch.cols() << " columns, model expects "
       << model.input_dim();
    throw ConfigError(os.str());
  }
}

}  // namespace

ForwardResult mlp_forward(const ModelState& model, const DenseMatrix& batch) {
  check_batch(model, batch);
  ForwardResult out;
  out.hidden_activations.noalias() = batch * model.params.w1;
  out.hidden_activations.rowwise() += model.params.b1.transpose();
  out.hidden_activations = out.hidden_activations.cwiseMax(0.0);
  out.logits.noalias() = out.hidden_activations * model.params.w2;
  out.logits.array() += model.params.b2;
  return out;
}

Vector logits(const ModelState& model, const DenseMatrix& batch) {
  return mlp_forward(model, batch).logits;
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double clamp_prob(double q) { return std::clamp(q, kProbClamp, 1.0 - kProbClamp); }

Vector predict_prob(const ModelState& model, const DenseMatrix& batch) {
  Vector z = logits(model, batch);
  return z.unaryExpr([](double v) { return clamp_prob(sigmoid(v)); });
}

Gradients backprop(const ModelState& model, const DenseMatrix& batch, const ForwardResult& fwd,
                   const Vector& dlogits) {
  Gradients g;
  g.w2.noalias() = fwd.hidden_activations.transpose() * dlogits;
  g.b2 = dlogits.sum();
  DenseMatrix dhidden = dlogits * model.params.w2.transpose();
  dhidden = (fwd.hidden_activations.array() > 0.0).select(dhidden, 0.0);
  g.w1.noalias() = batch.transpose() * dhidden;
  g.b1 = dhidden.colwise().sum().transpose();
  return g;
}

Vector bce_per_sample(const Vector& probs, std::span<const std::uint8_t> labels) {
  Vector out(probs.size());
  for (Index i = 0; i < probs.size(); ++i) {
    const double q = clamp_prob(probs(i));
    out(i) = labels[static_cast<std::size_t>(i)] ? -std::log(q) : -std::log(1.0 - q);
  }
  return out;
}

LossAndGrads weighted_bce_grad(const ModelState& model, const DenseMatrix& batch,
                               std::span<const std::uint8_t> labels, const Vector& weights) {
  const auto n = batch.rows();
  if (static_cast<Index>(labels.size()) != n || weights.size() != n) {
    throw ConfigError("weighted_bce_grad: batch, labels and weights must have equal length");
  }
  if (n == 0) throw UsageError("weighted_bce_grad: empty batch");
  const ForwardResult fwd = mlp_forward(model, batch);
  const double inv_n = 1.0 / static_cast<double>(n);

  Vector dz(n);
  double loss = 0.0;
  for (Index i = 0; i < n; ++i) {
    const double y = labels[static_cast<std::size_t>(i)] ? 1.0 : 0.0;
    const double q_raw = sigmoid(fwd.logits(i));
    const double q = clamp_prob(q_raw);
    const double v = weights(i);
    loss += v * (y > 0.5 ? -std::log(q) : -std::log(1.0 - q));
    dz(i) = v * (q_raw - y) * inv_n;
  }
  LossAndGrads out;
  out.loss = loss * inv_n;
  out.grads = backprop(model, batch, fwd, dz);
  return out;
}

void adam_step(ModelState& model, const Gradients& grads, const AdamSettings& s) {
  if (!(s.learning_rate > 0.0) || !(s.weight_decay >= 0.0)) {
    throw ConfigError("adam_step: learning_rate must be > 0 and weight_decay >= 0");
  }
  if (!grads.same_shape(model.params)) throw ConfigError("adam_step: gradient shape mismatch");
  if (!grads.all_finite()) {
    std::ostringstream os;
    os << "non-finite gradient at optimizer step " << model.step;
    throw NumericError(os.str());
  }

  model.step += 1;
  const double t = static_cast<double>(model.step);
  const double bc1 = 1.0 - std::pow(s.beta1, t);
  const double bc2 = 1.0 - std::pow(s.beta2, t);
  const double shrink = 1.0 - s.learning_rate * s.weight_decay;

  auto update = [&](auto&& p, auto&& m, auto&& v, const auto& g) {
    m = s.beta1 * m + (1.0 - s.beta1) * g;
    v = s.beta2 * v + (1.0 - s.beta2) * g.square();
    if (shrink != 1.0) p *= shrink;
    p -= s.learning_rate * (m / bc1) / ((v / bc2).sqrt() + s.epsilon);
  };
  update(model.params.w1.array(), model.adam_m.w1.array(), model.adam_v.w1.array(),
         grads.w1.array());
  update(model.params.b1.array(), model.adam_m.b1.array(), model.adam_v.b1.array(),
         grads.b1.array());
  update(model.params.w2.array(), model.adam_m.w2.array(), model.adam_v.w2.array(),
         grads.w2.array());

  double& m = model.adam_m.b2;
  double& v = model.adam_v.b2;
  m = s.beta1 * m + (1.0 - s.beta1) * grads.b2;
  v = s.beta2 * v + (1.0 - s.beta2) * grads.b2 * grads.b2;
  model.params.b2 *= shrink;
  model.params.b2 -= s.learning_rate * (m / bc1) / (std::sqrt(v / bc2) + s.epsilon);
}

double error_rate(const ModelState& model, const DenseMatrix& features,
                  std::span<const std::uint8_t> labels) {
  if (features.rows() == 0) throw UsageError("error_rate: empty evaluation set");
  if (static_cast<Index>(labels.size()) != features.rows()) {
    throw ConfigError("error_rate: features and labels differ in length");
  }
  const Vector q = predict_prob(model, features);
  Index wrong = 0;
  for (Index i = 0; i < q.size(); ++i) {
    const bool predicted = q(i) >= 0.5;
    if (predicted != (labels[static_cast<std::size_t>(i)] != 0)) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(q.size());
}

DenseMatrix gather_rows(const DenseMatrix& source, std::span<const Index> rows) {
  DenseMatrix out(static_cast<Index>(rows.size()), source.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Index>(i)) = source.row(rows[i]);
  return out;
}

}  // namespace robustpu
