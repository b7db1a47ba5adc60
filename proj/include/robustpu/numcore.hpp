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

// Dense numerical core: a single-hidden-layer ReLU MLP with one logit output,
// binary cross-entropy with per-sample weights, hand-derived gradients and
// Adam with decoupled weight decay.
//
// The forward path (mlp_forward, predict_prob, logits) is const and may be
// called concurrently on a shared model. Everything that mutates a
// ModelState is single-threaded.

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace robustpu {

using Index = Eigen::Index;
using DenseMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
/// 0/1 labels, one per row.
using BinaryLabels = std::vector<std::uint8_t>;

inline constexpr Index kDefaultHiddenWidth = 100;
/// Probabilities are clamped to [kProbClamp, 1 - kProbClamp] before logs.
inline constexpr double kProbClamp = 1e-7;

/// Parameters of the MLP. Also used for gradients and Adam moments.
struct MlpParams {
  DenseMatrix w1;  // input_dim x hidden
  Vector b1;       // hidden
  Vector w2;       // hidden
  double b2 = 0.0;

  static MlpParams zeros(Index input_dim, Index hidden);

  Index input_dim() const { return w1.rows(); }
  Index hidden() const { return w1.cols(); }
  bool all_finite() const;
  bool same_shape(const MlpParams& other) const;

  MlpParams& operator*=(double c);
  MlpParams& operator+=(const MlpParams& other);
  bool operator==(const MlpParams& other) const;
};

using Gradients = MlpParams;

struct ModelState {
  MlpParams params;
  MlpParams adam_m;
  MlpParams adam_v;
  std::int64_t step = 0;

  /// All-zero parameters and moments.
  static ModelState zeros(Index input_dim, Index hidden = kDefaultHiddenWidth);

  Index input_dim() const { return params.input_dim(); }
  Index hidden() const { return params.hidden(); }
  bool operator==(const ModelState& other) const = default;
};

struct ForwardResult {
  Vector logits;
  DenseMatrix hidden_activations;  // rows x hidden, post-ReLU
};

struct LossAndGrads {
  double loss = 0.0;
  Gradients grads;
};

struct AdamSettings {
  double learning_rate = 1e-3;
  double weight_decay = 0.0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// w1, w2 ~ U(-b, b) with b = sqrt(6 / (fan_in + fan_out)); biases zero.
ModelState init_model(Index input_dim, Index hidden, std::uint64_t seed);

ForwardResult mlp_forward(const ModelState& model, const DenseMatrix& batch);

/// Logits only; skips caching the hidden layer.
Vector logits(const ModelState& model, const DenseMatrix& batch);

double sigmoid(double z);
double clamp_prob(double q);

/// Clamped sigmoid of the logits.
Vector predict_prob(const ModelState& model, const DenseMatrix& batch);

/// Gradients of sum_i dlogits[i] * z_i with respect to all parameters.
Gradients backprop(const ModelState& model, const DenseMatrix& batch, const ForwardResult& fwd,
                   const Vector& dlogits);

/// loss = (1/B) sum_i v_i * BCE(q_i, y_i). The gradient uses v_i (q_i - y_i) / B
/// per logit, which is exact wherever the probability clamp is inactive.
LossAndGrads weighted_bce_grad(const ModelState& model, const DenseMatrix& batch,
                               std::span<const std::uint8_t> labels, const Vector& weights);

/// Per-sample unweighted BCE (clamped), used for diagnostics.
Vector bce_per_sample(const Vector& probs, std::span<const std::uint8_t> labels);

/// One Adam update with bias correction. Weight decay shrinks parameters by
/// lr * weight_decay before the moment-based step. Throws NumericError on
/// non-finite gradients.
void adam_step(ModelState& model, const Gradients& grads, const AdamSettings& settings);

/// Fraction of rows where (q >= 0.5) disagrees with the label. Throws
/// UsageError on an empty set.
double error_rate(const ModelState& model, const DenseMatrix& features,
                  std::span<const std::uint8_t> labels);

/// Rows of `source` selected by `rows`, in order.
DenseMatrix gather_rows(const DenseMatrix& source, std::span<const Index> rows);

}  // namespace robustpu
