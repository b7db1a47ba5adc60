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


// PU risk estimators with the sigmoid surrogate l(z, t) = sigmoid(-t z):
//   R_p+ = mean_P l(z, +1), R_p- = mean_P l(z, -1), R_u- = mean_U l(z, -1)
//   upu  = pi R_p+ + R_u- - pi R_p-
//   nnpu = pi R_p+ + max(0, R_u- - pi R_p-)
// plus the naive PN objective (unlabeled treated as negative, BCE).

#pragma once

#include <cstdint>
#include <functional>
#include <string_view>

#include "robustpu/data.hpp"
#include "robustpu/numcore.hpp"

namespace robustpu {

/// What nnpu_risk returns as gradient when the inner term is negative.
enum class NegativeBranchRule {
  kCorrection,    // gradient of -(R_u- - pi R_p-): push the inner term back up
  kZeroGradient,  // gradient of the clamped objective
};

enum class PretrainMode { kNnpu, kPn };

std::string_view to_string(PretrainMode mode);
PretrainMode parse_pretrain_mode(std::string_view name);
std::string_view to_string(NegativeBranchRule rule);
NegativeBranchRule parse_negative_branch_rule(std::string_view name);

struct RiskConfig {
  double pi = 0.2;
  NegativeBranchRule negative_branch = NegativeBranchRule::kCorrection;
};

/// Mean surrogate losses of the three partial risks.
struct RiskParts {
  double positive_as_positive = 0.0;   // R_p+
  double unlabeled_as_negative = 0.0;  // R_u-
  double positive_as_negative = 0.0;   // R_p-

  double inner(double pi) const { return unlabeled_as_negative - pi * positive_as_negative; }
};

struct RiskResult {
  double loss = 0.0;
  Gradients grads;
  RiskParts parts;
  /// nnPU only: true when the inner term was negative.
  bool clamped = false;
};

/// l(z, +1) and l(z, -1).
double sigmoid_loss(double logit, double target);

double upu_value(const RiskParts& parts, double pi);
double nnpu_value(const RiskParts& parts, double pi);

/// Partial risks without gradients.
RiskParts risk_parts(const ModelState& model, const DenseMatrix& x_p, const DenseMatrix& x_u);

/// Mean BCE over x_p (label 1) and x_u (label 0) jointly.
RiskResult pn_risk(const ModelState& model, const DenseMatrix& x_p, const DenseMatrix& x_u);

/// Throws ConfigError unless pi in [0, 1) and both sets are non-empty.
RiskResult upu_risk(const ModelState& model, const DenseMatrix& x_p, const DenseMatrix& x_u,
                    const RiskConfig& cfg);
RiskResult nnpu_risk(const ModelState& model, const DenseMatrix& x_p, const DenseMatrix& x_u,
                     const RiskConfig& cfg);

struct PretrainSettings {
  int epochs = 100;
  Index batch_size = 64;
  AdamSettings adam;
  PretrainMode mode = PretrainMode::kNnpu;
  RiskConfig risk;
  std::uint64_t seed = 0;
};

/// Called after every pretraining epoch with (epoch, model).
using EpochCallback = std::function<void(int, const ModelState&)>;

/// Minibatch risk minimization with Adam. Each epoch shuffles P and U
/// separately and splits both into the same number of batches, so every
/// batch keeps the P:U ratio of the full data. epochs == 0 is the identity.
ModelState pretrain(ModelState model, const DenseMatrix& x_p, const DenseMatrix& x_u,
                    const PretrainSettings& settings, const EpochCallback& on_epoch = {});

/// Single-method training used by the PN / uPU / nnPU baselines: the same
/// loop, keyed by a risk kind.
enum class RiskKind { kPn, kUpu, kNnpu };
std::string_view to_string(RiskKind kind);

/// Risk and gradient of `kind` on one P/U batch pair.
RiskResult evaluate_risk(RiskKind kind, const ModelState& model, const DenseMatrix& x_p,
                         const DenseMatrix& x_u, const RiskConfig& cfg);

ModelState train_risk(ModelState model, const DenseMatrix& x_p, const DenseMatrix& x_u,
                      RiskKind kind, const PretrainSettings& settings,
                      const EpochCallback& on_epoch = {});

}  // namespace robustpu
