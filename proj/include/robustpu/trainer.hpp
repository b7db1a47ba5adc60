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


// Iterative self-paced PU training:
//   pretrain (nnPU or PN), then for t = 0, 1, ...
//     1. hardness of every P and U sample under the current model
//     2. thresholds lambda_p = F_p(t), lambda_u = F_u(t) and weights v = map(d, lambda)
//     3. E epochs of weighted BCE with P labeled 1 and U labeled 0
//   until validation accuracy has not improved for `patience` iterations.
// The best-validation model is returned (ties keep the earliest).
//
// The trainer only sees a TrainingView; oracle labels of the unlabeled set
// are reachable only through caller-supplied hooks.

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "robustpu/data.hpp"
#include "robustpu/hardness.hpp"
#include "robustpu/numcore.hpp"
#include "robustpu/pacing.hpp"
#include "robustpu/risk.hpp"
#include "robustpu/weighting.hpp"

namespace robustpu {

struct TrainConfig {
  int iterations_max = 50;
  int epochs_per_iter = 10;
  int warmup_epochs = 0;
  Index batch_size = 64;
  double learning_rate = 1e-3;
  double weight_decay = 0.0;
  double tau = 1.0;
  HardnessMetric metric = HardnessMetric::kLogistic;
  WeightMapping mapping = WeightMapping::kWelsch;
  ScheduleConfig schedule_p;
  ScheduleConfig schedule_u;
  int pretrain_epochs = 100;
  PretrainMode pretrain_mode = PretrainMode::kNnpu;
  double pi_for_pretrain = 0.2;
  NegativeBranchRule negative_branch = NegativeBranchRule::kCorrection;
  int patience = 5;
  Index hidden = kDefaultHiddenWidth;
  std::uint64_t seed = 0;

  /// Throws ConfigError.
  void validate() const;
  AdamSettings adam() const { return AdamSettings{learning_rate, weight_decay}; }
  bool operator==(const TrainConfig&) const = default;
};

/// Mean unweighted BCE per group: labeled P against 1, and the hidden
/// positives / hidden negatives of U against 0.
struct GroupLosses {
  double labeled_positive = 0.0;
  double hidden_positive = 0.0;
  double hidden_negative = 0.0;
};

/// Oracle-side diagnostics attached by a hook.
struct IterationDiagnostics {
  GroupLosses group_losses;
  double mean_weight_hidden_positive = 0.0;
  double mean_weight_hidden_negative = 0.0;
};

struct IterationRecord {
  int iteration = 0;  // 1-based
  double lambda_p = 0.0;
  double lambda_u = 0.0;
  double mean_weight_p = 0.0;
  double mean_weight_u = 0.0;
  double train_loss = 0.0;  // mean weighted BCE of the last epoch
  double val_error = 0.0;
  std::optional<IterationDiagnostics> diagnostics;
};

/// What a hook sees at the end of an iteration (after stage 3).
struct IterationState {
  int iteration;  // 1-based
  const ModelState& model;
  const HardnessVector& hardness_p;
  const HardnessVector& hardness_u;
  const WeightVector& weights_p;
  const WeightVector& weights_u;
};

struct TrainHooks {
  /// May fill record.diagnostics; must not alter training.
  std::function<void(const IterationState&, IterationRecord&)> on_iteration;
  std::function<void(const ModelState&)> on_pretrained;
};

struct TrainResult {
  ModelState model;  // best-validation checkpoint
  std::vector<IterationRecord> records;
  int best_iteration = 0;  // 1-based; 0 if no iteration ran
  double best_val_error = 1.0;
};

TrainResult robust_pu_train(const TrainingView& view, const TrainConfig& cfg,
                            const TrainHooks& hooks = {});

/// One pass over P (label 1) and U (label 0) in jointly shuffled
/// minibatches, one Adam step per batch. Batches whose weights sum to zero
/// are skipped. Returns the mean weighted BCE over all samples.
double weighted_epoch(ModelState& model, const DenseMatrix& x_p, const DenseMatrix& x_u,
                      const Vector& v_p, const Vector& v_u, Index batch_size,
                      const AdamSettings& adam, std::uint64_t shuffle_seed);

enum class WeightSource { kPrevious, kCurrent };

/// Epochs 0 .. warmup_epochs-1 of each iteration train under the previous
/// iteration's weights (unit weights before the first iteration).
WeightSource warmup_policy(int iteration, int epoch, const TrainConfig& cfg);

/// Seed of the shuffle stream for (iteration, epoch), both 0-based.
std::uint64_t epoch_shuffle_seed(std::uint64_t seed, int iteration, int epoch);

/// Structured-text checkpoint: model, config and seed.
void save_checkpoint(const std::filesystem::path& path, const ModelState& model,
                     const TrainConfig& cfg);

struct Checkpoint {
  ModelState model;
  TrainConfig config;
};

/// Throws IntegrityError on a malformed or non-finite checkpoint.
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// One JSON object per line.
std::string iteration_record_json(const IterationRecord& record);
void append_iteration_log(const std::filesystem::path& path,
                          const std::vector<IterationRecord>& records);

}  // namespace robustpu
