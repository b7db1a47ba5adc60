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

#pragma once

#include <string_view>

#include "robustpu/numcore.hpp"

namespace robustpu {

/// Labeled positives get pseudo label +1, unlabeled samples -1.
enum class SampleGroup { kPositive, kUnlabeled };

enum class HardnessMetric { kLogistic, kSigmoid };

std::string_view to_string(SampleGroup group);
std::string_view to_string(HardnessMetric metric);
HardnessMetric parse_hardness_metric(std::string_view name);

inline double pseudo_label(SampleGroup group) {
  return group == SampleGroup::kPositive ? 1.0 : -1.0;
}

struct HardnessVector {
  SampleGroup group = SampleGroup::kPositive;
  HardnessMetric metric = HardnessMetric::kLogistic;
  double tau = 1.0;
  Vector values;
};

/// Numerically stable log(1 + exp(x)).
double softplus(double x);

/// Hardness of a single logit. Logistic: softplus(-y z / tau).
/// Sigmoid: sigmoid(-y z / tau).
double hardness_of_logit(double logit, SampleGroup group, HardnessMetric metric, double tau);

/// Hardness from precomputed logits (one full pass, no minibatching).
HardnessVector hardness_from_logits(const Vector& logits, SampleGroup group,
                                    HardnessMetric metric, double tau);

/// Full-group hardness under the current model. Throws ConfigError if tau <= 0.
HardnessVector measure_hardness(const ModelState& model, const DenseMatrix& features,
                                SampleGroup group, HardnessMetric metric, double tau);

}  // namespace robustpu
