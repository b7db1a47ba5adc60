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

// Hardness-to-weight mappings. Each is the closed-form minimizer of a
// self-paced regularizer at threshold lambda:
//   welsch: v = exp(-d / lambda^2)
//   hard:   v = 1 if d < lambda else 0
//   linear: v = max(0, 1 - d / lambda)

#pragma once

#include <string_view>

#include "robustpu/hardness.hpp"

namespace robustpu {

enum class WeightMapping { kWelsch, kHard, kLinear };

std::string_view to_string(WeightMapping mapping);
WeightMapping parse_weight_mapping(std::string_view name);

struct WeightVector {
  SampleGroup group = SampleGroup::kPositive;
  WeightMapping mapping = WeightMapping::kWelsch;
  double lambda = 1.0;
  Vector values;  // each in [0, 1]
};

double map_weight(double hardness, double lambda, WeightMapping mapping);

/// Throws ConfigError if lambda <= 0.
WeightVector map_weights(const HardnessVector& hardness, double lambda, WeightMapping mapping);

}  // namespace robustpu
