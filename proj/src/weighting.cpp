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

#include "robustpu/weighting.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "robustpu/errors.hpp"

namespace robustpu {

std::string_view to_string(WeightMapping mapping) {
  switch (mapping) {
    case WeightMapping::kWelsch: return "welsch";
    case WeightMapping::kHard: return "hard";
    case WeightMapping::kLinear: return "linear";
  }
  return "unknown";
}

WeightMapping parse_weight_mapping(std::string_view name) {
  if (name == "welsch") return WeightMapping::kWelsch;
  if (name == "hard") return WeightMapping::kHard;
  if (name == "linear") return WeightMapping::kLinear;
  throw ConfigError("unknown weight mapping '" + std::string(name) + "'");
}

double map_weight(double d, double lambda, WeightMapping mapping) {
  switch (mapping) {
    case WeightMapping::kWelsch: return std::exp(-d / (lambda * lambda));
    case WeightMapping::kHard: return d < lambda ? 1.0 : 0.0;
    case WeightMapping::kLinear: return std::clamp(1.0 - d / lambda, 0.0, 1.0);
  }
  return 0.0;
}

WeightVector map_weights(const HardnessVector& hardness, double lambda, WeightMapping mapping) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw ConfigError("map_weights: lambda must be > 0");
  }
  WeightVector out;
  out.group = hardness.group;
  out.mapping = mapping;
  out.lambda = lambda;
  out.values = hardness.values.unaryExpr([&](double d) { return map_weight(d, lambda, mapping); });
  return out;
}

}  // namespace robustpu
