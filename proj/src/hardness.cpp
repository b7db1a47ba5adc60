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

#include "robustpu/hardness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "robustpu/errors.hpp"

namespace robustpu {

std::string_view to_string(SampleGroup group) {
  return group == SampleGroup::kPositive ? "positive" : "unlabeled";
}

std::string_view to_string(HardnessMetric metric) {
  return metric == HardnessMetric::kLogistic ? "logistic" : "sigmoid";
}

HardnessMetric parse_hardness_metric(std::string_view name) {
  if (name == "logistic") return HardnessMetric::kLogistic;
  if (name == "sigmoid") return HardnessMetric::kSigmoid;
  throw ConfigError("unknown hardness metric '" + std::string(name) + "'");
}

double softplus(double x) {
  // log(1 + e^x) = max(x, 0) + log1p(e^-|x|)
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

double hardness_of_logit(double logit, SampleGroup group, HardnessMetric metric, double tau) {
  const double a = -pseudo_label(group) * logit / tau;
  if (metric == HardnessMetric::kLogistic) return softplus(a);
  // Keep the sigmoid form inside the open interval (0, 1) after rounding.
  return std::clamp(sigmoid(a), std::numeric_limits<double>::denorm_min(),
                    std::nextafter(1.0, 0.0));
}

HardnessVector hardness_from_logits(const Vector& logits, SampleGroup group,
                                    HardnessMetric metric, double tau) {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw ConfigError("hardness: tau must be > 0");
  HardnessVector out;
  out.group = group;
  out.metric = metric;
  out.tau = tau;
  out.values = logits.unaryExpr(
      [&](double z) { return hardness_of_logit(z, group, metric, tau); });
  return out;
}

HardnessVector measure_hardness(const ModelState& model, const DenseMatrix& features,
                                SampleGroup group, HardnessMetric metric, double tau) {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw ConfigError("hardness: tau must be > 0");
  return hardness_from_logits(logits(model, features), group, metric, tau);
}

}  // namespace robustpu
