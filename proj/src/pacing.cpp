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

#include "robustpu/pacing.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "robustpu/errors.hpp"

namespace robustpu {

std::string_view to_string(ScheduleKind kind) {
  switch (kind) {
    case ScheduleKind::kLinear: return "linear";
    case ScheduleKind::kConvex: return "convex";
    case ScheduleKind::kConcave: return "concave";
    case ScheduleKind::kExponential: return "exponential";
    case ScheduleKind::kConstant: return "constant";
  }
  return "unknown";
}

ScheduleKind parse_schedule_kind(std::string_view name) {
  if (name == "linear") return ScheduleKind::kLinear;
  if (name == "convex") return ScheduleKind::kConvex;
  if (name == "concave") return ScheduleKind::kConcave;
  if (name == "exponential" || name == "exp") return ScheduleKind::kExponential;
  if (name == "constant" || name == "const") return ScheduleKind::kConstant;
  throw ConfigError("unknown schedule kind '" + std::string(name) + "'");
}

void validate(const ScheduleConfig& cfg) {
  if (!std::isfinite(cfg.lambda0) || !std::isfinite(cfg.beta)) {
    throw ConfigError("schedule: lambda0 and beta must be finite");
  }
  if (cfg.lambda0 < 0.0) throw ConfigError("schedule: lambda0 must be >= 0");
  if (cfg.beta < cfg.lambda0) throw ConfigError("schedule: beta must be >= lambda0");
  if (cfg.t_grow < 1) throw ConfigError("schedule: t_grow must be >= 1");
  if (cfg.kind == ScheduleKind::kExponential && !(cfg.gamma > 0.0 && cfg.gamma < 1.0)) {
    throw ConfigError("schedule: gamma must lie in (0, 1) for the exponential kind");
  }
}

Schedule::Schedule(const ScheduleConfig& cfg) : cfg_(cfg) { validate(cfg_); }

double Schedule::at(int t) const {
  const double lo = cfg_.lambda0;
  const double hi = cfg_.beta;
  const double span = hi - lo;
  const double tt = static_cast<double>(std::max(t, 0));
  const double grow = static_cast<double>(cfg_.t_grow);
  constexpr double kHalfPi = std::numbers::pi / 2.0;

  switch (cfg_.kind) {
    case ScheduleKind::kLinear:
      if (tt >= grow) return hi;
      return std::min(hi, lo + span * tt / grow);
    case ScheduleKind::kConvex:
      if (tt >= grow) return hi;
      return std::min(hi, lo + span * std::sin(tt / grow * kHalfPi));
    case ScheduleKind::kConcave:
      if (tt >= grow) return hi;
      return std::min(hi, lo + span * (1.0 - std::cos(tt / grow * kHalfPi)));
    case ScheduleKind::kExponential:
      return std::min(hi, lo + span * (1.0 - std::pow(cfg_.gamma, tt)));
    case ScheduleKind::kConstant:
      return lo;
  }
  return lo;
}

double threshold(const ScheduleConfig& cfg, int t) { return Schedule(cfg).at(t); }

}  // namespace robustpu
