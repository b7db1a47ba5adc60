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

// Pacing functions: the per-iteration selection threshold, relaxed
// monotonically from lambda0 to beta. Iterations are counted from 0, so
// every kind starts exactly at lambda0.

#pragma once

#include <string>
#include <string_view>

namespace robustpu {

enum class ScheduleKind { kLinear, kConvex, kConcave, kExponential, kConstant };

std::string_view to_string(ScheduleKind kind);
ScheduleKind parse_schedule_kind(std::string_view name);

struct ScheduleConfig {
  ScheduleKind kind = ScheduleKind::kLinear;
  double lambda0 = 0.5;
  double beta = 1.0;
  int t_grow = 10;
  double gamma = 0.9;  // exponential only

  bool operator==(const ScheduleConfig&) const = default;
};

/// A validated schedule. Construction throws ConfigError for an invalid
/// config; evaluation never throws.
class Schedule {
 public:
  explicit Schedule(const ScheduleConfig& cfg);

  const ScheduleConfig& config() const { return cfg_; }

  /// Threshold at iteration t >= 0 (negative t is treated as 0).
  double at(int t) const;

 private:
  ScheduleConfig cfg_;
};

/// Checks lambda0 >= 0, beta >= lambda0, t_grow >= 1 and gamma in (0,1) for
/// the exponential kind. Throws ConfigError.
void validate(const ScheduleConfig& cfg);

inline double threshold(const Schedule& schedule, int t) { return schedule.at(t); }
double threshold(const ScheduleConfig& cfg, int t);

}  // namespace robustpu
