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


// JSON encoding of configuration structs. Missing keys keep their defaults;
// unknown keys are a ConfigError so that typos in config files do not pass
// silently.

#pragma once

#include <nlohmann/json.hpp>

#include "robustpu/data.hpp"
#include "robustpu/pacing.hpp"
#include "robustpu/trainer.hpp"

namespace robustpu {

void to_json(nlohmann::json& j, const ScheduleConfig& cfg);
void from_json(const nlohmann::json& j, ScheduleConfig& cfg);

void to_json(nlohmann::json& j, const TrainConfig& cfg);
void from_json(const nlohmann::json& j, TrainConfig& cfg);

void to_json(nlohmann::json& j, const SplitSpec& spec);
void from_json(const nlohmann::json& j, SplitSpec& spec);

/// Throws ConfigError if `j` has a key outside `allowed`.
void require_known_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                        const char* context);

/// Parse a file as JSON, mapping parse failures to ConfigError.
nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace robustpu
