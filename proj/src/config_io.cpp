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


#include "robustpu/config_io.hpp"

#include <fstream>
#include <string>

#include "robustpu/errors.hpp"

namespace robustpu {

using nlohmann::json;

void require_known_keys(const json& j, std::initializer_list<const char*> allowed,
                        const char* context) {
  if (!j.is_object()) throw ConfigError(std::string(context) + ": expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError(std::string(context) + ": unknown key '" + key + "'");
  }
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": invalid JSON: " + e.what());
  }
}

namespace {

template <typename T>
void read_opt(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

template <typename Enum, typename Parse>
void read_enum(const json& j, const char* key, Enum& out, Parse parse) {
  if (!j.contains(key)) return;
  std::string name;
  read_opt(j, key, name);
  out = parse(name);
}

}  // namespace

void to_json(json& j, const ScheduleConfig& cfg) {
  j = json{{"kind", std::string(to_string(cfg.kind))},
           {"lambda0", cfg.lambda0},
           {"beta", cfg.beta},
           {"t_grow", cfg.t_grow},
           {"gamma", cfg.gamma}};
}

void from_json(const json& j, ScheduleConfig& cfg) {
  require_known_keys(j, {"kind", "lambda0", "beta", "t_grow", "gamma"}, "schedule");
  read_enum(j, "kind", cfg.kind, parse_schedule_kind);
  read_opt(j, "lambda0", cfg.lambda0);
  read_opt(j, "beta", cfg.beta);
  read_opt(j, "t_grow", cfg.t_grow);
  read_opt(j, "gamma", cfg.gamma);
}

void to_json(json& j, const TrainConfig& c) {
  j = json{{"iterations_max", c.iterations_max},
           {"epochs_per_iter", c.epochs_per_iter},
           {"warmup_epochs", c.warmup_epochs},
           {"batch_size", c.batch_size},
           {"learning_rate", c.learning_rate},
           {"weight_decay", c.weight_decay},
           {"tau", c.tau},
           {"metric", std::string(to_string(c.metric))},
           {"mapping", std::string(to_string(c.mapping))},
           {"schedule_p", c.schedule_p},
           {"schedule_u", c.schedule_u},
           {"pretrain_epochs", c.pretrain_epochs},
           {"pretrain_mode", std::string(to_string(c.pretrain_mode))},
           {"pi_for_pretrain", c.pi_for_pretrain},
           {"negative_branch", std::string(to_string(c.negative_branch))},
           {"patience", c.patience},
           {"hidden", c.hidden},
           {"seed", c.seed}};
}

void from_json(const json& j, TrainConfig& c) {
  require_known_keys(j,
                     {"iterations_max", "epochs_per_iter", "warmup_epochs", "batch_size",
                      "learning_rate", "weight_decay", "tau", "metric", "mapping", "schedule",
                      "schedule_p", "schedule_u", "pretrain_epochs", "pretrain_mode",
                      "pi_for_pretrain", "negative_branch", "patience", "hidden", "seed"},
                     "train config");
  read_opt(j, "iterations_max", c.iterations_max);
  read_opt(j, "epochs_per_iter", c.epochs_per_iter);
  read_opt(j, "warmup_epochs", c.warmup_epochs);
  read_opt(j, "batch_size", c.batch_size);
  read_opt(j, "learning_rate", c.learning_rate);
  read_opt(j, "weight_decay", c.weight_decay);
  read_opt(j, "tau", c.tau);
  read_enum(j, "metric", c.metric, parse_hardness_metric);
  read_enum(j, "mapping", c.mapping, parse_weight_mapping);
  // "schedule" sets both groups; the per-group keys then override.
  if (j.contains("schedule")) {
    c.schedule_p = j.at("schedule").get<ScheduleConfig>();
    c.schedule_u = c.schedule_p;
  }
  if (j.contains("schedule_p")) c.schedule_p = j.at("schedule_p").get<ScheduleConfig>();
  if (j.contains("schedule_u")) c.schedule_u = j.at("schedule_u").get<ScheduleConfig>();
  read_opt(j, "pretrain_epochs", c.pretrain_epochs);
  read_enum(j, "pretrain_mode", c.pretrain_mode, parse_pretrain_mode);
  read_opt(j, "pi_for_pretrain", c.pi_for_pretrain);
  read_enum(j, "negative_branch", c.negative_branch, parse_negative_branch_rule);
  read_opt(j, "patience", c.patience);
  read_opt(j, "hidden", c.hidden);
  read_opt(j, "seed", c.seed);
}

void to_json(json& j, const SplitSpec& s) {
  j = json{{"n_p", s.n_p},     {"n_u", s.n_u},         {"pi", s.pi},
           {"n_val", s.n_val}, {"n_test", s.n_test}, {"seed", s.seed}};
}

void from_json(const json& j, SplitSpec& s) {
  require_known_keys(j, {"n_p", "n_u", "pi", "n_val", "n_test", "seed"}, "split");
  read_opt(j, "n_p", s.n_p);
  read_opt(j, "n_u", s.n_u);
  read_opt(j, "pi", s.pi);
  read_opt(j, "n_val", s.n_val);
  read_opt(j, "n_test", s.n_test);
  read_opt(j, "seed", s.seed);
}

}  // namespace robustpu
