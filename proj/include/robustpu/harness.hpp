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


// Experiment runner: builds a fresh split per (pi, seed), trains each method,
// evaluates on the test set and aggregates over seeds. Cells run on a small
// thread pool; results are ordered deterministically regardless of which
// thread finished first.

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "robustpu/data.hpp"
#include "robustpu/trainer.hpp"

namespace robustpu {

enum class Method { kPn, kUpu, kNnpu, kRobustPu };

std::string_view to_string(Method method);
Method parse_method(std::string_view name);

/// Training settings of the single-objective baselines. Each trains for
/// `epochs` epochs and reports the final model, or, with
/// `select_best_epoch`, the epoch with the best validation accuracy.
struct BaselineConfig {
  int epochs = 100;
  bool select_best_epoch = false;
  Index batch_size = 64;
  double learning_rate = 1e-3;
  double weight_decay = 0.0;
  Index hidden = kDefaultHiddenWidth;
  NegativeBranchRule negative_branch = NegativeBranchRule::kCorrection;
};

/// Axes of a sweep; an empty axis keeps the base config's value.
struct SweepGrid {
  std::vector<HardnessMetric> metrics;
  std::vector<WeightMapping> mappings;
  std::vector<ScheduleKind> schedules;
  std::vector<double> taus;
  std::vector<int> epochs_per_iter;

  bool empty() const;
};

/// One grid cell: its label and the config it runs.
struct Variant {
  std::string label;
  TrainConfig train;
};

/// Cross product in axis order (metric, mapping, schedule, tau, E). A grid
/// with no axes yields one variant labeled "default".
std::vector<Variant> expand_grid(const TrainConfig& base, const SweepGrid& grid);

struct ExperimentSpec {
  std::string dataset;
  std::filesystem::path data_path;
  std::filesystem::path schema_path;
  SplitSpec split;  // pi and seed are set per cell
  std::vector<double> pi_list;
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  std::vector<Method> methods{Method::kRobustPu};
  TrainConfig train;
  /// Per-prior replacements of `train` (keyed by pi).
  std::map<double, TrainConfig> train_by_pi;
  BaselineConfig baseline;
  std::optional<SweepGrid> sweep;
  /// Write per-run iteration logs and per-sample hardness/weight dumps here.
  std::optional<std::filesystem::path> log_dir;
  int threads = 1;

  const TrainConfig& train_for(double pi) const;
  /// Throws ConfigError.
  void validate() const;
};

/// Parse an experiment config; relative paths resolve against `base_dir`.
ExperimentSpec parse_experiment(const nlohmann::json& j, const std::filesystem::path& base_dir);
ExperimentSpec load_experiment(const std::filesystem::path& path);

struct ResultRow {
  std::string dataset;
  double pi = 0.0;
  std::string method;
  std::string variant;
  double mean_error = 0.0;
  double std_error = 0.0;  // sample standard deviation; 0 for fewer than two seeds
  std::vector<double> per_seed_errors;
  /// "seed: message" for every failed run of this cell.
  std::vector<std::string> failures;
  double wall_time = 0.0;  // seconds, summed over seeds
  /// Resolved training config of the cell (JSON), for the structured records.
  std::string config;

  bool operator==(const ResultRow&) const = default;
};

/// Mean and sample standard deviation; NaN mean for an empty list.
std::pair<double, double> mean_and_std(const std::vector<double>& values);

/// Outcome of training one method on one split.
struct RunOutcome {
  ModelState model;
  double val_error = 0.0;
  double test_error = 0.0;
  std::vector<IterationRecord> records;  // Robust-PU only
};

/// Train `method` on `split` and evaluate on its test set. Robust-PU runs get
/// oracle diagnostics attached to their iteration records; the trainer
/// itself only sees split.training_view().
RunOutcome run_method(const PUSplit& split, Method method, const TrainConfig& train,
                      const BaselineConfig& baseline);

/// Oracle diagnostics of one iteration state (group losses and the mean
/// weight of hidden positives / negatives in U).
IterationDiagnostics oracle_diagnostics(const IterationState& state, const PUSplit& split);

std::vector<ResultRow> run_experiment(const ExperimentSpec& spec);
std::vector<ResultRow> run_experiment(const ExperimentSpec& spec, const RawDataset& raw);

/// Robust-PU is expanded over the grid; other methods run once with variant
/// "default".
std::vector<ResultRow> run_sweep(const ExperimentSpec& spec);
std::vector<ResultRow> run_sweep(const ExperimentSpec& spec, const RawDataset& raw);

/// Sort by (dataset, pi, method, variant).
void sort_rows(std::vector<ResultRow>& rows);

/// Comma-separated table with a fixed header. wall_time and config are
/// omitted so the table is byte-identical across repeated runs.
std::string format_csv(const std::vector<ResultRow>& rows);
std::vector<ResultRow> parse_csv(const std::string& text);

/// One JSON object per row, all fields included.
std::string format_jsonl(const std::vector<ResultRow>& rows);
std::vector<ResultRow> parse_jsonl(const std::string& text);

enum class ReportFormat { kCsv, kJsonl };

/// Writes the rows to `path`. Throws UsageError if the path is unwritable.
void emit_report(const std::vector<ResultRow>& rows, ReportFormat format,
                 const std::filesystem::path& path);

/// Shortest round-trip decimal form of a double.
std::string format_double(double value);

/// Hyperparameter search for Robust-PU: every grid point is scored by mean
/// validation error over the experiment's seeds (first prior of pi_list), ties
/// keep the earlier grid point.
struct TuneGrid {
  std::vector<double> taus;
  std::vector<double> lambda0s;
  std::vector<double> betas;
  std::vector<int> t_grows;
  std::vector<int> epochs_per_iter;
  std::vector<double> learning_rates;
  std::vector<double> weight_decays;
  std::vector<int> warmup_epochs;
};

struct TuneCandidate {
  TrainConfig train;
  double mean_val_error = 0.0;
  double mean_test_error = 0.0;
};

struct TuneResult {
  TrainConfig best;
  std::vector<TuneCandidate> candidates;  // grid order
};

TuneGrid parse_tune_grid(const nlohmann::json& j);
TuneResult tune(const ExperimentSpec& spec, const TuneGrid& grid);

}  // namespace robustpu
