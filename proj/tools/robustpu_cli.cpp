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


// Command-line front end. Every subcommand reads an experiment config (JSON)
// whose "dataset" block names the raw data and schema; see configs/.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <nlohmann/json.hpp>

#include "robustpu/config_io.hpp"
#include "robustpu/data.hpp"
#include "robustpu/errors.hpp"
#include "robustpu/harness.hpp"
#include "robustpu/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace robustpu;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = ".";
  int threads = 1;
};

void add_common(CLI::App* cmd, Common& c, bool config_required = true) {
  auto* opt = cmd->add_option("-c,--config", c.config, "experiment config (JSON)");
  if (config_required) opt->required()->check(CLI::ExistingFile);
  cmd->add_option("--seed", c.seed, "seed (replaces the config's seed list)");
  cmd->add_option("--out", c.out, "output directory");
  cmd->add_option("--threads", c.threads, "worker threads")->check(CLI::PositiveNumber);
}

ExperimentSpec load_spec(const Common& c) {
  ExperimentSpec spec = load_experiment(c.config);
  if (c.seed) spec.seeds = {*c.seed};
  spec.threads = c.threads;
  return spec;
}

fs::path out_dir(const Common& c) {
  fs::path dir(c.out);
  fs::create_directories(dir);
  return dir;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

int cmd_ingest(const Common& c) {
  const ExperimentSpec spec = load_experiment(c.config);
  const DatasetSchema schema = load_schema(spec.schema_path);
  const RawDataset raw = load_dataset(spec.data_path, schema);
  const json summary{{"dataset", spec.dataset},
                     {"rows", raw.size()},
                     {"features", raw.features.cols()},
                     {"positives", raw.count_positive()},
                     {"negatives", raw.size() - raw.count_positive()},
                     {"checksum", dataset_checksum(spec.data_path, schema)}};
  write_json(out_dir(c) / "ingest.json", summary);
  std::cout << summary.dump(2) << "\n";
  return 0;
}

int cmd_split(const Common& c, std::optional<double> pi) {
  const ExperimentSpec spec = load_spec(c);
  SplitSpec split_spec = spec.split;
  split_spec.pi = pi.value_or(spec.pi_list.front());
  split_spec.seed = spec.seeds.front();
  const RawDataset raw = load_dataset(spec.data_path, load_schema(spec.schema_path));
  const PUSplit split = make_pu_split(raw, split_spec);
  const fs::path manifest = out_dir(c) / "split.json";
  save_split(split, DatasetSource{spec.data_path, spec.schema_path}, manifest);
  std::cout << "wrote " << manifest.string() << " (" << split.x_p.rows() << " positive, "
            << split.x_u.rows() << " unlabeled, " << split.val_labels.size() << " validation, "
            << split.test_labels.size() << " test)\n";
  return 0;
}

PUSplit split_for_run(const ExperimentSpec& spec, const std::string& manifest,
                      std::optional<double> pi) {
  if (!manifest.empty()) return load_split(manifest).split;
  SplitSpec split_spec = spec.split;
  split_spec.pi = pi.value_or(spec.pi_list.front());
  split_spec.seed = spec.seeds.front();
  return make_pu_split(load_dataset(spec.data_path, load_schema(spec.schema_path)), split_spec);
}

int cmd_train(const Common& c, const std::string& manifest, const std::string& method_name,
              std::optional<double> pi) {
  const ExperimentSpec spec = load_spec(c);
  const PUSplit split = split_for_run(spec, manifest, pi);
  const Method method = parse_method(method_name);
  const RunOutcome r = run_method(split, method, spec.train_for(split.spec.pi), spec.baseline);
  const fs::path dir = out_dir(c);
  TrainConfig saved = spec.train_for(split.spec.pi);
  saved.seed = split.spec.seed;
  saved.pi_for_pretrain = split.spec.pi;
  if (method != Method::kRobustPu) saved.hidden = spec.baseline.hidden;
  save_checkpoint(dir / "model.json", r.model, saved);
  if (!r.records.empty()) {
    fs::remove(dir / "iterations.jsonl");
    append_iteration_log(dir / "iterations.jsonl", r.records);
  }
  const json summary{{"method", method_name},
                     {"pi", split.spec.pi},
                     {"seed", split.spec.seed},
                     {"val_error", r.val_error},
                     {"test_error", r.test_error},
                     {"iterations", r.records.size()}};
  write_json(dir / "train.json", summary);
  std::cout << summary.dump(2) << "\n";
  return 0;
}

int cmd_eval(const Common& c, const std::string& checkpoint, const std::string& manifest) {
  const Checkpoint ck = load_checkpoint(checkpoint);
  const PUSplit split = load_split(manifest).split;
  const json summary{{"checkpoint", checkpoint},
                     {"val_error", error_rate(ck.model, split.val_features, split.val_labels)},
                     {"test_error", error_rate(ck.model, split.test_features, split.test_labels)}};
  write_json(out_dir(c) / "eval.json", summary);
  std::cout << summary.dump(2) << "\n";
  return 0;
}

void write_results(const Common& c, const std::vector<ResultRow>& rows) {
  const fs::path dir = out_dir(c);
  emit_report(rows, ReportFormat::kCsv, dir / "results.csv");
  emit_report(rows, ReportFormat::kJsonl, dir / "results.jsonl");
  for (const auto& r : rows) {
    std::printf("%-10s pi=%-4s %-10s %-40s error %6.2f%% +- %5.2f  (%zu seeds, %zu failed, %.1fs)\n",
                r.dataset.c_str(), format_double(r.pi).c_str(), r.method.c_str(),
                r.variant.c_str(), 100.0 * r.mean_error, 100.0 * r.std_error,
                r.per_seed_errors.size(), r.failures.size(), r.wall_time);
    for (const auto& f : r.failures) std::printf("    failed seed %s\n", f.c_str());
  }
}

int cmd_experiment(const Common& c) {
  write_results(c, run_experiment(load_spec(c)));
  return 0;
}

int cmd_sweep(const Common& c) {
  const ExperimentSpec spec = load_spec(c);
  if (!spec.sweep) throw ConfigError("sweep: config has no \"sweep\" block");
  write_results(c, run_sweep(spec));
  return 0;
}

int cmd_tune(const Common& c) {
  const ExperimentSpec spec = load_spec(c);
  const json j = read_json_file(c.config);
  if (!j.contains("tune")) throw ConfigError("tune: config has no \"tune\" block");
  const TuneResult result = tune(spec, parse_tune_grid(j.at("tune")));
  const fs::path dir = out_dir(c);
  std::ofstream log(dir / "tune.jsonl");
  for (const auto& cand : result.candidates) {
    log << json{{"train", cand.train},
                {"mean_val_error", cand.mean_val_error},
                {"mean_test_error", cand.mean_test_error}}
               .dump()
        << "\n";
  }
  json best = result.best;
  best.erase("seed");
  best.erase("pi_for_pretrain");
  write_json(dir / "tuned_train.json", best);
  std::cout << "selected: " << best.dump() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"robustpu: self-paced positive-unlabeled training and experiments"};
  app.require_subcommand(1);
  Common common;

  auto* data = app.add_subcommand("data", "dataset utilities");
  data->require_subcommand(1);
  auto* ingest = data->add_subcommand("ingest", "parse a raw dataset and report its shape");
  add_common(ingest, common);
  auto* split = data->add_subcommand("split", "draw a PU split and write its manifest");
  add_common(split, common);
  std::optional<double> pi;
  split->add_option("--pi", pi, "prior of positives in U (default: first of pi_list)");

  auto* train = app.add_subcommand("train", "train one method on one split");
  add_common(train, common);
  std::string manifest, method = "robust-pu", checkpoint;
  train->add_option("--split", manifest, "split manifest (default: draw from config)");
  train->add_option("--method", method, "pn, upu, nnpu or robust-pu");
  train->add_option("--pi", pi, "prior when drawing the split");

  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on a split");
  add_common(eval, common, false);
  eval->add_option("--checkpoint", checkpoint, "checkpoint file")->required();
  eval->add_option("--split", manifest, "split manifest")->required();

  auto* experiment = app.add_subcommand("experiment", "run methods over priors and seeds");
  add_common(experiment, common);
  auto* sweep = app.add_subcommand("sweep", "run a Robust-PU grid over priors and seeds");
  add_common(sweep, common);
  auto* tune_cmd = app.add_subcommand("tune", "select Robust-PU hyperparameters on validation error");
  add_common(tune_cmd, common);

  CLI11_PARSE(app, argc, argv);
  try {
    if (ingest->parsed()) return cmd_ingest(common);
    if (split->parsed()) return cmd_split(common, pi);
    if (train->parsed()) return cmd_train(common, manifest, method, pi);
    if (eval->parsed()) return cmd_eval(common, checkpoint, manifest);
    if (experiment->parsed()) return cmd_experiment(common);
    if (sweep->parsed()) return cmd_sweep(common);
    if (tune_cmd->parsed()) return cmd_tune(common);
  } catch (const robustpu::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
