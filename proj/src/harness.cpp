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


#include "robustpu/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "robustpu/config_io.hpp"
#include "robustpu/errors.hpp"
#include "robustpu/rng.hpp"

namespace robustpu {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(Method method) {
  switch (method) {
    case Method::kPn: return "pn";
    case Method::kUpu: return "upu";
    case Method::kNnpu: return "nnpu";
    case Method::kRobustPu: return "robust-pu";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  if (name == "pn") return Method::kPn;
  if (name == "upu") return Method::kUpu;
  if (name == "nnpu") return Method::kNnpu;
  if (name == "robust-pu") return Method::kRobustPu;
  throw ConfigError("unknown method '" + std::string(name) + "'");
}

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

namespace {

double parse_double_field(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ConfigError("report: not a number: '" + s + "'");
  }
  return v;
}

}  // namespace

// ---------------------------------------------------------------------------
// Grids and specs
// ---------------------------------------------------------------------------

bool SweepGrid::empty() const {
  return metrics.empty() && mappings.empty() && schedules.empty() && taus.empty() &&
         epochs_per_iter.empty();
}

std::vector<Variant> expand_grid(const TrainConfig& base, const SweepGrid& grid) {
  std::vector<Variant> out{Variant{"", base}};
  auto extend = [&out](const auto& axis, auto apply) {
    if (axis.empty()) return;
    std::vector<Variant> next;
    for (const auto& v : out) {
      for (const auto& value : axis) {
        Variant w = v;
        const std::string part = apply(w.train, value);
        w.label = w.label.empty() ? part : w.label + "/" + part;
        next.push_back(std::move(w));
      }
    }
    out = std::move(next);
  };
  extend(grid.metrics, [](TrainConfig& c, HardnessMetric m) {
    c.metric = m;
    return "metric=" + std::string(to_string(m));
  });
  extend(grid.mappings, [](TrainConfig& c, WeightMapping m) {
    c.mapping = m;
    return "mapping=" + std::string(to_string(m));
  });
  extend(grid.schedules, [](TrainConfig& c, ScheduleKind k) {
    c.schedule_p.kind = k;
    c.schedule_u.kind = k;
    return "schedule=" + std::string(to_string(k));
  });
  extend(grid.taus, [](TrainConfig& c, double tau) {
    c.tau = tau;
    return "tau=" + format_double(tau);
  });
  extend(grid.epochs_per_iter, [](TrainConfig& c, int e) {
    c.epochs_per_iter = e;
    c.warmup_epochs = std::min(c.warmup_epochs, e);
    return "E=" + std::to_string(e);
  });
  if (out.size() == 1 && out.front().label.empty()) out.front().label = "default";
  return out;
}

const TrainConfig& ExperimentSpec::train_for(double pi) const {
  auto it = train_by_pi.find(pi);
  return it == train_by_pi.end() ? train : it->second;
}

void ExperimentSpec::validate() const {
  if (seeds.empty()) throw ConfigError("experiment: seeds must be non-empty");
  if (pi_list.empty()) throw ConfigError("experiment: pi_list must be non-empty");
  for (double pi : pi_list) {
    if (!(pi >= 0.0 && pi < 1.0)) throw ConfigError("experiment: every pi must lie in [0, 1)");
  }
  if (methods.empty()) throw ConfigError("experiment: methods must be non-empty");
  if (threads < 1) throw ConfigError("experiment: threads must be >= 1");
  if (baseline.epochs < 0 || baseline.batch_size < 1 || !(baseline.learning_rate > 0.0) ||
      baseline.hidden < 1 || !(baseline.weight_decay >= 0.0)) {
    throw ConfigError("experiment: invalid baseline settings");
  }
  train.validate();
  for (const auto& [pi, cfg] : train_by_pi) cfg.validate();
}

namespace {

fs::path resolve_path(const std::string& p, const fs::path& base_dir) {
  fs::path path(p);
  return path.is_absolute() ? path : base_dir / path;
}

template <typename T, typename Parse>
std::vector<T> parse_enum_list(const json& j, const char* key, Parse parse) {
  std::vector<T> out;
  if (!j.contains(key)) return out;
  for (const auto& name : j.at(key).get<std::vector<std::string>>()) out.push_back(parse(name));
  return out;
}

TrainConfig patched(const TrainConfig& base, const json& patch) {
  json merged = base;
  // A "schedule" patch applies to both groups.
  for (const auto& [key, value] : patch.items()) {
    if (key == "schedule") {
      merged["schedule_p"].merge_patch(value);
      merged["schedule_u"].merge_patch(value);
    } else if (key == "schedule_p" || key == "schedule_u") {
      merged[key].merge_patch(value);
    } else {
      merged[key] = value;
    }
  }
  return merged.get<TrainConfig>();
}

}  // namespace

ExperimentSpec parse_experiment(const json& j, const fs::path& base_dir) {
  require_known_keys(j,
                     {"dataset", "split", "pi_list", "seeds", "methods", "train", "train_by_pi",
                      "baseline", "sweep", "threads", "log_dir", "tune"},
                     "experiment");
  ExperimentSpec s;
  try {
    const json& d = j.at("dataset");
    require_known_keys(d, {"name", "data", "schema"}, "experiment.dataset");
    s.data_path = resolve_path(d.at("data").get<std::string>(), base_dir);
    s.schema_path = resolve_path(d.at("schema").get<std::string>(), base_dir);
    s.dataset = d.value("name", s.data_path.stem().string());
    if (j.contains("split")) s.split = j.at("split").get<SplitSpec>();
    s.pi_list = j.at("pi_list").get<std::vector<double>>();
    if (j.contains("seeds")) s.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    if (j.contains("methods")) {
      s.methods = parse_enum_list<Method>(j, "methods", parse_method);
    }
    if (j.contains("train")) s.train = patched(TrainConfig{}, j.at("train"));
    if (j.contains("train_by_pi")) {
      for (const auto& [key, patch] : j.at("train_by_pi").items()) {
        s.train_by_pi[parse_double_field(key)] = patched(s.train, patch);
      }
    }
    if (j.contains("baseline")) {
      const json& b = j.at("baseline");
      require_known_keys(b,
                         {"epochs", "select_best_epoch", "batch_size", "learning_rate", "weight_decay",
                          "hidden", "negative_branch"},
                         "experiment.baseline");
      s.baseline.epochs = b.value("epochs", s.baseline.epochs);
      s.baseline.select_best_epoch = b.value("select_best_epoch", s.baseline.select_best_epoch);
      s.baseline.batch_size = b.value("batch_size", s.baseline.batch_size);
      s.baseline.learning_rate = b.value("learning_rate", s.baseline.learning_rate);
      s.baseline.weight_decay = b.value("weight_decay", s.baseline.weight_decay);
      s.baseline.hidden = b.value("hidden", s.baseline.hidden);
      if (b.contains("negative_branch")) {
        s.baseline.negative_branch =
            parse_negative_branch_rule(b.at("negative_branch").get<std::string>());
      }
    }
    if (j.contains("sweep")) {
      const json& g = j.at("sweep");
      require_known_keys(g, {"metric", "mapping", "schedule", "tau", "epochs_per_iter"},
                         "experiment.sweep");
      SweepGrid grid;
      grid.metrics = parse_enum_list<HardnessMetric>(g, "metric", parse_hardness_metric);
      grid.mappings = parse_enum_list<WeightMapping>(g, "mapping", parse_weight_mapping);
      grid.schedules = parse_enum_list<ScheduleKind>(g, "schedule", parse_schedule_kind);
      grid.taus = g.value("tau", std::vector<double>{});
      grid.epochs_per_iter = g.value("epochs_per_iter", std::vector<int>{});
      s.sweep = grid;
    }
    s.threads = j.value("threads", 1);
    if (j.contains("log_dir")) s.log_dir = resolve_path(j.at("log_dir").get<std::string>(), base_dir);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("experiment: ") + e.what());
  }
  s.validate();
  return s;
}

ExperimentSpec load_experiment(const fs::path& path) {
  const fs::path base = path.has_parent_path() ? path.parent_path() : fs::path(".");
  return parse_experiment(read_json_file(path), base);
}

std::pair<double, double> mean_and_std(const std::vector<double>& values) {
  if (values.empty()) return {std::numeric_limits<double>::quiet_NaN(), 0.0};
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / static_cast<double>(values.size());
  if (values.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / static_cast<double>(values.size() - 1))};
}

// ---------------------------------------------------------------------------
// Single runs
// ---------------------------------------------------------------------------

IterationDiagnostics oracle_diagnostics(const IterationState& state, const PUSplit& split) {
  IterationDiagnostics d;
  const Vector qp = predict_prob(state.model, split.x_p);
  d.group_losses.labeled_positive = qp.size() > 0 ? qp.unaryExpr([](double q) { return -std::log(q); }).mean() : 0.0;
  const Vector qu = predict_prob(state.model, split.x_u);
  double loss_pos = 0.0, loss_neg = 0.0, w_pos = 0.0, w_neg = 0.0;
  Index n_pos = 0, n_neg = 0;
  for (Index i = 0; i < qu.size(); ++i) {
    const double loss = -std::log(1.0 - qu(i));
    const double w = state.weights_u.values(i);
    if (split.u_oracle_labels[static_cast<std::size_t>(i)]) {
      loss_pos += loss;
      w_pos += w;
      ++n_pos;
    } else {
      loss_neg += loss;
      w_neg += w;
      ++n_neg;
    }
  }
  if (n_pos > 0) {
    d.group_losses.hidden_positive = loss_pos / static_cast<double>(n_pos);
    d.mean_weight_hidden_positive = w_pos / static_cast<double>(n_pos);
  }
  if (n_neg > 0) {
    d.group_losses.hidden_negative = loss_neg / static_cast<double>(n_neg);
    d.mean_weight_hidden_negative = w_neg / static_cast<double>(n_neg);
  }
  return d;
}

namespace {

RunOutcome run_baseline(const PUSplit& split, RiskKind kind, const BaselineConfig& b) {
  const std::uint64_t seed = split.spec.seed;
  ModelState model = init_model(split.x_p.cols(), b.hidden, derive_seed(seed, {0x696e6974ULL}));
  PretrainSettings settings;
  settings.epochs = b.epochs;
  settings.batch_size = b.batch_size;
  settings.adam = AdamSettings{b.learning_rate, b.weight_decay};
  settings.risk = RiskConfig{split.spec.pi, b.negative_branch};
  settings.seed = derive_seed(seed, {0x62617365ULL});

  RunOutcome out;
  out.model = model;
  out.val_error = std::numeric_limits<double>::infinity();
  const TrainingView view = split.training_view();
  EpochCallback keep_best;
  if (b.select_best_epoch) {
    keep_best = [&](int, const ModelState& m) {
      const double err = error_rate(m, view.val_features, view.val_labels);
      if (err < out.val_error) {
        out.val_error = err;
        out.model = m;
      }
    };
  }
  ModelState last = train_risk(std::move(model), view.x_p, view.x_u, kind, settings, keep_best);
  if (!b.select_best_epoch || b.epochs == 0) {
    out.model = std::move(last);
    out.val_error = error_rate(out.model, view.val_features, view.val_labels);
  }
  out.test_error = error_rate(out.model, split.test_features, split.test_labels);
  return out;
}

void dump_samples(std::ostream& os, const IterationState& s, const PUSplit& split) {
  for (Index i = 0; i < s.hardness_p.values.size(); ++i) {
    os << json{{"iteration", s.iteration},
               {"index", split.indices.positive[static_cast<std::size_t>(i)]},
               {"group", "positive"},
               {"hardness", s.hardness_p.values(i)},
               {"weight", s.weights_p.values(i)},
               {"oracle_label", 1}}
              .dump()
       << "\n";
  }
  for (Index i = 0; i < s.hardness_u.values.size(); ++i) {
    os << json{{"iteration", s.iteration},
               {"index", split.indices.unlabeled[static_cast<std::size_t>(i)]},
               {"group", "unlabeled"},
               {"hardness", s.hardness_u.values(i)},
               {"weight", s.weights_u.values(i)},
               {"oracle_label", split.u_oracle_labels[static_cast<std::size_t>(i)]}}
              .dump()
       << "\n";
  }
}

RunOutcome run_method_impl(const PUSplit& split, Method method, const TrainConfig& train,
                           const BaselineConfig& baseline, std::ostream* sample_dump) {
  switch (method) {
    case Method::kPn: return run_baseline(split, RiskKind::kPn, baseline);
    case Method::kUpu: return run_baseline(split, RiskKind::kUpu, baseline);
    case Method::kNnpu: return run_baseline(split, RiskKind::kNnpu, baseline);
    case Method::kRobustPu: break;
  }
  TrainConfig cfg = train;
  cfg.seed = split.spec.seed;
  cfg.pi_for_pretrain = split.spec.pi;
  TrainHooks hooks;
  hooks.on_iteration = [&](const IterationState& state, IterationRecord& rec) {
    rec.diagnostics = oracle_diagnostics(state, split);
    if (sample_dump) dump_samples(*sample_dump, state, split);
  };
  TrainResult r = robust_pu_train(split.training_view(), cfg, hooks);
  RunOutcome out;
  out.model = std::move(r.model);
  out.val_error = r.best_val_error;
  out.test_error = error_rate(out.model, split.test_features, split.test_labels);
  out.records = std::move(r.records);
  return out;
}

}  // namespace

RunOutcome run_method(const PUSplit& split, Method method, const TrainConfig& train,
                      const BaselineConfig& baseline) {
  return run_method_impl(split, method, train, baseline, nullptr);
}

// ---------------------------------------------------------------------------
// Grid execution
// ---------------------------------------------------------------------------

namespace {

struct CellKey {
  double pi;
  Method method;
  Variant variant;
};

struct RunSlot {
  bool ok = false;
  double test_error = 0.0;
  double val_error = 0.0;
  std::string failure;
  double seconds = 0.0;
};

/// Runs fn(i) for i in [0, n) on `threads` workers.
template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn fn) {
  const auto workers = static_cast<std::size_t>(std::max(1, threads));
  if (workers == 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < std::min(workers, n); ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

std::string file_stem(const ExperimentSpec& spec, const CellKey& cell, std::uint64_t seed) {
  std::string variant = cell.variant.label;
  for (char& c : variant) {
    if (c == '/' || c == '=') c = '_';
  }
  return spec.dataset + "_pi" + format_double(cell.pi) + "_" + std::string(to_string(cell.method)) +
         "_" + variant + "_seed" + std::to_string(seed);
}

std::vector<ResultRow> run_cells(const ExperimentSpec& spec, const RawDataset& raw,
                                 const std::vector<CellKey>& cells) {
  if (spec.log_dir) fs::create_directories(*spec.log_dir);
  const std::size_t n_seeds = spec.seeds.size();
  std::vector<RunSlot> slots(cells.size() * n_seeds);

  parallel_for(slots.size(), spec.threads, [&](std::size_t k) {
    const CellKey& cell = cells[k / n_seeds];
    const std::uint64_t seed = spec.seeds[k % n_seeds];
    RunSlot& slot = slots[k];
    const auto start = std::chrono::steady_clock::now();
    try {
      SplitSpec split_spec = spec.split;
      split_spec.pi = cell.pi;
      split_spec.seed = seed;
      const PUSplit split = make_pu_split(raw, split_spec);
      std::ofstream dump;
      if (spec.log_dir && cell.method == Method::kRobustPu) {
        dump.open(*spec.log_dir / (file_stem(spec, cell, seed) + "_samples.jsonl"));
      }
      const RunOutcome r = run_method_impl(split, cell.method, cell.variant.train, spec.baseline,
                                           dump.is_open() ? &dump : nullptr);
      if (spec.log_dir && cell.method == Method::kRobustPu) {
        const fs::path log = *spec.log_dir / (file_stem(spec, cell, seed) + "_iterations.jsonl");
        fs::remove(log);
        append_iteration_log(log, r.records);
      }
      slot.ok = true;
      slot.test_error = r.test_error;
      slot.val_error = r.val_error;
    } catch (const std::exception& e) {
      slot.failure = std::to_string(seed) + ": " + e.what();
    }
    slot.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  });

  std::vector<ResultRow> rows;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    ResultRow row;
    row.dataset = spec.dataset;
    row.pi = cells[c].pi;
    row.method = std::string(to_string(cells[c].method));
    row.variant = cells[c].variant.label;
    if (cells[c].method == Method::kRobustPu) {
      json cfg = cells[c].variant.train;
      cfg.erase("seed");
      cfg.erase("pi_for_pretrain");
      row.config = cfg.dump();
    } else {
      const BaselineConfig& b = spec.baseline;
      row.config = json{{"epochs", b.epochs},
                        {"select_best_epoch", b.select_best_epoch},
                        {"batch_size", b.batch_size},
                        {"learning_rate", b.learning_rate},
                        {"weight_decay", b.weight_decay},
                        {"hidden", b.hidden},
                        {"negative_branch", std::string(to_string(b.negative_branch))}}
                       .dump();
    }
    for (std::size_t s = 0; s < n_seeds; ++s) {
      const RunSlot& slot = slots[c * n_seeds + s];
      row.wall_time += slot.seconds;
      if (slot.ok) {
        row.per_seed_errors.push_back(slot.test_error);
      } else {
        row.failures.push_back(slot.failure);
      }
    }
    std::tie(row.mean_error, row.std_error) = mean_and_std(row.per_seed_errors);
    rows.push_back(std::move(row));
  }
  sort_rows(rows);
  return rows;
}

RawDataset load_spec_dataset(const ExperimentSpec& spec) {
  if (!fs::exists(spec.data_path)) {
    throw IngestionError("dataset not found: " + spec.data_path.string());
  }
  return load_dataset(spec.data_path, load_schema(spec.schema_path));
}

}  // namespace

void sort_rows(std::vector<ResultRow>& rows) {
  auto method_rank = [](const std::string& m) {
    try {
      return static_cast<int>(parse_method(m));
    } catch (const ConfigError&) {
      return 99;
    }
  };
  std::stable_sort(rows.begin(), rows.end(), [&](const ResultRow& a, const ResultRow& b) {
    if (a.dataset != b.dataset) return a.dataset < b.dataset;
    if (a.pi != b.pi) return a.pi < b.pi;
    const int ma = method_rank(a.method), mb = method_rank(b.method);
    if (ma != mb) return ma < mb;
    if (a.method != b.method) return a.method < b.method;
    return a.variant < b.variant;
  });
}

std::vector<ResultRow> run_experiment(const ExperimentSpec& spec, const RawDataset& raw) {
  spec.validate();
  std::vector<CellKey> cells;
  for (double pi : spec.pi_list) {
    for (Method m : spec.methods) cells.push_back(CellKey{pi, m, Variant{"default", spec.train_for(pi)}});
  }
  return run_cells(spec, raw, cells);
}

std::vector<ResultRow> run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  return run_experiment(spec, load_spec_dataset(spec));
}

std::vector<ResultRow> run_sweep(const ExperimentSpec& spec, const RawDataset& raw) {
  spec.validate();
  const SweepGrid grid = spec.sweep.value_or(SweepGrid{});
  std::vector<CellKey> cells;
  for (double pi : spec.pi_list) {
    for (Method m : spec.methods) {
      if (m != Method::kRobustPu) {
        cells.push_back(CellKey{pi, m, Variant{"default", spec.train_for(pi)}});
        continue;
      }
      for (auto& v : expand_grid(spec.train_for(pi), grid)) {
        v.train.validate();
        cells.push_back(CellKey{pi, m, std::move(v)});
      }
    }
  }
  return run_cells(spec, raw, cells);
}

std::vector<ResultRow> run_sweep(const ExperimentSpec& spec) {
  spec.validate();
  return run_sweep(spec, load_spec_dataset(spec));
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

namespace {

constexpr const char* kCsvHeader =
    "dataset,pi,method,variant,n_seeds,mean_error,std_error,per_seed_errors,failures";

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> csv_split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(std::move(cur));
  return out;
}

template <typename T, typename Fmt>
std::string join(const std::vector<T>& items, const std::string& sep, Fmt fmt) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i > 0) out += sep;
    out += fmt(items[i]);
  }
  return out;
}

std::vector<std::string> split_on(const std::string& s, const std::string& sep) {
  std::vector<std::string> out;
  if (s.empty()) return out;
  std::size_t start = 0;
  for (std::size_t pos; (pos = s.find(sep, start)) != std::string::npos; start = pos + sep.size()) {
    out.push_back(s.substr(start, pos - start));
  }
  out.push_back(s.substr(start));
  return out;
}

json nullable(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double from_nullable(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

}  // namespace

std::string format_csv(const std::vector<ResultRow>& rows) {
  std::string out = std::string(kCsvHeader) + "\n";
  for (const auto& r : rows) {
    out += csv_field(r.dataset) + "," + format_double(r.pi) + "," + csv_field(r.method) + "," +
           csv_field(r.variant) + "," + std::to_string(r.per_seed_errors.size()) + "," +
           format_double(r.mean_error) + "," + format_double(r.std_error) + "," +
           join(r.per_seed_errors, ";", format_double) + "," +
           csv_field(join(r.failures, " | ", [](const std::string& s) { return s; })) + "\n";
  }
  return out;
}

std::vector<ResultRow> parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) throw ConfigError("report: unexpected CSV header");
  std::vector<ResultRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = csv_split(line);
    if (f.size() != 9) throw ConfigError("report: expected 9 CSV fields, got " + std::to_string(f.size()));
    ResultRow r;
    r.dataset = f[0];
    r.pi = parse_double_field(f[1]);
    r.method = f[2];
    r.variant = f[3];
    r.mean_error = parse_double_field(f[5]);
    r.std_error = parse_double_field(f[6]);
    for (const auto& v : split_on(f[7], ";")) r.per_seed_errors.push_back(parse_double_field(v));
    r.failures = split_on(f[8], " | ");
    if (std::to_string(r.per_seed_errors.size()) != f[4]) {
      throw ConfigError("report: n_seeds does not match per_seed_errors");
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string format_jsonl(const std::vector<ResultRow>& rows) {
  std::string out;
  for (const auto& r : rows) {
    json j{{"dataset", r.dataset},
           {"pi", r.pi},
           {"method", r.method},
           {"variant", r.variant},
           {"mean_error", nullable(r.mean_error)},
           {"std_error", nullable(r.std_error)},
           {"per_seed_errors", r.per_seed_errors},
           {"failures", r.failures},
           {"wall_time", r.wall_time},
           {"config", r.config.empty() ? json(nullptr) : json::parse(r.config)}};
    out += j.dump() + "\n";
  }
  return out;
}

std::vector<ResultRow> parse_jsonl(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<ResultRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      ResultRow r;
      r.dataset = j.at("dataset").get<std::string>();
      r.pi = j.at("pi").get<double>();
      r.method = j.at("method").get<std::string>();
      r.variant = j.at("variant").get<std::string>();
      r.mean_error = from_nullable(j.at("mean_error"));
      r.std_error = from_nullable(j.at("std_error"));
      r.per_seed_errors = j.at("per_seed_errors").get<std::vector<double>>();
      r.failures = j.at("failures").get<std::vector<std::string>>();
      r.wall_time = j.at("wall_time").get<double>();
      r.config = j.at("config").is_null() ? std::string{} : j.at("config").dump();
      rows.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw ConfigError(std::string("report: invalid JSON line: ") + e.what());
    }
  }
  return rows;
}

void emit_report(const std::vector<ResultRow>& rows, ReportFormat format, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write report " + path.string());
  out << (format == ReportFormat::kCsv ? format_csv(rows) : format_jsonl(rows));
  if (!out) throw UsageError("failed writing report " + path.string());
}

// ---------------------------------------------------------------------------
// Tuning
// ---------------------------------------------------------------------------

TuneGrid parse_tune_grid(const json& j) {
  require_known_keys(j,
                     {"tau", "lambda0", "beta", "t_grow", "epochs_per_iter", "learning_rate",
                      "weight_decay", "warmup_epochs"},
                     "tune grid");
  TuneGrid g;
  try {
    g.taus = j.value("tau", std::vector<double>{});
    g.lambda0s = j.value("lambda0", std::vector<double>{});
    g.betas = j.value("beta", std::vector<double>{});
    g.t_grows = j.value("t_grow", std::vector<int>{});
    g.epochs_per_iter = j.value("epochs_per_iter", std::vector<int>{});
    g.learning_rates = j.value("learning_rate", std::vector<double>{});
    g.weight_decays = j.value("weight_decay", std::vector<double>{});
    g.warmup_epochs = j.value("warmup_epochs", std::vector<int>{});
  } catch (const json::exception& e) {
    throw ConfigError(std::string("tune grid: ") + e.what());
  }
  return g;
}

TuneResult tune(const ExperimentSpec& spec, const TuneGrid& grid) {
  spec.validate();
  const double pi = spec.pi_list.front();
  std::vector<TrainConfig> configs{spec.train_for(pi)};
  auto extend = [&configs](const auto& axis, auto apply) {
    if (axis.empty()) return;
    std::vector<TrainConfig> next;
    for (const auto& c : configs) {
      for (const auto& v : axis) {
        TrainConfig d = c;
        apply(d, v);
        next.push_back(d);
      }
    }
    configs = std::move(next);
  };
  extend(grid.taus, [](TrainConfig& c, double v) { c.tau = v; });
  extend(grid.lambda0s, [](TrainConfig& c, double v) {
    c.schedule_p.lambda0 = c.schedule_u.lambda0 = v;
  });
  extend(grid.betas, [](TrainConfig& c, double v) { c.schedule_p.beta = c.schedule_u.beta = v; });
  extend(grid.t_grows, [](TrainConfig& c, int v) { c.schedule_p.t_grow = c.schedule_u.t_grow = v; });
  extend(grid.epochs_per_iter, [](TrainConfig& c, int v) { c.epochs_per_iter = v; });
  extend(grid.learning_rates, [](TrainConfig& c, double v) { c.learning_rate = v; });
  extend(grid.weight_decays, [](TrainConfig& c, double v) { c.weight_decay = v; });
  extend(grid.warmup_epochs, [](TrainConfig& c, int v) { c.warmup_epochs = v; });
  // Drop grid points a schedule cannot express
  // (beta below lambda0, warm-up longer than an iteration).
  std::erase_if(configs, [](const TrainConfig& c) {
    try {
      c.validate();
      return false;
    } catch (const ConfigError&) {
      return true;
    }
  });
  if (configs.empty()) throw ConfigError("tune: grid has no valid point");

  const RawDataset raw = load_spec_dataset(spec);
  const std::size_t n_seeds = spec.seeds.size();
  std::vector<RunSlot> slots(configs.size() * n_seeds);
  parallel_for(slots.size(), spec.threads, [&](std::size_t k) {
    SplitSpec split_spec = spec.split;
    split_spec.pi = pi;
    split_spec.seed = spec.seeds[k % n_seeds];
    RunSlot& slot = slots[k];
    try {
      const PUSplit split = make_pu_split(raw, split_spec);
      const RunOutcome r = run_method(split, Method::kRobustPu, configs[k / n_seeds], spec.baseline);
      slot.ok = true;
      slot.val_error = r.val_error;
      slot.test_error = r.test_error;
    } catch (const std::exception& e) {
      slot.failure = e.what();
    }
  });

  TuneResult result;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < configs.size(); ++c) {
    TuneCandidate cand{configs[c], 0.0, 0.0};
    bool ok = true;
    for (std::size_t s = 0; s < n_seeds; ++s) {
      const RunSlot& slot = slots[c * n_seeds + s];
      ok = ok && slot.ok;
      cand.mean_val_error += slot.val_error / static_cast<double>(n_seeds);
      cand.mean_test_error += slot.test_error / static_cast<double>(n_seeds);
    }
    if (!ok) cand.mean_val_error = cand.mean_test_error = std::numeric_limits<double>::quiet_NaN();
    if (ok && cand.mean_val_error < best) {
      best = cand.mean_val_error;
      result.best = configs[c];
    }
    result.candidates.push_back(std::move(cand));
  }
  if (!std::isfinite(best)) throw NumericError("tune: every grid point failed");
  return result;
}

}  // namespace robustpu
