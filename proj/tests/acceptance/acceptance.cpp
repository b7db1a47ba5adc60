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


// Acceptance suite. Usage: robustpu_acceptance [criterion ...]
// With no arguments every criterion runs. Each prints exactly one line,
// "[PASS] <n> ..." or "[FAIL] <n> ...", and the exit code is non-zero if any
// selected criterion failed.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "robustpu/config_io.hpp"
#include "robustpu/data.hpp"
#include "robustpu/errors.hpp"
#include "robustpu/harness.hpp"
#include "robustpu/pacing.hpp"
#include "robustpu/risk.hpp"
#include "robustpu/rng.hpp"
#include "robustpu/weighting.hpp"
#include "../unit/test_support.hpp"

namespace fs = std::filesystem;
using namespace robustpu;
using robustpu::testing::max_fd_relative_error;
using robustpu::testing::random_matrix;

namespace {

const fs::path kSourceDir = ROBUSTPU_SOURCE_DIR;
const fs::path kCliPath = ROBUSTPU_CLI_PATH;

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    if (detail.tellp() > 0) detail << "; ";
    detail << (ok ? "" : "NOT ") << what;
  }
};

std::string pct(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f%%", 100.0 * fraction);
  return buf;
}

ExperimentSpec preset(const std::string& name) { return load_experiment(kSourceDir / "configs" / name); }

const ResultRow& find_row(const std::vector<ResultRow>& rows, double pi, const std::string& method,
                          const std::string& variant = "default") {
  for (const auto& r : rows) {
    if (r.pi == pi && r.method == method && r.variant == variant) return r;
  }
  throw UsageError("no result row for " + method + " " + variant);
}

void require_complete(Verdict& v, const std::vector<ResultRow>& rows) {
  for (const auto& r : rows) {
    if (!r.failures.empty()) v.require(false, r.method + " " + r.variant + " failed: " + r.failures.front());
  }
}

double seconds_per_seed(const ResultRow& r) {
  return r.wall_time / static_cast<double>(std::max<std::size_t>(1, r.per_seed_errors.size()));
}

// ---------------------------------------------------------------------------
// 1, 2, 4: headline error rates
// ---------------------------------------------------------------------------

void headline(Verdict& v, const std::string& config, double pi, double rpu_max,
              std::optional<std::pair<double, double>> nnpu_band, double max_seconds) {
  ExperimentSpec spec = preset(config);
  spec.pi_list = {pi};
  spec.methods = {Method::kNnpu, Method::kRobustPu};
  const auto rows = run_experiment(spec);
  require_complete(v, rows);
  const ResultRow& rpu = find_row(rows, pi, "robust-pu");
  const ResultRow& nn = find_row(rows, pi, "nnpu");
  v.require(rpu.per_seed_errors.size() >= 5, std::to_string(rpu.per_seed_errors.size()) + " seeds >= 5");
  v.require(rpu.mean_error <= rpu_max, "robust-pu " + pct(rpu.mean_error) + " <= " + pct(rpu_max));
  if (nnpu_band) {
    v.require(nn.mean_error >= nnpu_band->first && nn.mean_error <= nnpu_band->second,
              "nnpu " + pct(nn.mean_error) + " in [" + pct(nnpu_band->first) + ", " +
                  pct(nnpu_band->second) + "]");
  }
  v.require(rpu.mean_error < nn.mean_error,
            "robust-pu " + pct(rpu.mean_error) + " < nnpu " + pct(nn.mean_error));
  const double sec = seconds_per_seed(rpu);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "robust-pu %.1f s/seed < %.0f s", sec, max_seconds);
  v.require(sec < max_seconds, buf);
}

void criterion_1(Verdict& v) { headline(v, "mushroom.json", 0.2, 0.015, {{0.003, 0.035}}, 300.0); }
void criterion_2(Verdict& v) { headline(v, "spambase.json", 0.2, 0.09, {{0.07, 0.14}}, 300.0); }
void criterion_4(Verdict& v) { headline(v, "mnist.json", 0.2, 0.06, std::nullopt, 1200.0); }

// ---------------------------------------------------------------------------
// 3: shuttle robustness gap
// ---------------------------------------------------------------------------

void criterion_3(Verdict& v) {
  ExperimentSpec spec = preset("shuttle.json");
  if (!fs::exists(spec.data_path)) {
    v.require(false, "shuttle data present at " + spec.data_path.string());
    return;
  }
  spec.pi_list = {0.2, 0.6};
  spec.methods = {Method::kNnpu, Method::kRobustPu};
  const auto rows = run_experiment(spec);
  require_complete(v, rows);
  const double rpu_gap = find_row(rows, 0.6, "robust-pu").mean_error - find_row(rows, 0.2, "robust-pu").mean_error;
  const double nn_gap = find_row(rows, 0.6, "nnpu").mean_error - find_row(rows, 0.2, "nnpu").mean_error;
  v.require(rpu_gap <= 0.015, "robust-pu gap " + pct(rpu_gap) + " <= 1.5 pts");
  v.require(rpu_gap < nn_gap, "robust-pu gap " + pct(rpu_gap) + " < nnpu gap " + pct(nn_gap));
}

// ---------------------------------------------------------------------------
// 5: ablation directions on mushroom, pi = 0.6
// ---------------------------------------------------------------------------

void criterion_5(Verdict& v) {
  const auto mapping = run_sweep(preset("mushroom_mapping.json"));
  const auto sched = run_sweep(preset("mushroom_scheduler.json"));
  const auto metric = run_sweep(preset("mushroom_metric.json"));
  require_complete(v, mapping);
  require_complete(v, sched);
  require_complete(v, metric);
  auto err = [](const std::vector<ResultRow>& rows, const std::string& variant) {
    return find_row(rows, 0.6, "robust-pu", variant).mean_error;
  };
  const double welsch = err(mapping, "mapping=welsch");
  for (const char* other : {"hard", "linear"}) {
    const double e = err(mapping, std::string("mapping=") + other);
    v.require(welsch < e, "welsch " + pct(welsch) + " < " + other + " " + pct(e));
  }
  const double constant = err(sched, "schedule=constant");
  for (const char* kind : {"linear", "convex", "concave", "exponential"}) {
    const double e = err(sched, std::string("schedule=") + kind);
    v.require(e < constant, std::string(kind) + " " + pct(e) + " < constant " + pct(constant));
  }
  const double logistic = err(metric, "metric=logistic");
  const double sigmoid_metric = err(metric, "metric=sigmoid");
  v.require(logistic <= sigmoid_metric + 0.005,
            "logistic " + pct(logistic) + " <= sigmoid " + pct(sigmoid_metric) + " + 0.5 pt");
}

// ---------------------------------------------------------------------------
// 6: gradient check
// ---------------------------------------------------------------------------

void criterion_6(Verdict& v) {
  constexpr int kModels = 25;
  double worst_bce = 0.0, worst_upu = 0.0, worst_nnpu = 0.0;
  int clamped = 0, unclamped = 0;
  for (int k = 0; k < kModels; ++k) {
    Rng rng(derive_seed(2024, {static_cast<std::uint64_t>(k)}));
    const Index d = 1 + static_cast<Index>(rng.below(5));
    const Index h = 1 + static_cast<Index>(rng.below(8));
    const ModelState model = robustpu::testing::random_model(rng, d, h);
    const DenseMatrix batch = random_matrix(rng, 6, d);
    BinaryLabels labels(6);
    for (auto& y : labels) y = static_cast<std::uint8_t>(rng.below(2));
    const Vector weights = Vector::NullaryExpr(6, [&] { return rng.uniform(); });
    const auto bce = weighted_bce_grad(model, batch, labels, weights);
    worst_bce = std::max(worst_bce, max_fd_relative_error(model, bce.grads, [&](const ModelState& m) {
      return weighted_bce_grad(m, batch, labels, weights).loss;
    }));

    const DenseMatrix x_p = random_matrix(rng, 4, d);
    const DenseMatrix x_u = random_matrix(rng, 7, d);
    const RiskConfig cfg{rng.uniform(0.1, 0.9), NegativeBranchRule::kZeroGradient};
    const auto upu = upu_risk(model, x_p, x_u, cfg);
    worst_upu = std::max(worst_upu, max_fd_relative_error(model, upu.grads, [&](const ModelState& m) {
      return upu_risk(m, x_p, x_u, cfg).loss;
    }));
    // Both nnPU branches: with x_u = x_p and pi near 1 the inner term is negative.
    for (const bool force_clamp : {false, true}) {
      const DenseMatrix& xu = force_clamp ? x_p : x_u;
      const RiskConfig c{force_clamp ? 0.95 : cfg.pi, NegativeBranchRule::kZeroGradient};
      const auto nn = nnpu_risk(model, x_p, xu, c);
      (nn.clamped ? clamped : unclamped)++;
      worst_nnpu = std::max(worst_nnpu, max_fd_relative_error(model, nn.grads, [&](const ModelState& m) {
        return nnpu_risk(m, x_p, xu, c).loss;
      }));
      if (nn.clamped) {
        // The correction rule returns the gradient of -(R_u- - pi R_p-).
        const RiskConfig corr{c.pi, NegativeBranchRule::kCorrection};
        const auto nc = nnpu_risk(model, x_p, xu, corr);
        worst_nnpu = std::max(worst_nnpu, max_fd_relative_error(model, nc.grads, [&](const ModelState& m) {
          return -risk_parts(m, x_p, xu).inner(c.pi);
        }));
      }
    }
  }
  char buf[200];
  std::snprintf(buf, sizeof(buf), "%d models: max rel error bce %.2e, upu %.2e, nnpu %.2e <= 1e-4",
                kModels, worst_bce, worst_upu, worst_nnpu);
  v.require(worst_bce <= 1e-4 && worst_upu <= 1e-4 && worst_nnpu <= 1e-4, buf);
  v.require(clamped > 0 && unclamped > 0, "both nnpu branches exercised");
}

// ---------------------------------------------------------------------------
// 7: uPU unbiasedness
// ---------------------------------------------------------------------------

void criterion_7(Verdict& v) {
  constexpr double kPi = 0.3;
  constexpr Index kDim = 2;
  constexpr Index kPopulation = 20000;
  constexpr int kDraws = 2000;
  Rng rng(77);
  DenseMatrix pos(kPopulation, kDim), neg(kPopulation, kDim);
  for (Index i = 0; i < kPopulation; ++i) {
    for (Index c = 0; c < kDim; ++c) {
      pos(i, c) = 1.0 + rng.normal();
      neg(i, c) = -1.0 + rng.normal();
    }
  }
  const ModelState model = init_model(kDim, 4, 5);
  // Fully supervised risk of the fixed model under the same surrogate.
  const RiskParts pop_p = risk_parts(model, pos, neg);
  const double pn_risk_value = kPi * pop_p.positive_as_positive + (1.0 - kPi) * pop_p.unlabeled_as_negative;

  const Vector zp = logits(model, pos);
  const Vector zn = logits(model, neg);
  double sum = 0.0, sum_sq = 0.0;
  for (int draw = 0; draw < kDraws; ++draw) {
    RiskParts parts;
    constexpr int n_p = 50, n_u = 100;
    for (int i = 0; i < n_p; ++i) {
      const double z = zp(static_cast<Index>(rng.below(kPopulation)));
      parts.positive_as_positive += sigmoid_loss(z, 1.0) / n_p;
      parts.positive_as_negative += sigmoid_loss(z, -1.0) / n_p;
    }
    for (int i = 0; i < n_u; ++i) {
      const bool positive = rng.uniform() < kPi;
      const double z = (positive ? zp : zn)(static_cast<Index>(rng.below(kPopulation)));
      parts.unlabeled_as_negative += sigmoid_loss(z, -1.0) / n_u;
    }
    const double r = upu_value(parts, kPi);
    sum += r;
    sum_sq += r * r;
  }
  const double mean = sum / kDraws;
  const double sd = std::sqrt((sum_sq - kDraws * mean * mean) / (kDraws - 1));
  const double se = sd / std::sqrt(static_cast<double>(kDraws));
  char buf[200];
  std::snprintf(buf, sizeof(buf), "mean uPU %.5f vs PN risk %.5f over %d draws, |diff| %.5f <= 3 SE %.5f",
                mean, pn_risk_value, kDraws, std::abs(mean - pn_risk_value), 3 * se);
  v.require(std::abs(mean - pn_risk_value) <= 3 * se, buf);
}

// ---------------------------------------------------------------------------
// 8: scheduler suite
// ---------------------------------------------------------------------------

void criterion_8(Verdict& v) {
  Rng rng(8);
  int violations = 0;
  std::string first;
  auto fail = [&](const std::string& what) {
    if (violations++ == 0) first = what;
  };
  constexpr int kConfigs = 1000;
  for (int k = 0; k < kConfigs; ++k) {
    ScheduleConfig base;
    base.lambda0 = rng.uniform(0.01, 2.0);
    base.beta = base.lambda0 + rng.uniform(0.0, 5.0);
    base.t_grow = 1 + static_cast<int>(rng.below(30));
    base.gamma = rng.uniform(0.01, 0.99);
    std::map<ScheduleKind, std::vector<double>> curves;
    for (ScheduleKind kind : {ScheduleKind::kLinear, ScheduleKind::kConvex, ScheduleKind::kConcave,
                              ScheduleKind::kExponential, ScheduleKind::kConstant}) {
      ScheduleConfig cfg = base;
      cfg.kind = kind;
      const Schedule s(cfg);
      auto& curve = curves[kind];
      for (int t = 0; t <= 3 * cfg.t_grow + 5; ++t) curve.push_back(s.at(t));
      if (curve[0] != cfg.lambda0) fail("F(0) != lambda0");
      for (std::size_t t = 0; t < curve.size(); ++t) {
        if (curve[t] < cfg.lambda0 || curve[t] > cfg.beta) fail("out of [lambda0, beta]");
        if (t > 0 && curve[t] < curve[t - 1]) fail("decreasing");
        const bool reaches = kind == ScheduleKind::kLinear || kind == ScheduleKind::kConvex ||
                             kind == ScheduleKind::kConcave;
        if (reaches && static_cast<int>(t) >= cfg.t_grow && curve[t] != cfg.beta) fail("not beta after t_grow");
      }
    }
    for (int t = 1; t < base.t_grow; ++t) {
      const double cv = curves[ScheduleKind::kConvex][t];
      const double li = curves[ScheduleKind::kLinear][t];
      const double cc = curves[ScheduleKind::kConcave][t];
      if (!(cv >= li && li >= cc)) fail("convex >= linear >= concave violated");
    }
  }
  v.require(violations == 0, std::to_string(kConfigs) + " configs x 5 kinds: " +
                                 std::to_string(violations) + " violations" +
                                 (first.empty() ? "" : " (first: " + first + ")"));
}

// ---------------------------------------------------------------------------
// 9: weighting suite
// ---------------------------------------------------------------------------

void criterion_9(Verdict& v) {
  Rng rng(9);
  int violations = 0;
  for (WeightMapping m : {WeightMapping::kWelsch, WeightMapping::kHard, WeightMapping::kLinear}) {
    for (int k = 0; k < 2000; ++k) {
      const double lambda = rng.uniform(0.05, 5.0);
      const double d1 = rng.uniform(0.0, 10.0), d2 = d1 + rng.uniform(0.0, 3.0);
      const double l2 = lambda + rng.uniform(0.0, 3.0);
      const double w = map_weight(d1, lambda, m);
      if (!(w >= 0.0 && w <= 1.0)) ++violations;
      if (map_weight(d2, lambda, m) > w) ++violations;
      if (map_weight(d1, l2, m) < w) ++violations;
    }
  }
  v.require(violations == 0, "range/monotonicity over 6000 draws: " + std::to_string(violations) + " violations");
  double worst = 0.0;
  for (double lambda : {0.1, 0.5, 1.0, 2.0, 5.0}) {
    worst = std::max(worst, std::abs(map_weight(0.0, lambda, WeightMapping::kWelsch) - 1.0));
    worst = std::max(worst, std::abs(map_weight(lambda * lambda, lambda, WeightMapping::kWelsch) - std::exp(-1.0)));
  }
  char buf[96];
  std::snprintf(buf, sizeof(buf), "welsch(0)=1 and welsch(lambda^2)=1/e within %.1e <= 1e-12", worst);
  v.require(worst <= 1e-12, buf);
}

// ---------------------------------------------------------------------------
// 10: split suite
// ---------------------------------------------------------------------------

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void criterion_10(Verdict& v) {
  const fs::path dir = fs::temp_directory_path() / "robustpu_acceptance_split";
  fs::create_directories(dir);
  {
    std::ofstream csv(dir / "pool.csv");
    csv << "x,label\n";
    for (int i = 0; i < 6000; ++i) csv << i << "," << (i % 5 < 2 ? "pos" : "neg") << "\n";
    std::ofstream schema(dir / "pool.schema.json");
    schema << R"({"name":"pool","label_column":"label","positive_classes":["pos"],"negative_classes":["neg"]})";
  }
  const DatasetSource source{dir / "pool.csv", dir / "pool.schema.json"};
  const RawDataset raw = load_dataset(source.data_path, load_schema(source.schema_path));
  Rng rng(10);
  int count_bad = 0, overlap_bad = 0, determinism_bad = 0;
  for (int k = 0; k < 200; ++k) {
    SplitSpec spec;
    spec.n_p = 100 + static_cast<Index>(rng.below(300));
    spec.n_u = 1 + static_cast<Index>(rng.below(1500));
    spec.pi = rng.uniform();
    spec.n_val = static_cast<Index>(rng.below(100));
    spec.n_test = static_cast<Index>(rng.below(300));
    spec.seed = rng.next();
    const PUSplit split = make_pu_split(raw, spec);
    const auto hidden = std::count(split.u_oracle_labels.begin(), split.u_oracle_labels.end(), 1);
    if (hidden != static_cast<long>(std::floor(static_cast<double>(spec.n_u) * spec.pi + 0.5))) ++count_bad;
    std::vector<Index> all;
    for (const auto* part : {&split.indices.positive, &split.indices.unlabeled, &split.indices.val,
                             &split.indices.test}) {
      all.insert(all.end(), part->begin(), part->end());
    }
    std::sort(all.begin(), all.end());
    if (std::adjacent_find(all.begin(), all.end()) != all.end()) ++overlap_bad;
    save_split(split, source, dir / "a.json");
    save_split(make_pu_split(raw, spec), source, dir / "b.json");
    if (read_file(dir / "a.json") != read_file(dir / "b.json")) ++determinism_bad;
  }
  fs::remove_all(dir);
  v.require(count_bad == 0, "hidden positives == round(n_u*pi) in 200 draws (" + std::to_string(count_bad) + " bad)");
  v.require(overlap_bad == 0, "index sets disjoint (" + std::to_string(overlap_bad) + " bad)");
  v.require(determinism_bad == 0, "same seed -> byte-identical manifests (" + std::to_string(determinism_bad) + " bad)");
}

// ---------------------------------------------------------------------------
// 11: end-to-end determinism through the CLI
// ---------------------------------------------------------------------------

void criterion_11(Verdict& v) {
  const fs::path dir = fs::temp_directory_path() / "robustpu_acceptance_determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  nlohmann::json cfg = read_json_file(kSourceDir / "configs" / "mushroom.json");
  cfg["dataset"]["data"] = (kSourceDir / "data/mushroom/mushroom.csv").string();
  cfg["dataset"]["schema"] = (kSourceDir / "data/mushroom/mushroom.schema.json").string();
  cfg["pi_list"] = {0.2, 0.6};
  cfg["methods"] = {"pn", "upu", "nnpu", "robust-pu"};
  cfg.erase("tune");
  {
    std::ofstream out(dir / "config.json");
    out << cfg.dump(2);
  }
  std::string cmd_a = kCliPath.string() + " experiment --config " + (dir / "config.json").string() +
                      " --seed 7 --threads 1 --out " + (dir / "a").string() + " > /dev/null";
  std::string cmd_b = kCliPath.string() + " experiment --config " + (dir / "config.json").string() +
                      " --seed 7 --threads 2 --out " + (dir / "b").string() + " > /dev/null";
  const int rc_a = std::system(cmd_a.c_str());
  const int rc_b = std::system(cmd_b.c_str());
  v.require(rc_a == 0 && rc_b == 0, "both experiment runs exit 0");
  const std::string a = read_file(dir / "a" / "results.csv");
  const std::string b = read_file(dir / "b" / "results.csv");
  v.require(!a.empty() && a == b, "results.csv byte-identical (" + std::to_string(a.size()) + " bytes)");
  fs::remove_all(dir);
}

// ---------------------------------------------------------------------------
// 12: noise separation
// ---------------------------------------------------------------------------

void criterion_12(Verdict& v) {
  const ExperimentSpec spec = preset("mushroom.json");
  const RawDataset raw = load_dataset(spec.data_path, load_schema(spec.schema_path));
  TrainConfig train = spec.train_for(0.4);
  train.mapping = WeightMapping::kWelsch;
  int separated = 0;
  std::ostringstream detail;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    SplitSpec s = spec.split;
    s.pi = 0.4;
    s.seed = seed;
    const PUSplit split = make_pu_split(raw, s);
    const RunOutcome r = run_method(split, Method::kRobustPu, train, spec.baseline);
    const auto& d = *r.records.back().diagnostics;
    if (d.mean_weight_hidden_positive < d.mean_weight_hidden_negative) ++separated;
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%s%.3f/%.3f", seed ? " " : "", d.mean_weight_hidden_positive,
                  d.mean_weight_hidden_negative);
    detail << buf;
  }
  v.require(separated >= 4, std::to_string(separated) + "/5 seeds with mean weight hidden-pos < hidden-neg (" +
                                detail.str() + ")");
}

const std::map<int, std::pair<const char*, void (*)(Verdict&)>> kCriteria = {
    {1, {"mushroom pi=0.2 error rates", criterion_1}},
    {2, {"spambase pi=0.2 error rates", criterion_2}},
    {3, {"shuttle robustness gap", criterion_3}},
    {4, {"mnist pi=0.2 error rates", criterion_4}},
    {5, {"mushroom pi=0.6 ablation directions", criterion_5}},
    {6, {"gradient check", criterion_6}},
    {7, {"uPU unbiasedness", criterion_7}},
    {8, {"scheduler suite", criterion_8}},
    {9, {"weighting suite", criterion_9}},
    {10, {"split suite", criterion_10}},
    {11, {"end-to-end determinism", criterion_11}},
    {12, {"noise separation", criterion_12}},
};

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));
  if (selected.empty()) {
    for (const auto& [id, entry] : kCriteria) selected.push_back(id);
  }
  int failed = 0;
  for (int id : selected) {
    auto it = kCriteria.find(id);
    if (it == kCriteria.end()) {
      std::printf("[FAIL] %d unknown criterion\n", id);
      ++failed;
      continue;
    }
    Verdict v;
    try {
      it->second.second(v);
    } catch (const std::exception& e) {
      v.require(false, std::string("completed without error: ") + e.what());
    }
    std::printf("[%s] %d %s: %s\n", v.pass ? "PASS" : "FAIL", id, it->second.first, v.detail.str().c_str());
    std::fflush(stdout);
    if (!v.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
