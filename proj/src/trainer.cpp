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


#include "robustpu/trainer.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "robustpu/config_io.hpp"
#include "robustpu/errors.hpp"
#include "robustpu/rng.hpp"

namespace robustpu {

using nlohmann::json;

void TrainConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError("train config: " + msg); };
  if (iterations_max < 0) fail("iterations_max must be >= 0");
  if (epochs_per_iter < 1) fail("epochs_per_iter must be >= 1");
  if (warmup_epochs < 0 || warmup_epochs > epochs_per_iter) {
    fail("warmup_epochs must lie in [0, epochs_per_iter]");
  }
  if (batch_size < 1) fail("batch_size must be >= 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) fail("learning_rate must be > 0");
  if (!(weight_decay >= 0.0) || !std::isfinite(weight_decay)) fail("weight_decay must be >= 0");
  if (!(tau > 0.0) || !std::isfinite(tau)) fail("tau must be > 0");
  robustpu::validate(schedule_p);
  robustpu::validate(schedule_u);
  for (const auto* s : {&schedule_p, &schedule_u}) {
    if (!(s->lambda0 > 0.0)) fail("schedule lambda0 must be > 0 for weighting");
  }
  if (pretrain_epochs < 0) fail("pretrain_epochs must be >= 0");
  if (!(pi_for_pretrain >= 0.0 && pi_for_pretrain < 1.0)) fail("pi_for_pretrain must lie in [0, 1)");
  if (patience < 1) fail("patience must be >= 1");
  if (hidden < 1) fail("hidden must be >= 1");
}

WeightSource warmup_policy(int /*iteration*/, int epoch, const TrainConfig& cfg) {
  return epoch < cfg.warmup_epochs ? WeightSource::kPrevious : WeightSource::kCurrent;
}

std::uint64_t epoch_shuffle_seed(std::uint64_t seed, int iteration, int epoch) {
  return derive_seed(seed, {0x69746572ULL, static_cast<std::uint64_t>(iteration),
                            static_cast<std::uint64_t>(epoch)});
}

double weighted_epoch(ModelState& model, const DenseMatrix& x_p, const DenseMatrix& x_u,
                      const Vector& v_p, const Vector& v_u, Index batch_size,
                      const AdamSettings& adam, std::uint64_t shuffle_seed) {
  const Index n_p = x_p.rows();
  const Index n_u = x_u.rows();
  if (v_p.size() != n_p || v_u.size() != n_u) {
    throw ConfigError("weighted_epoch: weights are not aligned with samples");
  }
  if (batch_size < 1) throw ConfigError("weighted_epoch: batch_size must be >= 1");
  const Index n = n_p + n_u;
  if (n == 0) throw UsageError("weighted_epoch: no samples");

  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  Rng rng(shuffle_seed);
  rng.shuffle(std::span<Index>(order));

  double loss_sum = 0.0;
  DenseMatrix batch;
  BinaryLabels labels;
  Vector weights;
  for (Index start = 0; start < n; start += batch_size) {
    const Index b = std::min(batch_size, n - start);
    batch.resize(b, model.input_dim());
    labels.assign(static_cast<std::size_t>(b), 0);
    weights.resize(b);
    for (Index k = 0; k < b; ++k) {
      const Index i = order[static_cast<std::size_t>(start + k)];
      if (i < n_p) {
        batch.row(k) = x_p.row(i);
        labels[static_cast<std::size_t>(k)] = 1;
        weights(k) = v_p(i);
      } else {
        batch.row(k) = x_u.row(i - n_p);
        weights(k) = v_u(i - n_p);
      }
    }
    if (weights.sum() == 0.0) continue;
    const LossAndGrads lg = weighted_bce_grad(model, batch, labels, weights);
    if (!std::isfinite(lg.loss)) throw NumericError("non-finite weighted loss");
    adam_step(model, lg.grads, adam);
    loss_sum += lg.loss * static_cast<double>(b);
  }
  return loss_sum / static_cast<double>(n);
}

TrainResult robust_pu_train(const TrainingView& view, const TrainConfig& cfg,
                            const TrainHooks& hooks) {
  cfg.validate();
  if (view.x_p.rows() == 0 || view.x_u.rows() == 0) {
    throw ConfigError("robust_pu_train: positive and unlabeled sets must be non-empty");
  }
  if (view.x_u.cols() != view.x_p.cols() || view.val_features.cols() != view.x_p.cols()) {
    throw ConfigError("robust_pu_train: feature dimensions differ between sets");
  }
  if (view.val_features.rows() == 0) throw ConfigError("robust_pu_train: empty validation set");
  const Schedule schedule_p(cfg.schedule_p);
  const Schedule schedule_u(cfg.schedule_u);

  ModelState model = init_model(view.input_dim(), cfg.hidden, derive_seed(cfg.seed, {0x696e6974ULL}));
  PretrainSettings pre;
  pre.epochs = cfg.pretrain_epochs;
  pre.batch_size = cfg.batch_size;
  pre.adam = cfg.adam();
  pre.mode = cfg.pretrain_mode;
  pre.risk = RiskConfig{cfg.pi_for_pretrain, cfg.negative_branch};
  pre.seed = derive_seed(cfg.seed, {0x70726574ULL});
  model = pretrain(std::move(model), view.x_p, view.x_u, pre);
  if (hooks.on_pretrained) hooks.on_pretrained(model);

  TrainResult result;
  result.model = model;
  Vector prev_p = Vector::Ones(view.x_p.rows());
  Vector prev_u = Vector::Ones(view.x_u.rows());
  int since_best = 0;
  bool have_best = false;

  for (int t = 0; t < cfg.iterations_max; ++t) {
    const HardnessVector hp =
        measure_hardness(model, view.x_p, SampleGroup::kPositive, cfg.metric, cfg.tau);
    const HardnessVector hu =
        measure_hardness(model, view.x_u, SampleGroup::kUnlabeled, cfg.metric, cfg.tau);
    IterationRecord rec;
    rec.iteration = t + 1;
    rec.lambda_p = schedule_p.at(t);
    rec.lambda_u = schedule_u.at(t);
    const WeightVector wp = map_weights(hp, rec.lambda_p, cfg.mapping);
    const WeightVector wu = map_weights(hu, rec.lambda_u, cfg.mapping);
    if (wp.values.sum() + wu.values.sum() == 0.0) {
      std::ostringstream os;
      os << "schedule too strict: every sample weight is 0 at iteration " << t + 1
         << " (lambda_p=" << rec.lambda_p << ", lambda_u=" << rec.lambda_u << ")";
      throw NumericError(os.str());
    }
    rec.mean_weight_p = wp.values.mean();
    rec.mean_weight_u = wu.values.mean();

    for (int e = 0; e < cfg.epochs_per_iter; ++e) {
      const bool previous = warmup_policy(t, e, cfg) == WeightSource::kPrevious;
      try {
        rec.train_loss = weighted_epoch(model, view.x_p, view.x_u, previous ? prev_p : wp.values,
                                        previous ? prev_u : wu.values, cfg.batch_size, cfg.adam(),
                                        epoch_shuffle_seed(cfg.seed, t, e));
      } catch (const NumericError& err) {
        std::ostringstream os;
        os << err.what() << " (iteration " << t + 1 << ", epoch " << e + 1 << ")";
        throw NumericError(os.str());
      }
    }
    prev_p = wp.values;
    prev_u = wu.values;

    rec.val_error = error_rate(model, view.val_features, view.val_labels);
    if (hooks.on_iteration) {
      hooks.on_iteration(IterationState{t + 1, model, hp, hu, wp, wu}, rec);
    }
    result.records.push_back(rec);

    if (!have_best || rec.val_error < result.best_val_error) {
      have_best = true;
      result.model = model;
      result.best_iteration = t + 1;
      result.best_val_error = rec.val_error;
      since_best = 0;
    } else if (++since_best >= cfg.patience) {
      break;
    }
  }
  if (!have_best) result.best_val_error = error_rate(model, view.val_features, view.val_labels);
  return result;
}

// ---------------------------------------------------------------------------
// Checkpoints and logs
// ---------------------------------------------------------------------------

namespace {

json vector_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Vector vector_from(const json& j, Index expected, const char* what) {
  const auto values = j.get<std::vector<double>>();
  if (static_cast<Index>(values.size()) != expected) {
    throw IntegrityError(std::string("checkpoint: wrong length for ") + what);
  }
  return Eigen::Map<const Vector>(values.data(), expected);
}

json params_json(const MlpParams& p) {
  return json{{"w1", std::vector<double>(p.w1.data(), p.w1.data() + p.w1.size())},
              {"b1", vector_json(p.b1)},
              {"w2", vector_json(p.w2)},
              {"b2", p.b2}};
}

MlpParams params_from(const json& j, Index d, Index h) {
  MlpParams p = MlpParams::zeros(d, h);
  const auto w1 = j.at("w1").get<std::vector<double>>();
  if (static_cast<Index>(w1.size()) != d * h) throw IntegrityError("checkpoint: wrong length for w1");
  p.w1 = Eigen::Map<const DenseMatrix>(w1.data(), d, h);
  p.b1 = vector_from(j.at("b1"), h, "b1");
  p.w2 = vector_from(j.at("w2"), h, "w2");
  p.b2 = j.at("b2").get<double>();
  return p;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const ModelState& model,
                     const TrainConfig& cfg) {
  json j;
  j["format"] = "robustpu-checkpoint";
  j["version"] = 1;
  j["seed"] = cfg.seed;
  j["config"] = cfg;
  j["model"] = {{"input_dim", model.input_dim()},
                {"hidden", model.hidden()},
                {"step", model.step},
                {"params", params_json(model.params)},
                {"adam_m", params_json(model.adam_m)},
                {"adam_v", params_json(model.adam_v)}};
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write checkpoint " + path.string());
  out << j.dump() << "\n";
  if (!out) throw UsageError("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IntegrityError("cannot open checkpoint " + path.string());
  Checkpoint ck;
  try {
    const json j = json::parse(in);
    if (j.at("format").get<std::string>() != "robustpu-checkpoint" || j.at("version").get<int>() != 1) {
      throw IntegrityError("checkpoint: unsupported format or version");
    }
    ck.config = j.at("config").get<TrainConfig>();
    const json& m = j.at("model");
    const Index d = m.at("input_dim").get<Index>();
    const Index h = m.at("hidden").get<Index>();
    if (d < 1 || h < 1) throw IntegrityError("checkpoint: invalid model shape");
    ck.model.params = params_from(m.at("params"), d, h);
    ck.model.adam_m = params_from(m.at("adam_m"), d, h);
    ck.model.adam_v = params_from(m.at("adam_v"), d, h);
    ck.model.step = m.at("step").get<std::int64_t>();
  } catch (const json::exception& e) {
    throw IntegrityError("checkpoint " + path.string() + ": " + e.what());
  }
  if (!ck.model.params.all_finite() || !ck.model.adam_m.all_finite() ||
      !ck.model.adam_v.all_finite() || ck.model.step < 0) {
    throw IntegrityError("checkpoint " + path.string() + ": non-finite or invalid values");
  }
  return ck;
}

std::string iteration_record_json(const IterationRecord& r) {
  json j{{"iteration", r.iteration},         {"lambda_p", r.lambda_p},
         {"lambda_u", r.lambda_u},           {"mean_weight_p", r.mean_weight_p},
         {"mean_weight_u", r.mean_weight_u}, {"train_loss", r.train_loss},
         {"val_error", r.val_error}};
  if (r.diagnostics) {
    const auto& d = *r.diagnostics;
    j["group_losses"] = {{"labeled_positive", d.group_losses.labeled_positive},
                         {"hidden_positive", d.group_losses.hidden_positive},
                         {"hidden_negative", d.group_losses.hidden_negative}};
    j["mean_weight_hidden_positive"] = d.mean_weight_hidden_positive;
    j["mean_weight_hidden_negative"] = d.mean_weight_hidden_negative;
  }
  return j.dump();
}

void append_iteration_log(const std::filesystem::path& path,
                          const std::vector<IterationRecord>& records) {
  std::ofstream out(path, std::ios::app);
  if (!out) throw UsageError("cannot open iteration log " + path.string());
  for (const auto& r : records) out << iteration_record_json(r) << "\n";
}

}  // namespace robustpu
