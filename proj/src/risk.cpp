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


#include "robustpu/risk.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>

#include "robustpu/errors.hpp"
#include "robustpu/rng.hpp"

namespace robustpu {

std::string_view to_string(PretrainMode mode) { return mode == PretrainMode::kNnpu ? "nnpu" : "pn"; }

PretrainMode parse_pretrain_mode(std::string_view name) {
  if (name == "nnpu") return PretrainMode::kNnpu;
  if (name == "pn") return PretrainMode::kPn;
  throw ConfigError("unknown pretrain mode '" + std::string(name) + "'");
}

std::string_view to_string(NegativeBranchRule rule) {
  return rule == NegativeBranchRule::kCorrection ? "correction" : "zero-gradient";
}

NegativeBranchRule parse_negative_branch_rule(std::string_view name) {
  if (name == "correction") return NegativeBranchRule::kCorrection;
  if (name == "zero-gradient") return NegativeBranchRule::kZeroGradient;
  throw ConfigError("unknown negative-branch rule '" + std::string(name) + "'");
}

std::string_view to_string(RiskKind kind) {
  switch (kind) {
    case RiskKind::kPn: return "pn";
    case RiskKind::kUpu: return "upu";
    case RiskKind::kNnpu: return "nnpu";
  }
  return "unknown";
}

double sigmoid_loss(double logit, double target) { return sigmoid(-target * logit); }

double upu_value(const RiskParts& parts, double pi) {
  return pi * parts.positive_as_positive + parts.inner(pi);
}

double nnpu_value(const RiskParts& parts, double pi) {
  if (parts.inner(pi) >= 0.0) return upu_value(parts, pi);
  return pi * parts.positive_as_positive;
}

namespace {

void check_pi(const RiskConfig& cfg) {
  if (!(cfg.pi >= 0.0 && cfg.pi < 1.0)) throw ConfigError("risk: pi must lie in [0, 1)");
}

void check_sets(const DenseMatrix& x_p, const DenseMatrix& x_u) {
  if (x_p.rows() == 0 || x_u.rows() == 0) {
    throw ConfigError("risk: positive and unlabeled sets must be non-empty");
  }
}

RiskParts parts_from_logits(const Vector& zp, const Vector& zu) {
  RiskParts parts;
  const auto mean = [](const Vector& z, double target) {
    double s = 0.0;
    for (Index i = 0; i < z.size(); ++i) s += sigmoid_loss(z(i), target);
    return z.size() > 0 ? s / static_cast<double>(z.size()) : 0.0;
  };
  parts.positive_as_positive = mean(zp, 1.0);
  parts.positive_as_negative = mean(zp, -1.0);
  parts.unlabeled_as_negative = mean(zu, -1.0);
  return parts;
}

// d/dz sigmoid(-t z) = -t s(z)(1 - s(z)) for t in {+1, -1}.
Vector sigmoid_slope(const Vector& z) {
  return z.unaryExpr([](double v) {
    const double s = sigmoid(v);
    return s * (1.0 - s);
  });
}

// Risk of the form a * mean_P l(z,+1) + b * mean_P l(z,-1) + c * mean_U l(z,-1);
// only the gradient of that combination is formed here.
Gradients linear_risk_grad(const ModelState& model, const DenseMatrix& x_p, const ForwardResult& fp,
                           const DenseMatrix& x_u, const ForwardResult& fu, double a, double b,
                           double c) {
  const double inv_p = 1.0 / static_cast<double>(x_p.rows());
  const double inv_u = 1.0 / static_cast<double>(x_u.rows());
  const Vector dzp = sigmoid_slope(fp.logits) * ((b - a) * inv_p);
  const Vector dzu = sigmoid_slope(fu.logits) * (c * inv_u);
  Gradients g = backprop(model, x_p, fp, dzp);
  g += backprop(model, x_u, fu, dzu);
  return g;
}

}  // namespace

RiskParts risk_parts(const ModelState& model, const DenseMatrix& x_p, const DenseMatrix& x_u) {
  return parts_from_logits(logits(model, x_p), logits(model, x_u));
}

RiskResult pn_risk(const ModelState& model, const DenseMatrix& x_p, const DenseMatrix& x_u) {
  DenseMatrix batch(x_p.rows() + x_u.rows(), model.input_dim());
  if (x_p.rows() > 0) batch.topRows(x_p.rows()) = x_p;
  if (x_u.rows() > 0) batch.bottomRows(x_u.rows()) = x_u;
  BinaryLabels labels(static_cast<std::size_t>(batch.rows()), 0);
  std::fill_n(labels.begin(), x_p.rows(), std::uint8_t{1});
  LossAndGrads lg = weighted_bce_grad(model, batch, labels, Vector::Ones(batch.rows()));
  RiskResult out;
  out.loss = lg.loss;
  out.grads = std::move(lg.grads);
  return out;
}

RiskResult upu_risk(const ModelState& model, const DenseMatrix& x_p, const DenseMatrix& x_u,
                    const RiskConfig& cfg) {
  check_pi(cfg);
  check_sets(x_p, x_u);
  const ForwardResult fp = mlp_forward(model, x_p);
  const ForwardResult fu = mlp_forward(model, x_u);
  RiskResult out;
  out.parts = parts_from_logits(fp.logits, fu.logits);
  out.loss = upu_value(out.parts, cfg.pi);
  out.grads = linear_risk_grad(model, x_p, fp, x_u, fu, cfg.pi, -cfg.pi, 1.0);
  return out;
}

RiskResult nnpu_risk(const ModelState& model, const DenseMatrix& x_p, const DenseMatrix& x_u,
                     const RiskConfig& cfg) {
  check_pi(cfg);
  check_sets(x_p, x_u);
  const ForwardResult fp = mlp_forward(model, x_p);
  const ForwardResult fu = mlp_forward(model, x_u);
  RiskResult out;
  out.parts = parts_from_logits(fp.logits, fu.logits);
  out.loss = nnpu_value(out.parts, cfg.pi);
  out.clamped = out.parts.inner(cfg.pi) < 0.0;
  if (!out.clamped) {
    out.grads = linear_risk_grad(model, x_p, fp, x_u, fu, cfg.pi, -cfg.pi, 1.0);
  } else if (cfg.negative_branch == NegativeBranchRule::kCorrection) {
    out.grads = linear_risk_grad(model, x_p, fp, x_u, fu, 0.0, cfg.pi, -1.0);
  } else {
    out.grads = linear_risk_grad(model, x_p, fp, x_u, fu, cfg.pi, 0.0, 0.0);
  }
  return out;
}

RiskResult evaluate_risk(RiskKind kind, const ModelState& model, const DenseMatrix& x_p,
                         const DenseMatrix& x_u, const RiskConfig& cfg) {
  switch (kind) {
    case RiskKind::kPn: return pn_risk(model, x_p, x_u);
    case RiskKind::kUpu: return upu_risk(model, x_p, x_u, cfg);
    case RiskKind::kNnpu: return nnpu_risk(model, x_p, x_u, cfg);
  }
  throw ConfigError("unknown risk kind");
}

ModelState train_risk(ModelState model, const DenseMatrix& x_p, const DenseMatrix& x_u,
                      RiskKind kind, const PretrainSettings& settings, const EpochCallback& on_epoch) {
  if (settings.epochs < 0) throw ConfigError("pretrain: epochs must be >= 0");
  if (settings.batch_size < 1) throw ConfigError("pretrain: batch_size must be >= 1");
  if (settings.epochs == 0) return model;
  const Index n_p = x_p.rows();
  const Index n_u = x_u.rows();
  if (kind != RiskKind::kPn) check_sets(x_p, x_u);
  if (n_p + n_u == 0) throw ConfigError("pretrain: no training samples");

  Index n_batches = (n_p + n_u + settings.batch_size - 1) / settings.batch_size;
  if (n_p > 0) n_batches = std::min(n_batches, n_p);
  if (n_u > 0) n_batches = std::min(n_batches, n_u);
  n_batches = std::max<Index>(n_batches, 1);

  std::vector<Index> perm_p(static_cast<std::size_t>(n_p));
  std::vector<Index> perm_u(static_cast<std::size_t>(n_u));
  for (int epoch = 0; epoch < settings.epochs; ++epoch) {
    std::iota(perm_p.begin(), perm_p.end(), Index{0});
    std::iota(perm_u.begin(), perm_u.end(), Index{0});
    Rng rng(derive_seed(settings.seed, {0x7072657472ULL, static_cast<std::uint64_t>(epoch)}));
    rng.shuffle(std::span<Index>(perm_p));
    rng.shuffle(std::span<Index>(perm_u));
    for (Index b = 0; b < n_batches; ++b) {
      const Index p0 = b * n_p / n_batches, p1 = (b + 1) * n_p / n_batches;
      const Index u0 = b * n_u / n_batches, u1 = (b + 1) * n_u / n_batches;
      const DenseMatrix bp =
          gather_rows(x_p, std::span<const Index>(perm_p).subspan(p0, p1 - p0));
      const DenseMatrix bu =
          gather_rows(x_u, std::span<const Index>(perm_u).subspan(u0, u1 - u0));
      const RiskResult r = evaluate_risk(kind, model, bp, bu, settings.risk);
      if (!std::isfinite(r.loss)) {
        std::ostringstream os;
        os << "non-finite " << to_string(kind) << " risk at epoch " << epoch << ", batch " << b;
        throw NumericError(os.str());
      }
      adam_step(model, r.grads, settings.adam);
    }
    if (on_epoch) on_epoch(epoch, model);
  }
  return model;
}

ModelState pretrain(ModelState model, const DenseMatrix& x_p, const DenseMatrix& x_u,
                    const PretrainSettings& settings, const EpochCallback& on_epoch) {
  const RiskKind kind = settings.mode == PretrainMode::kNnpu ? RiskKind::kNnpu : RiskKind::kPn;
  return train_risk(std::move(model), x_p, x_u, kind, settings, on_epoch);
}

}  // namespace robustpu
