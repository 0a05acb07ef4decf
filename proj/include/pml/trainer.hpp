#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "pml/dataset.hpp"
#include "pml/errors.hpp"
#include "pml/grid.hpp"
#include "pml/loss.hpp"
#include "pml/metrics.hpp"
#include "pml/model.hpp"
#include "pml/pseudo.hpp"
#include "pml/random.hpp"

namespace pml {

struct TrainConfig {
  int epochs = 10;
  std::size_t batch_size = 32;
  double base_lr = 0.1;
  double lr_decay = 0.95;  // geometric per-epoch factor
  double momentum = 0.9;
  LossConfig loss;
  LossKind loss_kind = LossKind::Proposed;
  std::uint64_t seed = 0;

  void validate() const {
    if (epochs < 1) throw ValidationError("TrainConfig.epochs: must be >= 1");
    if (batch_size < 1) throw ValidationError("TrainConfig.batch_size: must be >= 1");
    if (!(base_lr > 0.0) || !std::isfinite(base_lr))
      throw ValidationError("TrainConfig.base_lr: must be finite and > 0");
    if (!(lr_decay > 0.0) || lr_decay > 1.0)
      throw ValidationError("TrainConfig.lr_decay: must be in (0, 1]");
    if (!(momentum >= 0.0) || momentum >= 1.0)
      throw ValidationError("TrainConfig.momentum: must be in [0, 1)");
    LossConfig synced = loss;
    synced.total_epochs = epochs;
    synced.validate();
  }
};

struct EpochReport {
  int epoch = 0;
  double mean_loss = 0.0;
  double map = 0.0;  // on the held-out fully labeled split
  double alpha_mean = 0.0;
  double beta_mean = 0.0;
  double d = 1.0;
  double lr = 0.0;
  double wall_clock_sec = 0.0;
};

struct TrainResult {
  ModelParams params;
  std::vector<EpochReport> reports;
  PseudoLabelStore pseudo;  // empty for baseline losses and fully observed data
};

/// Per-epoch subsample of the missing entries: each row gets exactly
/// round(q * missing_count) of its missing entries picked uniformly at
/// random. Resampled every epoch from a seed derived off the run seed.
inline Grid<std::uint8_t> sample_picked_mask(const LabelMatrix& labels, double subsample_fraction,
                                             std::uint64_t epoch_seed) {
  if (!(subsample_fraction > 0.0) || subsample_fraction > 1.0)
    throw ValidationError("sample_picked_mask.subsample_fraction: must be in (0, 1]");
  Grid<std::uint8_t> picked(labels.rows(), labels.cols(), 0);
  Rng rng(epoch_seed);
  std::vector<std::size_t> missing;
  for (std::size_t i = 0; i < labels.rows(); ++i) {
    missing.clear();
    for (std::size_t j = 0; j < labels.cols(); ++j)
      if (labels(i, j) == Label::Missing) missing.push_back(j);
    const auto count = static_cast<std::size_t>(
        std::llround(subsample_fraction * static_cast<double>(missing.size())));
    for (std::size_t idx : rng.sample_without_replacement(missing.size(), count))
      picked(i, missing[idx]) = 1;
  }
  return picked;
}

/// Runs the dynamic training scheme: every epoch resamples the picked mask,
/// walks shuffled mini-batches (batch-level alpha/beta, epoch-level ramp,
/// per-row all-negative penalty), refreshes pseudo-labels from a full
/// forward pass, decays the learning rate geometrically, and records
/// validation mAP against the fully labeled eval split. Baseline losses (AN,
/// WAN, full BCE) bypass the pseudo-label and subsampling machinery
/// entirely. Deterministic for a fixed config seed.
inline TrainResult train(const Matrix& train_features, const LabelMatrix& train_labels,
                         const Dataset& eval_set, const TrainConfig& config,
                         const ModelConfig& model_config) {
  config.validate();
  if (train_features.rows() != train_labels.rows())
    throw StructuralError("train: features and labels disagree on instance count");
  if (train_labels.cols() != eval_set.classes())
    throw StructuralError("train: train and eval label spaces differ");
  if (config.loss_kind == LossKind::BceFull && has_missing(train_labels))
    throw ConfigError("train: bce_full requires fully observed training labels");

  const std::size_t n = train_features.rows();
  const std::size_t l = train_labels.cols();
  const std::size_t m = train_features.cols();

  ModelConfig mc = model_config;
  mc.input_dim = m;
  mc.output_dim = l;
  mc.init_seed = derive_seed(config.seed, SeedStream::ModelInit);
  mc.validate();
  ModelParams params = ModelParams::random_init(mc);
  SgdState opt_state;

  LossConfig loss_cfg = config.loss;
  loss_cfg.total_epochs = config.epochs;

  const bool proposed = config.loss_kind == LossKind::Proposed;
  TrainResult result;
  if (proposed && has_missing(train_labels)) result.pseudo = PseudoLabelStore(train_labels);

  const std::uint64_t shuffle_base = derive_seed(config.seed, SeedStream::Shuffle);
  const std::uint64_t pick_base = derive_seed(config.seed, SeedStream::Pick);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  double lr = config.base_lr;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    Grid<std::uint8_t> picked;
    if (proposed)
      picked = sample_picked_mask(train_labels, loss_cfg.subsample_fraction,
                                  derive_seed(pick_base, static_cast<std::uint64_t>(epoch)));

    std::iota(order.begin(), order.end(), 0);
    Rng shuffle_rng(derive_seed(shuffle_base, static_cast<std::uint64_t>(epoch)));
    shuffle_rng.shuffle(order);

    double loss_sum = 0.0;
    double alpha_sum = 0.0;
    double beta_sum = 0.0;
    double ramp = 1.0;
    std::size_t batches = 0;

    for (std::size_t start = 0; start < n; start += config.batch_size) {
      const std::size_t b = std::min(config.batch_size, n - start);
      Matrix bf(b, m);
      LabelMatrix bobs(b, l);
      Matrix bpseudo(b, l, 0.0);
      Grid<std::uint8_t> bpicked(b, l, 0);
      for (std::size_t r = 0; r < b; ++r) {
        const std::size_t src = order[start + r];
        for (std::size_t f = 0; f < m; ++f) bf(r, f) = train_features(src, f);
        for (std::size_t j = 0; j < l; ++j) {
          bobs(r, j) = train_labels(src, j);
          if (proposed) {
            bpicked(r, j) = picked(src, j);
            if (bobs(r, j) == Label::Missing) bpseudo(r, j) = result.pseudo.at(src, j);
          }
        }
      }

      const Forward fwd = forward(params, bf);
      LossOutput loss_out;
      try {
        if (proposed) {
          const BatchView view{&fwd.predictions, &bobs, &bpseudo, &bpicked, epoch};
          loss_out = final_loss(view, loss_cfg);
        } else {
          const BatchView view{&fwd.predictions, &bobs, nullptr, nullptr, epoch};
          loss_out = baseline_loss(config.loss_kind, view, loss_cfg.wan_negative_weight,
                                   loss_cfg.clamp_epsilon);
        }
      } catch (const NumericError& e) {
        throw NumericError("train: epoch " + std::to_string(epoch) + ", batch " +
                           std::to_string(batches) + ": " + e.what());
      }

      const ParamGrads grads = backward(params, bf, fwd, loss_out.grad);
      sgd_step(params, grads, lr, config.momentum, opt_state);

      loss_sum += loss_out.value * static_cast<double>(b);
      alpha_sum += loss_out.alpha;
      beta_sum += loss_out.beta;
      ramp = loss_out.d;
      ++batches;
    }

    if (!result.pseudo.empty()) {
      const Forward full = forward(params, train_features);
      result.pseudo.update(full.predictions);
    }

    const Forward eval_fwd = forward(params, eval_set.features);
    const double map = evaluate(eval_fwd.predictions, eval_set.labels).mean_ap;

    EpochReport report;
    report.epoch = epoch;
    report.mean_loss = loss_sum / static_cast<double>(n);
    report.map = map;
    report.alpha_mean = alpha_sum / static_cast<double>(batches);
    report.beta_mean = beta_sum / static_cast<double>(batches);
    report.d = ramp;
    report.lr = lr;
    report.wall_clock_sec =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    result.reports.push_back(report);

    lr *= config.lr_decay;
  }

  result.params = std::move(params);
  return result;
}

}  // namespace pml
