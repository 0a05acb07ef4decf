#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pml/dataset.hpp"
#include "pml/errors.hpp"
#include "pml/grid.hpp"

namespace pml {

struct LossConfig {
  double beta_floor = 0.05;        // lower clamp on the negative-part weight
  int epoch_offset = 3;            // shifts the ramp exponent forward
  int total_epochs = 1;
  double subsample_fraction = 1.0;  // fraction of missing entries in the loss
  double clamp_epsilon = 1e-7;      // log-argument clamp
  bool normalized_ramp = false;     // ramp hits 1 instead of e at the crossover epoch
  double wan_negative_weight = 0.0;  // weighted-assume-negative; 0 = 1/(L-1)

  void validate() const {
    if (!(beta_floor > 0.0) || !(beta_floor < 1.0))
      throw ValidationError("LossConfig.beta_floor: must be in (0, 1)");
    if (epoch_offset < 0) throw ValidationError("LossConfig.epoch_offset: must be >= 0");
    if (total_epochs < 1) throw ValidationError("LossConfig.total_epochs: must be positive");
    if (epoch_offset >= total_epochs)
      throw ValidationError("LossConfig.epoch_offset: must be < total_epochs");
    if (!(subsample_fraction > 0.0) || subsample_fraction > 1.0)
      throw ValidationError("LossConfig.subsample_fraction: must be in (0, 1]");
    if (!(clamp_epsilon > 0.0) || !(clamp_epsilon < 0.5))
      throw ValidationError("LossConfig.clamp_epsilon: must be in (0, 0.5)");
    if (wan_negative_weight != 0.0 && (!(wan_negative_weight > 0.0) || wan_negative_weight > 1.0))
      throw ValidationError("LossConfig.wan_negative_weight: must be in (0, 1] or 0 for the default");
  }
};

enum class LossKind { Proposed, AssumeNegative, WeightedAssumeNegative, BceFull };

inline const char* to_string(LossKind k) {
  switch (k) {
    case LossKind::Proposed: return "proposed";
    case LossKind::AssumeNegative: return "an";
    case LossKind::WeightedAssumeNegative: return "wan";
    case LossKind::BceFull: return "bce_full";
  }
  return "?";
}

/// One mini-batch as the loss sees it. `pseudo` is aligned B x L and only
/// read at Missing positions; `picked` selects the missing entries that
/// participate this epoch. Baselines need only predictions and observed.
struct BatchView {
  const Matrix* predictions = nullptr;      // B x L, sigmoid outputs in (0,1)
  const LabelMatrix* observed = nullptr;    // B x L
  const Matrix* pseudo = nullptr;           // B x L
  const Grid<std::uint8_t>* picked = nullptr;  // B x L, nonzero => in the subsample
  int epoch_index = 0;
};

struct LossOutput {
  double value = 0.0;
  Matrix grad;  // B x L, d(value)/d(logit)
  double alpha = 0.5;
  double beta = 0.5;
  double d = 1.0;
  std::vector<double> p_per_row;  // 1 or 2 per instance
};

namespace detail {

inline double clamp_prob(double p, double eps) { return std::clamp(p, eps, 1.0 - eps); }

inline void require_finite(std::span<const double> values, const char* what) {
  for (double v : values)
    if (!std::isfinite(v)) throw NumericError(std::string(what) + ": non-finite value");
}

}  // namespace detail

/// Mean binary cross entropy of one prediction vector against (possibly soft)
/// targets, with its gradient taken w.r.t. the logits behind the predictions:
/// d/ds_j = (prediction_j - target_j) / L.
inline LossOutput bce(std::span<const double> predictions, std::span<const double> targets,
                      double clamp_epsilon = 1e-7) {
  if (predictions.size() != targets.size())
    throw StructuralError("bce: prediction and target lengths differ");
  if (predictions.empty()) throw StructuralError("bce: empty input");
  detail::require_finite(predictions, "bce predictions");
  detail::require_finite(targets, "bce targets");
  for (double t : targets)
    if (t < 0.0 || t > 1.0) throw NumericError("bce targets: value outside [0,1]");

  const std::size_t l = predictions.size();
  LossOutput out;
  out.grad = Matrix(1, l);
  double sum = 0.0;
  for (std::size_t j = 0; j < l; ++j) {
    const double y = detail::clamp_prob(predictions[j], clamp_epsilon);
    const double t = targets[j];
    sum += -(t * std::log(y) + (1.0 - t) * std::log(1.0 - y));
    out.grad(0, j) = (y - t) / static_cast<double>(l);
  }
  out.value = sum / static_cast<double>(l);
  out.p_per_row.assign(1, 1.0);
  return out;
}

/// Penalty-coefficient pair from batch label statistics: beta is the observed
/// positive fraction of all label slots, clamped from below, and alpha is its
/// complement. Positives being scarce makes alpha large.
inline std::pair<double, double> compute_beta(const LabelMatrix& batch_observed, double beta_floor) {
  if (batch_observed.size() == 0) throw StructuralError("compute_beta: empty batch");
  std::size_t positives = 0;
  for (Label v : batch_observed.flat())
    if (v == Label::Pos) ++positives;
  const double beta =
      std::max(static_cast<double>(positives) / static_cast<double>(batch_observed.size()), beta_floor);
  return {1.0 - beta, beta};
}

/// Epoch-indexed weight on the missing-label part of the loss,
/// exp((epoch_index + epoch_offset) / total_epochs): strictly increasing, so
/// emphasis shifts from observed labels toward pseudo-labeled ones as
/// training progresses. The normalized variant shifts the exponent down by 1
/// so the weight crosses 1 (instead of e) at epoch total_epochs - epoch_offset.
inline double dynamic_coefficient(int epoch_index, const LossConfig& config) {
  if (epoch_index < 0 || epoch_index >= config.total_epochs)
    throw ValidationError("dynamic_coefficient: epoch_index outside [0, total_epochs)");
  double exponent = static_cast<double>(epoch_index + config.epoch_offset) /
                    static_cast<double>(config.total_epochs);
  if (config.normalized_ramp) exponent -= 1.0;
  return std::exp(exponent);
}

/// Per-instance factor that doubles the loss when no class prediction
/// exceeds 0.1, pushing the model away from all-negative outputs. The 0.1
/// boundary itself counts as "no prediction exceeds" and yields 2.
inline double all_negative_penalty(std::span<const double> predictions_row) {
  double mass = 0.0;
  for (double y : predictions_row) mass += std::max(y - 0.1, 0.0);
  return mass > 0.0 ? 1.0 : 2.0;
}

/// The full training loss over a batch:
///
///   loss_i = p_i * [ alpha * ( (1/N_e) sum_{observed pos} -log y
///                            + (d/(q N_ne)) sum_{picked} -t~ log y )
///                  + beta  * ( (1/N_e) sum_{observed neg} -log(1-y)
///                            + (d/(q N_ne)) sum_{picked} -(1-t~) log(1-y) ) ]
///
/// averaged over the batch, with t~ the pseudo-label constants. N_e and N_ne
/// are the per-row observed and missing counts; rows with N_e == 0 simply
/// drop the observed terms, and unpicked missing entries contribute no loss
/// and no gradient. Gradients are exact w.r.t. the logits.
inline LossOutput final_loss(const BatchView& batch, const LossConfig& config) {
  config.validate();
  if (!batch.predictions || !batch.observed || !batch.pseudo || !batch.picked)
    throw StructuralError("final_loss: batch is missing predictions/observed/pseudo/picked");
  const Matrix& preds = *batch.predictions;
  const LabelMatrix& observed = *batch.observed;
  const Matrix& pseudo = *batch.pseudo;
  const Grid<std::uint8_t>& picked = *batch.picked;
  if (!preds.same_shape(pseudo) || preds.rows() != observed.rows() || preds.cols() != observed.cols() ||
      preds.rows() != picked.rows() || preds.cols() != picked.cols())
    throw StructuralError("final_loss: batch matrices disagree on shape");
  if (preds.rows() == 0) throw StructuralError("final_loss: empty batch");
  detail::require_finite(preds.flat(), "final_loss predictions");
  for (std::size_t i = 0; i < preds.rows(); ++i)
    for (std::size_t j = 0; j < preds.cols(); ++j)
      if (picked(i, j) && observed(i, j) != Label::Missing)
        throw StructuralError("final_loss: picked entry (" + std::to_string(i) + "," +
                              std::to_string(j) + ") is not missing");

  const std::size_t b = preds.rows();
  const std::size_t l = preds.cols();
  const double eps = config.clamp_epsilon;
  const auto [alpha, beta] = compute_beta(observed, config.beta_floor);
  const double ramp = dynamic_coefficient(batch.epoch_index, config);
  const double q = config.subsample_fraction;

  LossOutput out;
  out.alpha = alpha;
  out.beta = beta;
  out.d = ramp;
  out.grad = Matrix(b, l, 0.0);
  out.p_per_row.resize(b);

  const double inv_b = 1.0 / static_cast<double>(b);
  double total = 0.0;
  for (std::size_t i = 0; i < b; ++i) {
    const auto obs_row = observed.row(i);
    const std::size_t n_exist = count_observed(obs_row);
    const std::size_t n_missing = l - n_exist;
    const double exist_w = n_exist > 0 ? 1.0 / static_cast<double>(n_exist) : 0.0;
    const double missing_w = n_missing > 0 ? ramp / (q * static_cast<double>(n_missing)) : 0.0;
    const double p = all_negative_penalty(preds.row(i));
    out.p_per_row[i] = p;

    double pos_part = 0.0;
    double neg_part = 0.0;
    for (std::size_t j = 0; j < l; ++j) {
      const double y = detail::clamp_prob(preds(i, j), eps);
      switch (obs_row[j]) {
        case Label::Pos:
          pos_part += exist_w * -std::log(y);
          out.grad(i, j) = p * alpha * exist_w * (y - 1.0) * inv_b;
          break;
        case Label::Neg:
          neg_part += exist_w * -std::log(1.0 - y);
          out.grad(i, j) = p * beta * exist_w * y * inv_b;
          break;
        case Label::Missing:
          if (picked(i, j)) {
            const double target = pseudo(i, j);
            if (!(target >= 0.0 && target <= 1.0))
              throw NumericError("final_loss: pseudo-label outside [0,1] at row " + std::to_string(i));
            pos_part += missing_w * -target * std::log(y);
            neg_part += missing_w * -(1.0 - target) * std::log(1.0 - y);
            out.grad(i, j) =
                p * missing_w * (alpha * target * (y - 1.0) + beta * (1.0 - target) * y) * inv_b;
          }
          break;
      }
    }
    total += p * (alpha * pos_part + beta * neg_part);
  }
  out.value = total * inv_b;
  if (!std::isfinite(out.value)) throw NumericError("final_loss: non-finite loss value");
  return out;
}

/// Reference baselines. AssumeNegative scores every missing entry as a
/// negative target; WeightedAssumeNegative additionally scales all
/// negative-target terms by wan_negative_weight (default 1/(L-1)); BceFull is
/// plain mean BCE and demands a fully observed batch.
inline LossOutput baseline_loss(LossKind kind, const BatchView& batch, double wan_negative_weight = 0.0,
                                double clamp_epsilon = 1e-7) {
  if (kind == LossKind::Proposed)
    throw ConfigError("baseline_loss: use final_loss for the proposed objective");
  if (!batch.predictions || !batch.observed)
    throw StructuralError("baseline_loss: batch is missing predictions/observed");
  const Matrix& preds = *batch.predictions;
  const LabelMatrix& observed = *batch.observed;
  if (preds.rows() != observed.rows() || preds.cols() != observed.cols())
    throw StructuralError("baseline_loss: batch matrices disagree on shape");
  if (preds.rows() == 0 || preds.cols() < 2) throw StructuralError("baseline_loss: batch must be B x L, L >= 2");
  detail::require_finite(preds.flat(), "baseline_loss predictions");

  const std::size_t b = preds.rows();
  const std::size_t l = preds.cols();
  double neg_weight = 1.0;
  if (kind == LossKind::WeightedAssumeNegative) {
    neg_weight = wan_negative_weight > 0.0 ? wan_negative_weight : 1.0 / static_cast<double>(l - 1);
    if (neg_weight > 1.0)
      throw ValidationError("baseline_loss.wan_negative_weight: must be in (0, 1]");
  }

  LossOutput out;
  out.grad = Matrix(b, l, 0.0);
  out.p_per_row.assign(b, 1.0);
  const double scale = 1.0 / static_cast<double>(b * l);
  double total = 0.0;
  for (std::size_t i = 0; i < b; ++i)
    for (std::size_t j = 0; j < l; ++j) {
      const Label z = observed(i, j);
      if (kind == LossKind::BceFull && z == Label::Missing)
        throw ConfigError("baseline_loss: bce_full requires fully observed labels");
      const double y = detail::clamp_prob(preds(i, j), clamp_epsilon);
      if (z == Label::Pos) {
        total += -std::log(y);
        out.grad(i, j) = (y - 1.0) * scale;
      } else {  // true negative or assumed negative
        total += neg_weight * -std::log(1.0 - y);
        out.grad(i, j) = neg_weight * y * scale;
      }
    }
  out.value = total * scale;
  if (!std::isfinite(out.value)) throw NumericError("baseline_loss: non-finite loss value");
  return out;
}

}  // namespace pml
