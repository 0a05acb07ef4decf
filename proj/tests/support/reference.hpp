#pragma once

// Independent, deliberately naive reference evaluators used as oracles.
// These transcribe the loss and metric definitions term by term and share no
// code with the library implementations they check.

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "pml/dataset.hpp"
#include "pml/grid.hpp"

namespace ref {

// Mean binary cross entropy of one instance.
inline double bce_value(std::span<const double> preds, std::span<const double> targets) {
  double sum = 0.0;
  for (std::size_t j = 0; j < preds.size(); ++j)
    sum += -(targets[j] * std::log(preds[j]) + (1.0 - targets[j]) * std::log(1.0 - preds[j]));
  return sum / static_cast<double>(preds.size());
}

// Batch positive fraction, clamped from below.
inline std::pair<double, double> weights_from_batch(const pml::LabelMatrix& observed, double floor) {
  std::size_t pos = 0;
  for (pml::Label v : observed.flat())
    if (v == pml::Label::Pos) ++pos;
  const double beta = std::max(static_cast<double>(pos) / static_cast<double>(observed.size()), floor);
  return {1.0 - beta, beta};
}

// Doubles when no prediction exceeds the 0.1 threshold.
inline double penalty_value(std::span<const double> preds) {
  double mass = 0.0;
  for (double y : preds) mass += std::max(y - 0.1, 0.0);
  return mass == 0.0 ? 2.0 : 1.0;
}

// Split loss for one instance, observed and pseudo parts weighted by
// alpha/beta, with no ramp, penalty, or subsampling.
inline double split_loss_value(std::span<const double> preds, std::span<const pml::Label> observed,
                               std::span<const double> pseudo, double alpha, double beta) {
  std::size_t n_exist = 0, n_missing = 0;
  for (pml::Label z : observed) (z == pml::Label::Missing ? n_missing : n_exist)++;
  double pos = 0.0, neg = 0.0;
  for (std::size_t j = 0; j < preds.size(); ++j) {
    if (observed[j] == pml::Label::Pos)
      pos += -std::log(preds[j]) / static_cast<double>(n_exist);
    else if (observed[j] == pml::Label::Neg)
      neg += -std::log(1.0 - preds[j]) / static_cast<double>(n_exist);
    else {
      pos += -pseudo[j] * std::log(preds[j]) / static_cast<double>(n_missing);
      neg += -(1.0 - pseudo[j]) * std::log(1.0 - preds[j]) / static_cast<double>(n_missing);
    }
  }
  return alpha * pos + beta * neg;
}

// Full per-instance loss: penalty times the ramp-weighted split loss over the
// picked subset of missing entries, with the q * N_ne denominator.
inline double subsampled_loss_value(std::span<const double> preds, std::span<const pml::Label> observed,
                                    std::span<const double> pseudo, std::span<const std::uint8_t> picked,
                                    double alpha, double beta, double ramp, double q,
                                    bool apply_penalty = true) {
  std::size_t n_exist = 0, n_missing = 0;
  for (pml::Label z : observed) (z == pml::Label::Missing ? n_missing : n_exist)++;
  double pos = 0.0, neg = 0.0;
  for (std::size_t j = 0; j < preds.size(); ++j) {
    if (observed[j] == pml::Label::Pos)
      pos += -std::log(preds[j]) / static_cast<double>(n_exist);
    else if (observed[j] == pml::Label::Neg)
      neg += -std::log(1.0 - preds[j]) / static_cast<double>(n_exist);
    else if (picked[j]) {
      const double denom = q * static_cast<double>(n_missing);
      pos += ramp * -pseudo[j] * std::log(preds[j]) / denom;
      neg += ramp * -(1.0 - pseudo[j]) * std::log(1.0 - preds[j]) / denom;
    }
  }
  const double p = apply_penalty ? penalty_value(preds) : 1.0;
  return p * (alpha * pos + beta * neg);
}

// Missing entries scored as negatives; optional down-weighting of every
// negative-target term.
inline double assume_negative_value(std::span<const double> preds, std::span<const pml::Label> observed,
                                    double neg_weight = 1.0) {
  double sum = 0.0;
  for (std::size_t j = 0; j < preds.size(); ++j) {
    if (observed[j] == pml::Label::Pos)
      sum += -std::log(preds[j]);
    else
      sum += neg_weight * -std::log(1.0 - preds[j]);
  }
  return sum / static_cast<double>(preds.size());
}

// Average precision by pairwise rank counting: no sorting, ties broken by
// ascending index like the deterministic contract demands.
inline double brute_force_ap(std::span<const double> scores, std::span<const std::uint8_t> relevance) {
  const std::size_t n = scores.size();
  auto rank_of = [&](std::size_t i) {
    std::size_t rank = 1;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      if (scores[j] > scores[i] || (scores[j] == scores[i] && j < i)) ++rank;
    }
    return rank;
  };
  std::size_t total_relevant = 0;
  for (std::uint8_t r : relevance)
    if (r) ++total_relevant;
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!relevance[i]) continue;
    const std::size_t my_rank = rank_of(i);
    std::size_t relevant_at_or_above = 0;
    for (std::size_t j = 0; j < n; ++j)
      if (relevance[j] && rank_of(j) <= my_rank) ++relevant_at_or_above;
    sum += static_cast<double>(relevant_at_or_above) / static_cast<double>(my_rank);
  }
  return sum / static_cast<double>(total_relevant);
}

}  // namespace ref
