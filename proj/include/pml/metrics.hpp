#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "pml/dataset.hpp"
#include "pml/errors.hpp"
#include "pml/grid.hpp"

namespace pml {

struct EvalResult {
  std::vector<double> per_class_ap;          // NaN at skipped classes
  double mean_ap = 0.0;                      // mean over non-skipped classes
  std::vector<std::size_t> skipped_classes;  // classes with zero positives
};

/// Average precision of a ranking by descending score, ties broken by
/// ascending original index. Returns nullopt when nothing is relevant
/// (AP is undefined there; callers skip the class).
inline std::optional<double> average_precision(std::span<const double> scores,
                                               std::span<const std::uint8_t> relevance) {
  if (scores.size() != relevance.size())
    throw StructuralError("average_precision: scores and relevance lengths differ");
  const std::size_t n = scores.size();
  std::size_t total_relevant = 0;
  for (std::uint8_t r : relevance)
    if (r) ++total_relevant;
  if (total_relevant == 0) return std::nullopt;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&scores](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t rank = 1; rank <= n; ++rank) {
    if (relevance[order[rank - 1]]) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(rank);
    }
  }
  return sum / static_cast<double>(total_relevant);
}

/// Per-class AP over prediction columns against full ground truth; classes
/// without a positive instance are skipped and excluded from the mean.
inline EvalResult evaluate(const Matrix& predictions, const BinaryLabels& truth) {
  if (predictions.rows() != truth.rows() || predictions.cols() != truth.cols())
    throw StructuralError("evaluate: prediction and truth shapes differ");
  const std::size_t n = predictions.rows();
  const std::size_t l = predictions.cols();

  EvalResult result;
  result.per_class_ap.assign(l, std::numeric_limits<double>::quiet_NaN());
  double sum = 0.0;
  std::size_t counted = 0;
  std::vector<double> scores(n);
  std::vector<std::uint8_t> relevance(n);
  for (std::size_t j = 0; j < l; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      scores[i] = predictions(i, j);
      relevance[i] = truth(i, j) == 1;
    }
    if (const auto ap = average_precision(scores, relevance)) {
      result.per_class_ap[j] = *ap;
      sum += *ap;
      ++counted;
    } else {
      result.skipped_classes.push_back(j);
    }
  }
  if (counted == 0) throw ValidationError("evaluate: every class lacks a positive instance");
  result.mean_ap = sum / static_cast<double>(counted);
  return result;
}

}  // namespace pml
