#pragma once

// Random batch construction shared by the loss/trainer tests and the
// acceptance suite.

#include <cmath>
#include <cstdint>
#include <vector>

#include "pml/dataset.hpp"
#include "pml/grid.hpp"
#include "pml/random.hpp"

namespace testing_support {

struct RandomBatch {
  pml::Matrix logits;
  pml::Matrix predictions;
  pml::LabelMatrix observed;
  pml::Matrix pseudo;
  pml::Grid<std::uint8_t> picked;
};

// Logits are kept moderate so the log clamp never engages, and predictions
// are nudged off the 0.1 penalty boundary so finite differencing cannot
// cross it.
inline RandomBatch make_batch(pml::Rng& rng, std::size_t b, std::size_t l, double missing_prob,
                              double subsample_fraction) {
  RandomBatch batch;
  batch.logits = pml::Matrix(b, l);
  batch.predictions = pml::Matrix(b, l);
  batch.observed = pml::LabelMatrix(b, l);
  batch.pseudo = pml::Matrix(b, l, 0.0);
  batch.picked = pml::Grid<std::uint8_t>(b, l, 0);

  for (std::size_t i = 0; i < b; ++i) {
    for (std::size_t j = 0; j < l; ++j) {
      double s = rng.uniform(-3.0, 3.0);
      double y = 1.0 / (1.0 + std::exp(-s));
      if (std::abs(y - 0.1) < 5e-3) {
        s += 0.2;
        y = 1.0 / (1.0 + std::exp(-s));
      }
      batch.logits(i, j) = s;
      batch.predictions(i, j) = y;
      if (rng.uniform() < missing_prob) {
        batch.observed(i, j) = pml::Label::Missing;
        batch.pseudo(i, j) = rng.uniform();
      } else {
        batch.observed(i, j) = rng.uniform() < 0.3 ? pml::Label::Pos : pml::Label::Neg;
      }
    }
    std::vector<std::size_t> missing;
    for (std::size_t j = 0; j < l; ++j)
      if (batch.observed(i, j) == pml::Label::Missing) missing.push_back(j);
    const auto count = static_cast<std::size_t>(
        std::llround(subsample_fraction * static_cast<double>(missing.size())));
    for (std::size_t idx : rng.sample_without_replacement(missing.size(), count))
      batch.picked(i, missing[idx]) = 1;
  }
  return batch;
}

inline pml::Matrix predictions_of_logits(const pml::Matrix& logits) {
  pml::Matrix preds(logits.rows(), logits.cols());
  for (std::size_t i = 0; i < logits.rows(); ++i)
    for (std::size_t j = 0; j < logits.cols(); ++j)
      preds(i, j) = 1.0 / (1.0 + std::exp(-logits(i, j)));
  return preds;
}

}  // namespace testing_support
