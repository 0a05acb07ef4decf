#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "pml/errors.hpp"
#include "pml/grid.hpp"
#include "pml/random.hpp"
#include "pml/text.hpp"

namespace pml {

/// Ternary observed-label state.
enum class Label : std::int8_t { Neg = 0, Pos = 1, Missing = 2 };

/// N x L observed labels; Missing marks entries discarded by masking.
using LabelMatrix = Grid<Label>;

/// N x L ground-truth labels, entries 0/1.
using BinaryLabels = Grid<std::int8_t>;

struct Dataset {
  Matrix features;                       // N x M
  BinaryLabels labels;                   // N x L
  std::vector<std::string> class_names;  // L entries

  std::size_t instances() const { return features.rows(); }
  std::size_t feature_dim() const { return features.cols(); }
  std::size_t classes() const { return labels.cols(); }

  void validate() const {
    if (features.rows() < 1) throw ValidationError("Dataset.features: need at least one instance");
    if (features.cols() < 1) throw ValidationError("Dataset.features: need at least one dimension");
    if (labels.cols() < 2) throw ValidationError("Dataset.labels: need at least two classes");
    if (labels.rows() != features.rows())
      throw StructuralError("Dataset: features and labels disagree on instance count");
    if (class_names.size() != labels.cols())
      throw StructuralError("Dataset: class_names length does not match label columns");
    for (double v : features.flat())
      if (!std::isfinite(v)) throw ValidationError("Dataset.features: non-finite entry");
    for (std::int8_t v : labels.flat())
      if (v != 0 && v != 1) throw ValidationError("Dataset.labels: entry outside {0,1}");
  }
};

inline std::vector<std::string> default_class_names(std::size_t count) {
  std::vector<std::string> names;
  names.reserve(count);
  for (std::size_t j = 0; j < count; ++j) names.push_back("class_" + std::to_string(j));
  return names;
}

struct SyntheticSpec {
  std::size_t n_instances = 0;
  std::size_t n_features = 0;
  std::size_t n_classes = 0;
  double mean_positives_per_instance = 0.0;
  double noise_scale = 0.0;
  std::uint64_t seed = 0;

  void validate() const {
    if (n_instances == 0) throw ValidationError("SyntheticSpec.n_instances: must be positive");
    if (n_features == 0) throw ValidationError("SyntheticSpec.n_features: must be positive");
    if (n_classes < 2) throw ValidationError("SyntheticSpec.n_classes: must be at least 2");
    if (!(mean_positives_per_instance > 0.0))
      throw ValidationError("SyntheticSpec.mean_positives_per_instance: must be > 0");
    if (mean_positives_per_instance >= static_cast<double>(n_classes))
      throw ValidationError("SyntheticSpec.mean_positives_per_instance: must be < n_classes");
    if (!(noise_scale >= 0.0) || !std::isfinite(noise_scale))
      throw ValidationError("SyntheticSpec.noise_scale: must be finite and >= 0");
  }
};

/// Generates a linearly learnable imbalanced multi-label dataset. Each class
/// gets a random prototype vector; an instance's features are the sum of its
/// positive classes' prototypes plus isotropic noise.
///
/// Positive counts per row: for mean >= 1, count = 1 + Binomial(L-1, p) with
/// p chosen so the expectation equals the requested mean, which also
/// guarantees every row has at least one positive (so SPL/PPL masking stays
/// applicable). For mean < 1, each class is an independent Bernoulli and rows
/// may have zero positives.
inline Dataset generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  const std::size_t n = spec.n_instances;
  const std::size_t m = spec.n_features;
  const std::size_t l = spec.n_classes;
  Rng rng(spec.seed);

  Matrix prototypes(l, m);
  const double proto_scale = 1.0 / std::sqrt(static_cast<double>(m));
  for (double& v : prototypes.flat()) v = proto_scale * rng.normal();

  Dataset ds;
  ds.labels = BinaryLabels(n, l, 0);
  const double mean = spec.mean_positives_per_instance;
  for (std::size_t i = 0; i < n; ++i) {
    if (mean >= 1.0) {
      const double p = (mean - 1.0) / static_cast<double>(l - 1);
      std::size_t count = 1;
      for (std::size_t t = 0; t + 1 < l; ++t)
        if (rng.bernoulli(p)) ++count;
      for (std::size_t k : rng.sample_without_replacement(l, count)) ds.labels(i, k) = 1;
    } else {
      for (std::size_t j = 0; j < l; ++j)
        if (rng.bernoulli(mean / static_cast<double>(l))) ds.labels(i, j) = 1;
    }
  }

  ds.features = Matrix(n, m, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < l; ++j)
      if (ds.labels(i, j) == 1)
        for (std::size_t f = 0; f < m; ++f) ds.features(i, f) += prototypes(j, f);
    for (std::size_t f = 0; f < m; ++f) ds.features(i, f) += spec.noise_scale * rng.normal();
  }

  ds.class_names = default_class_names(l);
  return ds;
}

enum class MaskSetting { FAL, PAL, PPL, SPL };

inline const char* to_string(MaskSetting s) {
  switch (s) {
    case MaskSetting::FAL: return "FAL";
    case MaskSetting::PAL: return "PAL";
    case MaskSetting::PPL: return "PPL";
    case MaskSetting::SPL: return "SPL";
  }
  return "?";
}

struct MaskSpec {
  MaskSetting setting = MaskSetting::FAL;
  double keep_fraction = 1.0;  // ignored for FAL and SPL
  std::uint64_t seed = 0;

  void validate() const {
    if (!(keep_fraction > 0.0) || keep_fraction > 1.0)
      throw ValidationError("MaskSpec.keep_fraction: must be in (0, 1]");
  }

  /// e.g. "PAL_0.3", "FAL", "SPL".
  std::string name() const;
};

/// One-time masking of full labels into an observed LabelMatrix.
///
/// FAL keeps everything. PAL keeps round(keep_fraction * L) entries per row
/// regardless of sign (a row may end up with zero observed positives).
/// PPL keeps max(1, round(keep_fraction * P_i)) positives per row and drops
/// every negative. SPL keeps exactly one positive per row. Retention counts
/// are per-row, and selection is uniform without replacement.
inline LabelMatrix apply_mask(const BinaryLabels& labels, const MaskSpec& spec) {
  spec.validate();
  const std::size_t n = labels.rows();
  const std::size_t l = labels.cols();
  LabelMatrix out(n, l, Label::Missing);
  Rng rng(spec.seed);

  auto observe = [&](std::size_t i, std::size_t j) {
    out(i, j) = labels(i, j) == 1 ? Label::Pos : Label::Neg;
  };

  switch (spec.setting) {
    case MaskSetting::FAL:
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < l; ++j) observe(i, j);
      break;
    case MaskSetting::PAL: {
      const auto keep = static_cast<std::size_t>(std::llround(spec.keep_fraction * static_cast<double>(l)));
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j : rng.sample_without_replacement(l, keep)) observe(i, j);
      break;
    }
    case MaskSetting::PPL:
      for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::size_t> positives;
        for (std::size_t j = 0; j < l; ++j)
          if (labels(i, j) == 1) positives.push_back(j);
        if (positives.empty())
          throw ValidationError("apply_mask: PPL requires a positive label, row " + std::to_string(i) + " has none");
        auto keep = static_cast<std::size_t>(
            std::llround(spec.keep_fraction * static_cast<double>(positives.size())));
        if (keep < 1) keep = 1;
        for (std::size_t idx : rng.sample_without_replacement(positives.size(), keep))
          out(i, positives[idx]) = Label::Pos;
      }
      break;
    case MaskSetting::SPL:
      for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::size_t> positives;
        for (std::size_t j = 0; j < l; ++j)
          if (labels(i, j) == 1) positives.push_back(j);
        if (positives.empty())
          throw ValidationError("apply_mask: SPL requires a positive label, row " + std::to_string(i) + " has none");
        out(i, positives[rng.below(positives.size())]) = Label::Pos;
      }
      break;
  }
  return out;
}

inline std::string MaskSpec::name() const {
  std::string base = to_string(setting);
  if (setting == MaskSetting::PAL || setting == MaskSetting::PPL)
    base += "_" + format_double(keep_fraction);
  return base;
}

inline bool has_missing(const LabelMatrix& labels) {
  for (Label v : labels.flat())
    if (v == Label::Missing) return true;
  return false;
}

/// Counts used throughout loss and trainer code.
inline std::size_t count_observed(std::span<const Label> row) {
  std::size_t c = 0;
  for (Label v : row)
    if (v != Label::Missing) ++c;
  return c;
}

inline std::size_t count_missing(std::span<const Label> row) {
  return row.size() - count_observed(row);
}

}  // namespace pml
