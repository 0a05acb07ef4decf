#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "pml/dataset.hpp"
#include "pml/errors.hpp"
#include "pml/grid.hpp"

namespace pml {

/// Pseudo-label targets for the missing entries of a LabelMatrix. The key set
/// is fixed at construction (exactly the Missing positions); values start at
/// 0.5 and are replaced by model predictions between epochs. Targets carry no
/// gradient; the loss reads them as constants.
class PseudoLabelStore {
 public:
  struct Entry {
    std::size_t row = 0;
    std::size_t col = 0;
    double value = 0.5;
  };

  PseudoLabelStore() = default;

  explicit PseudoLabelStore(const LabelMatrix& observed)
      : rows_(observed.rows()), cols_(observed.cols()), slot_(observed.rows(), observed.cols(), kNoSlot) {
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j)
        if (observed(i, j) == Label::Missing) {
          slot_(i, j) = static_cast<std::int64_t>(keys_.size());
          keys_.emplace_back(i, j);
        }
    values_.assign(keys_.size(), 0.5);
  }

  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  bool contains(std::size_t i, std::size_t j) const {
    return i < rows_ && j < cols_ && slot_(i, j) != kNoSlot;
  }

  double at(std::size_t i, std::size_t j) const {
    if (!contains(i, j))
      throw StructuralError("PseudoLabelStore: (" + std::to_string(i) + "," + std::to_string(j) +
                            ") is not a missing entry");
    return values_[static_cast<std::size_t>(slot_(i, j))];
  }

  /// Replaces every stored value with the model prediction at the same
  /// position. Key set is unchanged; observed entries are never touched.
  void update(const Matrix& predictions) {
    if (predictions.rows() != rows_ || predictions.cols() != cols_)
      throw StructuralError("PseudoLabelStore::update: prediction shape does not match label shape");
    for (std::size_t k = 0; k < keys_.size(); ++k) {
      const double v = predictions(keys_[k].first, keys_[k].second);
      if (!(v >= 0.0 && v <= 1.0))
        throw NumericError("PseudoLabelStore::update: prediction outside [0,1] at (" +
                           std::to_string(keys_[k].first) + "," + std::to_string(keys_[k].second) + ")");
      values_[k] = v;
    }
  }

  /// Entries in row-major key order.
  std::vector<Entry> entries() const {
    std::vector<Entry> out;
    out.reserve(keys_.size());
    for (std::size_t k = 0; k < keys_.size(); ++k)
      out.push_back({keys_[k].first, keys_[k].second, values_[k]});
    return out;
  }

 private:
  static constexpr std::int64_t kNoSlot = -1;

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  Grid<std::int64_t> slot_;
  std::vector<std::pair<std::size_t, std::size_t>> keys_;
  std::vector<double> values_;
};

}  // namespace pml
