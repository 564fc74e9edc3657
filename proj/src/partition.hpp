#pragma once

#include <cstdint>
#include <vector>

#include "matrix.hpp"

namespace cnet {

/// Hard one-hot assignment of m points to c classes: the binary matrix
/// Y ∈ {0,1}^{m×c} with exactly one 1 per row, stored as the label list.
class PartitionMatrix {
 public:
  PartitionMatrix() = default;
  PartitionMatrix(std::vector<uint32_t> labels, uint32_t classes)
      : labels_(std::move(labels)), classes_(classes) {
    if (classes_ == 0) {
      fail(ErrorCode::InvalidArgument, "partition needs at least one class");
    }
    for (uint32_t l : labels_) {
      if (l >= classes_) {
        fail(ErrorCode::InvalidArgument,
             "label " + std::to_string(l) + " out of range for " +
                 std::to_string(classes_) + " classes");
      }
    }
  }

  size_t size() const { return labels_.size(); }
  uint32_t classes() const { return classes_; }
  uint32_t label(size_t row) const { return labels_[row]; }
  const std::vector<uint32_t>& labels() const { return labels_; }

  std::vector<size_t> class_counts() const {
    std::vector<size_t> counts(classes_, 0);
    for (uint32_t l : labels_) ++counts[l];
    return counts;
  }

  /// Materialized m×c one-hot form.
  DenseMatrix dense() const {
    DenseMatrix y(labels_.size(), classes_, 0.0);
    for (size_t j = 0; j < labels_.size(); ++j) y(j, labels_[j]) = 1.0;
    return y;
  }

 private:
  std::vector<uint32_t> labels_;
  uint32_t classes_ = 1;
};

}  // namespace cnet
