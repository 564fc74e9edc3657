#pragma once

#include <cstddef>
#include <vector>

#include "error.hpp"

namespace cnet {

using Vector = std::vector<double>;

/// Column-major dense matrix of doubles. Data points, weight columns and
/// centroids are all stored as columns, so the vectors the math operates on
/// are contiguous in memory.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(size_t rows, size_t cols, double fill = 0.0);
  DenseMatrix(size_t rows, size_t cols, std::vector<double> data);

  static DenseMatrix identity(size_t n);

  size_t rows() const { return rows_; }
  size_t cols() const { return cols_; }
  size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(size_t i, size_t j) { return data_[j * rows_ + i]; }
  double operator()(size_t i, size_t j) const { return data_[j * rows_ + i]; }

  double* col(size_t j) { return data_.data() + j * rows_; }
  const double* col(size_t j) const { return data_.data() + j * rows_; }

  Vector column(size_t j) const;
  void set_column(size_t j, const Vector& v);

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  DenseMatrix transposed() const;
  bool all_finite() const;

 private:
  size_t rows_ = 0;
  size_t cols_ = 0;
  std::vector<double> data_;
};

}  // namespace cnet
