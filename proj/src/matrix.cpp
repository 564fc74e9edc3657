#include "matrix.hpp"

#include <cmath>

namespace cnet {

DenseMatrix::DenseMatrix(size_t rows, size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {
  if (rows == 0 || cols == 0) {
    fail(ErrorCode::InvalidArgument, "matrix dimensions must be positive");
  }
}

DenseMatrix::DenseMatrix(size_t rows, size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (rows == 0 || cols == 0) {
    fail(ErrorCode::InvalidArgument, "matrix dimensions must be positive");
  }
  if (data_.size() != rows * cols) {
    fail(ErrorCode::DimensionMismatch,
         "matrix data length " + std::to_string(data_.size()) +
             " does not equal rows*cols = " + std::to_string(rows * cols));
  }
}

DenseMatrix DenseMatrix::identity(size_t n) {
  DenseMatrix m(n, n, 0.0);
  for (size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Vector DenseMatrix::column(size_t j) const {
  if (j >= cols_) fail(ErrorCode::InvalidArgument, "column index out of range");
  return Vector(col(j), col(j) + rows_);
}

void DenseMatrix::set_column(size_t j, const Vector& v) {
  if (j >= cols_) fail(ErrorCode::InvalidArgument, "column index out of range");
  if (v.size() != rows_) {
    fail(ErrorCode::DimensionMismatch, "column length does not match rows");
  }
  double* dst = col(j);
  for (size_t i = 0; i < rows_; ++i) dst[i] = v[i];
}

DenseMatrix DenseMatrix::transposed() const {
  DenseMatrix t(cols_, rows_, 0.0);
  for (size_t j = 0; j < cols_; ++j) {
    for (size_t i = 0; i < rows_; ++i) {
      t(j, i) = (*this)(i, j);
    }
  }
  return t;
}

bool DenseMatrix::all_finite() const {
  for (double x : data_) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

}  // namespace cnet
