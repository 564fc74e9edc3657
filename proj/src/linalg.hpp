#pragma once

#include "matrix.hpp"

namespace cnet {

/// Matrix product a*b. Fixed j/k/i loop order; every output entry
/// accumulates its terms in ascending k, so repeated runs are bit-identical.
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);

/// aᵀ*b without materializing the transpose (column-dot-column).
DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b);

/// a*bᵀ without materializing the transpose.
DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b);

Vector matvec(const DenseMatrix& a, const Vector& x);
Vector matvec_tn(const DenseMatrix& a, const Vector& x);  // aᵀx

struct LeastSquaresSolution {
  Vector x;
  double residual;  // ‖Ax − b‖₂
};

/// Minimum-norm least squares via rank-revealing complete orthogonal
/// decomposition. Handles underdetermined and rank-deficient systems;
/// inconsistency shows up in the residual rather than as an error.
LeastSquaresSolution least_squares_solve(const DenseMatrix& a,
                                         const Vector& b);

/// Largest singular value via power iteration on AᵀA from the normalized
/// all-ones vector. The estimate approaches σ_max from below; throws
/// ErrorCode::NoConvergence when max_iter is exhausted before two
/// consecutive relative increments drop under tol.
double spectral_norm(const DenseMatrix& a, double tol = 1e-10,
                     int max_iter = 10000);

double frobenius_norm(const DenseMatrix& a);
double euclidean_norm(const Vector& v);

double dot(const Vector& a, const Vector& b);
double squared_distance(const double* a, const double* b, size_t n);

}  // namespace cnet
