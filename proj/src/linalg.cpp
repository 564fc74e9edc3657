#include "linalg.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <string>

namespace cnet {

namespace {

void require_shapes(size_t got, size_t want, const char* what) {
  if (got != want) {
    fail(ErrorCode::DimensionMismatch,
         std::string(what) + ": inner dimensions " + std::to_string(got) +
             " vs " + std::to_string(want));
  }
}

}  // namespace

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  require_shapes(a.cols(), b.rows(), "matmul");
  DenseMatrix c(a.rows(), b.cols(), 0.0);
  const size_t m = a.rows(), q = a.cols(), r = b.cols();
  for (size_t j = 0; j < r; ++j) {
    double* cj = c.col(j);
    for (size_t k = 0; k < q; ++k) {
      const double bkj = b(k, j);
      const double* ak = a.col(k);
      for (size_t i = 0; i < m; ++i) {
        cj[i] += ak[i] * bkj;
      }
    }
  }
  return c;
}

DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b) {
  require_shapes(a.rows(), b.rows(), "matmul_tn");
  DenseMatrix c(a.cols(), b.cols(), 0.0);
  const size_t n = a.rows();
  for (size_t j = 0; j < b.cols(); ++j) {
    const double* bj = b.col(j);
    double* cj = c.col(j);
    for (size_t i = 0; i < a.cols(); ++i) {
      const double* ai = a.col(i);
      double s = 0.0;
      for (size_t k = 0; k < n; ++k) s += ai[k] * bj[k];
      cj[i] = s;
    }
  }
  return c;
}

DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b) {
  require_shapes(a.cols(), b.cols(), "matmul_nt");
  DenseMatrix c(a.rows(), b.rows(), 0.0);
  const size_t m = a.rows(), q = a.cols();
  for (size_t k = 0; k < q; ++k) {
    const double* ak = a.col(k);
    const double* bk = b.col(k);
    for (size_t j = 0; j < b.rows(); ++j) {
      const double bjk = bk[j];
      double* cj = c.col(j);
      for (size_t i = 0; i < m; ++i) {
        cj[i] += ak[i] * bjk;
      }
    }
  }
  return c;
}

Vector matvec(const DenseMatrix& a, const Vector& x) {
  require_shapes(a.cols(), x.size(), "matvec");
  Vector y(a.rows(), 0.0);
  for (size_t k = 0; k < a.cols(); ++k) {
    const double* ak = a.col(k);
    const double xk = x[k];
    for (size_t i = 0; i < a.rows(); ++i) y[i] += ak[i] * xk;
  }
  return y;
}

Vector matvec_tn(const DenseMatrix& a, const Vector& x) {
  require_shapes(a.rows(), x.size(), "matvec_tn");
  Vector y(a.cols(), 0.0);
  for (size_t j = 0; j < a.cols(); ++j) {
    const double* aj = a.col(j);
    double s = 0.0;
    for (size_t k = 0; k < a.rows(); ++k) s += aj[k] * x[k];
    y[j] = s;
  }
  return y;
}

LeastSquaresSolution least_squares_solve(const DenseMatrix& a,
                                         const Vector& b) {
  require_shapes(a.rows(), b.size(), "least_squares_solve");
  Eigen::Map<const Eigen::MatrixXd> m(a.data().data(),
                                      static_cast<Eigen::Index>(a.rows()),
                                      static_cast<Eigen::Index>(a.cols()));
  Eigen::Map<const Eigen::VectorXd> rhs(b.data(),
                                        static_cast<Eigen::Index>(b.size()));
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(m);
  Eigen::VectorXd x = cod.solve(rhs);
  const double residual = (m * x - rhs).norm();
  return {Vector(x.data(), x.data() + x.size()), residual};
}

double spectral_norm(const DenseMatrix& a, double tol, int max_iter) {
  if (a.empty()) fail(ErrorCode::InvalidArgument, "spectral_norm: empty matrix");
  if (tol <= 0.0) fail(ErrorCode::InvalidArgument, "spectral_norm: tol must be positive");

  const size_t n = a.cols();
  Vector v(n, 1.0 / std::sqrt(static_cast<double>(n)));

  double sigma = 0.0;
  double prev = -1.0;
  int calm = 0;
  for (int it = 0; it < max_iter; ++it) {
    Vector w = matvec(a, v);        // Av
    sigma = euclidean_norm(w);      // sqrt(vᵀAᵀAv) for unit v
    if (sigma == 0.0) return 0.0;
    Vector u = matvec_tn(a, w);     // AᵀAv
    const double un = euclidean_norm(u);
    if (un == 0.0) return sigma;
    for (size_t i = 0; i < n; ++i) v[i] = u[i] / un;

    if (prev >= 0.0 && std::abs(sigma - prev) <= tol * std::max(sigma, 1e-300)) {
      if (++calm >= 2) return sigma;
    } else {
      calm = 0;
    }
    prev = sigma;
  }
  fail(ErrorCode::NoConvergence,
       "spectral_norm: no convergence after " + std::to_string(max_iter) +
           " iterations; last estimate " + std::to_string(sigma) +
           ", last increment " + std::to_string(sigma - prev));
}

double frobenius_norm(const DenseMatrix& a) {
  double s = 0.0;
  for (double x : a.data()) s += x * x;
  return std::sqrt(s);
}

double euclidean_norm(const Vector& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double dot(const Vector& a, const Vector& b) {
  require_shapes(a.size(), b.size(), "dot");
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double squared_distance(const double* a, const double* b, size_t n) {
  double s = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

}  // namespace cnet
