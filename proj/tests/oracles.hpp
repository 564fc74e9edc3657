// Test-only reference implementations, deliberately independent of the
// library's computation paths: different algorithms, different loop orders.
// Expected values in the test suites come from these.

#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "matrix.hpp"
#include "network.hpp"
#include "partition.hpp"
#include "rng.hpp"

namespace oracle {

/// Plain i/j/k triple loop (implementation uses j/k/i with axpy updates).
inline cnet::DenseMatrix matmul_naive(const cnet::DenseMatrix& a,
                                      const cnet::DenseMatrix& b) {
  cnet::DenseMatrix c(a.rows(), b.cols(), 0.0);
  for (size_t i = 0; i < a.rows(); ++i) {
    for (size_t j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      c(i, j) = s;
    }
  }
  return c;
}

/// Dense linear solve with partial pivoting, for the normal-equations
/// oracle below.
inline cnet::Vector solve_linear(cnet::DenseMatrix a, cnet::Vector b) {
  const size_t n = a.rows();
  for (size_t col = 0; col < n; ++col) {
    size_t pivot = col;
    for (size_t r = col + 1; r < n; ++r) {
      if (std::abs(a(r, col)) > std::abs(a(pivot, col))) pivot = r;
    }
    if (pivot != col) {
      for (size_t c = 0; c < n; ++c) std::swap(a(col, c), a(pivot, c));
      std::swap(b[col], b[pivot]);
    }
    for (size_t r = col + 1; r < n; ++r) {
      const double f = a(r, col) / a(col, col);
      for (size_t c = col; c < n; ++c) a(r, c) -= f * a(col, c);
      b[r] -= f * b[col];
    }
  }
  cnet::Vector x(n, 0.0);
  for (size_t i = n; i-- > 0;) {
    double s = b[i];
    for (size_t j = i + 1; j < n; ++j) s -= a(i, j) * x[j];
    x[i] = s / a(i, i);
  }
  return x;
}

/// Normal equations x = (AᵀA)⁻¹Aᵀb — valid oracle on well-conditioned
/// full-column-rank systems only.
inline cnet::Vector least_squares_normal_equations(const cnet::DenseMatrix& a,
                                                   const cnet::Vector& b) {
  const size_t n = a.cols();
  cnet::DenseMatrix ata(n, n, 0.0);
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (size_t k = 0; k < a.rows(); ++k) s += a(k, i) * a(k, j);
      ata(i, j) = s;
    }
  }
  cnet::Vector atb(n, 0.0);
  for (size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (size_t k = 0; k < a.rows(); ++k) s += a(k, i) * b[k];
    atb[i] = s;
  }
  return solve_linear(ata, atb);
}

/// One-sided Jacobi SVD: rotates column pairs until mutual orthogonality;
/// singular values are the resulting column norms, descending.
inline std::vector<double> singular_values_jacobi(cnet::DenseMatrix a,
                                                  int max_sweeps = 60) {
  const size_t n = a.cols();
  const size_t m = a.rows();
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    bool rotated = false;
    for (size_t p = 0; p + 1 < n; ++p) {
      for (size_t q = p + 1; q < n; ++q) {
        double alpha = 0.0, beta = 0.0, gamma = 0.0;
        for (size_t i = 0; i < m; ++i) {
          alpha += a(i, p) * a(i, p);
          beta += a(i, q) * a(i, q);
          gamma += a(i, p) * a(i, q);
        }
        if (std::abs(gamma) <= 1e-15 * std::sqrt(alpha * beta) ||
            gamma == 0.0) {
          continue;
        }
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = (zeta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (size_t i = 0; i < m; ++i) {
          const double ap = a(i, p);
          const double aq = a(i, q);
          a(i, p) = c * ap - s * aq;
          a(i, q) = s * ap + c * aq;
        }
      }
    }
    if (!rotated) break;
  }
  std::vector<double> sigma(n, 0.0);
  for (size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (size_t i = 0; i < m; ++i) s += a(i, j) * a(i, j);
    sigma[j] = std::sqrt(s);
  }
  std::sort(sigma.rbegin(), sigma.rend());
  return sigma;
}

/// Neumaier compensated summation.
inline double compensated_sum(const std::vector<double>& xs) {
  double sum = 0.0, comp = 0.0;
  for (double x : xs) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) {
      comp += (sum - t) + x;
    } else {
      comp += (x - t) + sum;
    }
    sum = t;
  }
  return sum + comp;
}

inline double euclidean_norm_compensated(const cnet::Vector& v) {
  std::vector<double> squares(v.size());
  for (size_t i = 0; i < v.size(); ++i) squares[i] = v[i] * v[i];
  return std::sqrt(compensated_sum(squares));
}

/// Extended-precision softmax reference.
inline cnet::Vector softmax_long_double(const cnet::Vector& z) {
  long double zmax = z[0];
  for (double v : z) zmax = std::max<long double>(zmax, v);
  std::vector<long double> e(z.size());
  long double sum = 0.0L;
  for (size_t i = 0; i < z.size(); ++i) {
    e[i] = expl(static_cast<long double>(z[i]) - zmax);
    sum += e[i];
  }
  cnet::Vector out(z.size());
  for (size_t i = 0; i < z.size(); ++i) {
    out[i] = static_cast<double>(e[i] / sum);
  }
  return out;
}

/// Exhaustive nearest-column lookup over an m×c distance table.
inline std::vector<uint32_t> nearest_centroid_bruteforce(
    const cnet::DenseMatrix& points, const cnet::DenseMatrix& centroids) {
  std::vector<uint32_t> out(points.cols(), 0);
  for (size_t j = 0; j < points.cols(); ++j) {
    double best = HUGE_VAL;
    uint32_t best_k = 0;
    for (size_t k = 0; k < centroids.cols(); ++k) {
      double d = 0.0;
      for (size_t i = 0; i < points.rows(); ++i) {
        const double diff = points(i, j) - centroids(i, k);
        d += diff * diff;
      }
      if (d < best) {
        best = d;
        best_k = static_cast<uint32_t>(k);
      }
    }
    out[j] = best_k;
  }
  return out;
}

/// ‖Pᵀ − YZᵀ‖² for a label assignment (P is d×m, Z is d×c).
inline double partition_objective(const cnet::DenseMatrix& points,
                                  const cnet::DenseMatrix& centroids,
                                  const std::vector<uint32_t>& labels) {
  double total = 0.0;
  for (size_t j = 0; j < points.cols(); ++j) {
    for (size_t i = 0; i < points.rows(); ++i) {
      const double diff = points(i, j) - centroids(i, labels[j]);
      total += diff * diff;
    }
  }
  return total;
}

/// Global optimum of the k-means assignment objective by enumerating all
/// c^m partition matrices. Only tractable for tiny m, c.
inline double best_partition_objective(const cnet::DenseMatrix& points,
                                       const cnet::DenseMatrix& centroids) {
  const size_t m = points.cols();
  const size_t c = centroids.cols();
  std::vector<uint32_t> labels(m, 0);
  double best = HUGE_VAL;
  while (true) {
    best = std::min(best, partition_objective(points, centroids, labels));
    size_t j = 0;
    while (j < m && ++labels[j] == c) {
      labels[j] = 0;
      ++j;
    }
    if (j == m) break;
  }
  return best;
}

/// Central finite differences of a batch loss with respect to every weight;
/// step 1e-6.
inline std::vector<cnet::DenseMatrix> finite_difference_gradients(
    cnet::NetworkModel& model, const cnet::DenseMatrix& batch,
    const cnet::PartitionMatrix& targets, const cnet::LossSpec& loss,
    double step = 1e-6) {
  std::vector<cnet::DenseMatrix> grads;
  for (size_t l = 0; l < model.layer_count(); ++l) {
    cnet::DenseMatrix g(model.layers()[l].weight.rows(),
                        model.layers()[l].weight.cols(), 0.0);
    auto& w = model.layers()[l].weight.data();
    for (size_t i = 0; i < w.size(); ++i) {
      const double saved = w[i];
      w[i] = saved + step;
      const double up = cnet::loss_value(model, batch, targets, loss);
      w[i] = saved - step;
      const double down = cnet::loss_value(model, batch, targets, loss);
      w[i] = saved;
      g.data()[i] = (up - down) / (2.0 * step);
    }
    grads.push_back(std::move(g));
  }
  return grads;
}

/// Relative error between gradient stacks: ‖a−b‖ / max(‖b‖, floor).
inline double gradient_relative_error(const std::vector<cnet::DenseMatrix>& a,
                                      const std::vector<cnet::DenseMatrix>& b,
                                      double floor = 1e-12) {
  double diff = 0.0, ref = 0.0;
  for (size_t l = 0; l < a.size(); ++l) {
    for (size_t i = 0; i < a[l].data().size(); ++i) {
      const double d = a[l].data()[i] - b[l].data()[i];
      diff += d * d;
      ref += b[l].data()[i] * b[l].data()[i];
    }
  }
  return std::sqrt(diff) / std::max(std::sqrt(ref), floor);
}

inline cnet::DenseMatrix random_matrix(size_t rows, size_t cols,
                                       cnet::Rng& rng, double lo = -1.0,
                                       double hi = 1.0) {
  cnet::DenseMatrix m(rows, cols, 0.0);
  for (double& x : m.data()) x = rng.uniform(lo, hi);
  return m;
}

inline cnet::Vector random_vector(size_t n, cnet::Rng& rng, double lo = -1.0,
                                  double hi = 1.0) {
  cnet::Vector v(n);
  for (double& x : v) x = rng.uniform(lo, hi);
  return v;
}

}  // namespace oracle
