#include "centroids.hpp"

#include <algorithm>
#include <cmath>

#include "linalg.hpp"
#include "rng.hpp"

namespace cnet {

CentroidSystem equidistant_centroids(const DenseMatrix& w, double tol) {
  const size_t d = w.rows();
  const size_t c = w.cols();
  if (d + 1 < c) {
    fail(ErrorCode::InvalidArgument,
         "equidistant centroids need d >= c-1 (got d=" + std::to_string(d) +
             ", c=" + std::to_string(c) + ")");
  }

  CentroidSystem system;
  system.provenance = CentroidProvenance::FromWeights;

  Vector v(d, 0.0);
  double residual = 0.0;
  if (c >= 2) {
    DenseMatrix a(c - 1, d, 0.0);
    Vector b(c - 1, 0.0);
    Vector norms(c, 0.0);
    for (size_t k = 0; k < c; ++k) {
      const double* col = w.col(k);
      double s = 0.0;
      for (size_t i = 0; i < d; ++i) s += col[i] * col[i];
      norms[k] = s;
    }
    for (size_t l = 1; l < c; ++l) {
      for (size_t i = 0; i < d; ++i) {
        a(l - 1, i) = 2.0 * (w(i, 0) - w(i, l));
      }
      b[l - 1] = norms[l] - norms[0];
    }
    LeastSquaresSolution solution = least_squares_solve(a, b);
    v = std::move(solution.x);
    residual = solution.residual;
    const double scale = 1.0 + euclidean_norm(b);
    if (residual > tol * scale) {
      fail(ErrorCode::Numeric,
           "equidistant shift system inconsistent: residual " +
               std::to_string(residual) + " exceeds tolerance " +
               std::to_string(tol * scale) + " (degenerate weight columns)");
    }
  }

  DenseMatrix z = w;
  for (size_t k = 0; k < c; ++k) {
    double* col = z.col(k);
    for (size_t i = 0; i < d; ++i) col[i] += v[i];
  }
  system.centroids = std::move(z);
  system.shift = std::move(v);
  system.residual = residual;
  return system;
}

double equidistance_spread(const DenseMatrix& centroids) {
  const size_t c = centroids.cols();
  if (c == 0) return 0.0;
  Vector norms(c, 0.0);
  for (size_t k = 0; k < c; ++k) {
    norms[k] = euclidean_norm(centroids.column(k));
  }
  const double ref = std::max(norms[0], 1e-300);
  double spread = 0.0;
  for (size_t k = 1; k < c; ++k) {
    spread = std::max(spread, std::abs(norms[k] - norms[0]) / ref);
  }
  return spread;
}

namespace {

size_t nearest_centroid(const double* point, const DenseMatrix& centroids) {
  size_t best = 0;
  double best_dist =
      squared_distance(point, centroids.col(0), centroids.rows());
  for (size_t k = 1; k < centroids.cols(); ++k) {
    const double dist =
        squared_distance(point, centroids.col(k), centroids.rows());
    if (dist < best_dist) {
      best_dist = dist;
      best = k;
    }
  }
  return best;
}

}  // namespace

PartitionMatrix kmeans_assign(const DenseMatrix& points,
                              const CentroidSystem& centroids) {
  const DenseMatrix& z = centroids.centroids;
  if (points.rows() != z.rows()) {
    fail(ErrorCode::DimensionMismatch,
         "point dimension " + std::to_string(points.rows()) +
             " does not match centroid dimension " + std::to_string(z.rows()));
  }
  std::vector<uint32_t> labels(points.cols());
  for (size_t j = 0; j < points.cols(); ++j) {
    labels[j] = static_cast<uint32_t>(nearest_centroid(points.col(j), z));
  }
  return PartitionMatrix(std::move(labels), static_cast<uint32_t>(z.cols()));
}

EquivalenceReport verify_equivalence(const NetworkModel& model,
                                     const DenseMatrix& points,
                                     double tie_margin) {
  const CentroidSystem system = equidistant_centroids(model.final_weight());
  const DenseMatrix fp = forward_penultimate(model, points);
  const DenseMatrix z = matmul_tn(model.final_weight(), fp);

  EquivalenceReport report;
  report.total = points.cols();
  report.system_residual = system.residual;
  report.spread = equidistance_spread(system.centroids);

  for (size_t j = 0; j < points.cols(); ++j) {
    const double* col = z.col(j);
    size_t best = 0;
    double top1 = col[0], top2 = -HUGE_VAL;
    for (size_t i = 1; i < z.rows(); ++i) {
      if (col[i] > top1) {
        top2 = top1;
        top1 = col[i];
        best = i;
      } else if (col[i] > top2) {
        top2 = col[i];
      }
    }
    if (z.rows() > 1 && top1 - top2 <= tie_margin) {
      ++report.ties;
      report.tie_indices.push_back(j);
      continue;
    }
    if (nearest_centroid(fp.col(j), system.centroids) != best) {
      ++report.mismatches;
    }
  }
  return report;
}

Vector shifted_softmax(const Vector& fp, const CentroidSystem& centroids) {
  if (centroids.provenance != CentroidProvenance::FromWeights) {
    fail(ErrorCode::InvalidArgument,
         "shifted softmax is defined for weight-derived centroids");
  }
  return softmax(matvec_tn(centroids.centroids, fp));
}

DistortionBound min_distortion_bound(const NetworkModel& model,
                                     const Vector& x, const Vector& x_attacked,
                                     const CentroidSystem& centroids,
                                     double lipschitz) {
  if (!(lipschitz > 0.0)) {
    fail(ErrorCode::InvalidArgument, "lipschitz bound must be positive");
  }
  const Vector fp_x = forward_penultimate(model, x);
  const Vector fp_xt = forward_penultimate(model, x_attacked);
  const DenseMatrix& z = centroids.centroids;
  const size_t k = nearest_centroid(fp_x.data(), z);
  const size_t l = nearest_centroid(fp_xt.data(), z);
  if (k == l) {
    fail(ErrorCode::InvalidArgument,
         "distortion bound undefined: both points map to class " +
             std::to_string(k));
  }

  DistortionBound bound;
  bound.lipschitz = lipschitz;
  bound.centroid_separation =
      std::sqrt(squared_distance(z.col(k), z.col(l), z.rows()));
  bound.source_gap =
      std::sqrt(squared_distance(fp_x.data(), z.col(k), z.rows()));
  bound.target_gap =
      std::sqrt(squared_distance(fp_xt.data(), z.col(l), z.rows()));
  bound.lower_bound = (bound.centroid_separation - bound.target_gap -
                       bound.source_gap) /
                      lipschitz;
  return bound;
}

double prototype_gap_bound(const NetworkModel& model, const Vector& x,
                           const Vector& prototype, size_t centroid_index,
                           const CentroidSystem& centroids, double lipschitz,
                           double prototype_tol) {
  const DenseMatrix& z = centroids.centroids;
  if (centroid_index >= z.cols()) {
    fail(ErrorCode::InvalidArgument, "centroid index out of range");
  }
  const Vector fp_proto = forward_penultimate(model, prototype);
  const double proto_gap = std::sqrt(
      squared_distance(fp_proto.data(), z.col(centroid_index), z.rows()));
  if (proto_gap > prototype_tol) {
    fail(ErrorCode::InvalidArgument,
         "prototype precondition violated: achieved gap " +
             std::to_string(proto_gap) + " exceeds tolerance " +
             std::to_string(prototype_tol));
  }

  Vector diff(x.size());
  for (size_t i = 0; i < x.size(); ++i) diff[i] = x[i] - prototype[i];
  const double bound = lipschitz * euclidean_norm(diff);

  const Vector fp_x = forward_penultimate(model, x);
  const double gap = std::sqrt(
      squared_distance(fp_x.data(), z.col(centroid_index), z.rows()));
  if (bound + proto_gap + 1e-9 * (1.0 + gap) < gap) {
    fail(ErrorCode::Numeric,
         "prototype bound " + std::to_string(bound) +
             " fails to cover gap " + std::to_string(gap) +
             "; the supplied lipschitz value is not a valid upper bound");
  }
  return bound;
}

PrototypeSearchResult find_prototype(const NetworkModel& model,
                                     const CentroidSystem& centroids,
                                     size_t centroid_index, uint64_t seed,
                                     size_t steps) {
  const DenseMatrix& z = centroids.centroids;
  if (centroid_index >= z.cols()) {
    fail(ErrorCode::InvalidArgument, "centroid index out of range");
  }
  const Vector target = z.column(centroid_index);

  Rng rng(seed);
  Vector point(model.input_dim());
  for (double& p : point) p = rng.uniform(-1.0, 1.0);

  auto objective = [&](const Vector& candidate) {
    const Vector fp = forward_penultimate(model, candidate);
    return squared_distance(fp.data(), target.data(), target.size());
  };

  double value = objective(point);
  double step_size = 0.1;
  for (size_t step = 0; step < steps; ++step) {
    const Vector grad = input_gradient_distance(model, point, target);
    Vector trial(point.size());
    for (size_t i = 0; i < point.size(); ++i) {
      trial[i] = point[i] - step_size * grad[i];
    }
    const double trial_value = objective(trial);
    if (trial_value <= value) {
      point = std::move(trial);
      value = trial_value;
      step_size *= 1.1;
    } else {
      step_size *= 0.5;
    }
  }
  return {std::move(point), std::sqrt(value)};
}

}  // namespace cnet
