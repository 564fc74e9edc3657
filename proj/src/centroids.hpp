#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "matrix.hpp"
#include "network.hpp"
#include "partition.hpp"

namespace cnet {

enum class CentroidProvenance : uint8_t { FromWeights = 0, KMeansOptimal = 1 };

/// Per-class reference points in penultimate space: either the equidistant
/// construction Z = W + v·1ᵀ from the final-layer weights, or per-class
/// means C of mapped training points.
struct CentroidSystem {
  DenseMatrix centroids;  // d×c
  std::optional<Vector> shift;
  CentroidProvenance provenance = CentroidProvenance::FromWeights;
  double residual = 0.0;  // least-squares residual of the shift system
};

/// Builds the shift vector v equalizing all column norms of W + v·1ᵀ by
/// solving the c−1 equations 2(W_{·1}−W_{·l})ᵀv = ‖W_{·l}‖² − ‖W_{·1}‖²
/// with the minimum-norm solution. Requires d ≥ c−1; a residual above
/// tol·(1+‖rhs‖) (degenerate weight columns) is an error.
CentroidSystem equidistant_centroids(const DenseMatrix& w, double tol = 1e-9);

/// Max relative deviation of centroid column norms from the first column.
double equidistance_spread(const DenseMatrix& centroids);

/// Assigns each column of `points` to the nearest centroid (squared
/// Euclidean distance); ties resolve to the lowest class index.
PartitionMatrix kmeans_assign(const DenseMatrix& points,
                              const CentroidSystem& centroids);

struct EquivalenceReport {
  size_t total = 0;
  size_t ties = 0;
  size_t mismatches = 0;
  std::vector<size_t> tie_indices;
  double system_residual = 0.0;
  double spread = 0.0;

  double match_fraction() const {
    const size_t considered = total - ties;
    if (considered == 0) return 1.0;
    return static_cast<double>(considered - mismatches) /
           static_cast<double>(considered);
  }
};

/// Checks, point by point, that the argmax of the logits equals the
/// nearest-centroid class under the equidistant construction. Points whose
/// top two logits are within tie_margin are flagged, not counted as
/// mismatches.
EquivalenceReport verify_equivalence(const NetworkModel& model,
                                     const DenseMatrix& points,
                                     double tie_margin = 1e-9);

/// Softmax expressed over centroid inner products:
/// exp(f_pᵀZ_{·k}) / Σ_l exp(f_pᵀZ_{·l}). Equal to softmax(logits) because
/// the shift adds the same constant to every logit.
Vector shifted_softmax(const Vector& fp, const CentroidSystem& centroids);

struct DistortionBound {
  double lower_bound = 0.0;  // input-space units; negative means vacuous
  double centroid_separation = 0.0;
  double source_gap = 0.0;
  double target_gap = 0.0;
  double lipschitz = 1.0;
};

/// Lower bound on the input distortion needed to move x (nearest centroid k)
/// to x_attacked (nearest centroid l ≠ k):
/// (‖Z_{·l}−Z_{·k}‖ − ‖f_p(x̃)−Z_{·l}‖ − ‖f_p(x)−Z_{·k}‖) / L_p.
/// Valid for any lipschitz ≥ L_p; a same-class pair is an error.
DistortionBound min_distortion_bound(const NetworkModel& model,
                                     const Vector& x, const Vector& x_attacked,
                                     const CentroidSystem& centroids,
                                     double lipschitz);

/// L_p·‖x − z_k‖ where z_k is a prototype (an input mapping onto centroid k
/// within prototype_tol). Upper-bounds ‖f_p(x) − Z_{·k}‖ up to the prototype
/// tolerance; a violation beyond that slack means the supplied lipschitz was
/// not a valid bound.
double prototype_gap_bound(const NetworkModel& model, const Vector& x,
                           const Vector& prototype, size_t centroid_index,
                           const CentroidSystem& centroids, double lipschitz,
                           double prototype_tol = 1e-3);

struct PrototypeSearchResult {
  Vector z;
  double gap;  // ‖f_p(z) − Z_{·k}‖ at the returned point
};

/// Gradient descent on ‖f_p(z) − Z_{·k}‖² from a seeded random start; the
/// caller decides whether the achieved gap is acceptable.
PrototypeSearchResult find_prototype(const NetworkModel& model,
                                     const CentroidSystem& centroids,
                                     size_t centroid_index, uint64_t seed,
                                     size_t steps = 500);

}  // namespace cnet
