#pragma once

#include <cstdint>
#include <vector>

#include "centroids.hpp"
#include "dataset.hpp"
#include "network.hpp"

namespace cnet {

/// Scoring head replacing softmax: per-class confidences
/// κ_k = exp(−‖f_p(x) − C_{·k}‖²), deliberately unnormalized so that points
/// far from every centroid score near zero across the board.
struct GaussHead {
  CentroidSystem centroids;  // provenance KMeansOptimal, d×c
  double outlier_threshold = 0.0;  // defaults to 1/c when constructed
};

GaussHead make_gauss_head(CentroidSystem centroids);

/// κ(x) over all classes; entries in (0,1], 1 exactly at a centroid.
Vector gauss_confidence(const GaussHead& head, const Vector& fp);

struct GaussPrediction {
  uint32_t cls = 0;
  double confidence = 0.0;
  bool outlier = false;
};

/// argmax κ (equivalently nearest centroid); outlier when the winning
/// confidence falls under the threshold. Ties resolve to the lowest index.
GaussPrediction predict_gauss(const GaussHead& head, const Vector& fp);

/// Closed-form k-means optimal centroids C = f_p(X)·Y·(YᵀY)⁻¹, i.e. the
/// per-class means of the mapped points. An empty class is an error.
CentroidSystem kmeans_centroid_update(const DenseMatrix& fp_matrix,
                                      const PartitionMatrix& labels);

/// Σ_j ‖f_p(x_j) − C_{·label(j)}‖², the squared Frobenius residual
/// ‖f_p(X)ᵀ − YCᵀ‖².
double tailoring_loss(const DenseMatrix& fp_matrix,
                      const PartitionMatrix& labels,
                      const DenseMatrix& centroids);

enum class CentroidRefresh : uint8_t { Once = 0, EveryEpoch = 1 };

struct TailorConfig {
  size_t epochs = 1;
  double learning_rate = 0.01;
  size_t batch_size = 32;
  CentroidRefresh refresh = CentroidRefresh::EveryEpoch;
  uint64_t seed = 0;
};

struct TailorResult {
  GaussHead head;
  /// Full-training-set tailoring loss sampled immediately after each
  /// centroid refresh; non-increasing when the descent steps behave.
  std::vector<double> refresh_losses;
  double final_loss = 0.0;
};

/// Alternates the closed-form centroid update with gradient steps on the
/// tailoring loss over the hidden layers. The final linear layer never
/// moves; Gauss predictions bypass it entirely.
TailorResult tailor_network(NetworkModel& model, const LabeledDataset& data,
                            const TailorConfig& config);

/// Empirical reachability gap δ_k = min over the given inputs of
/// ‖f_p(x) − C_{·k}‖, the training-set stand-in for the true infimum.
double reachability_gap(const NetworkModel& model, const DenseMatrix& inputs,
                        const GaussHead& head, uint32_t k);

/// Fraction of points whose Gauss prediction equals the label.
double gauss_accuracy(const NetworkModel& model, const GaussHead& head,
                      const LabeledDataset& data);

}  // namespace cnet
