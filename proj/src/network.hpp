#pragma once

#include <cstdint>
#include <vector>

#include "dataset.hpp"
#include "linalg.hpp"
#include "matrix.hpp"
#include "partition.hpp"

namespace cnet {

enum class ActivationKind : uint8_t { ReLU = 0, Identity = 1 };

/// Every supported activation is 1-Lipschitz; the layer-product bound
/// below relies on that.
inline double activation_modulus(ActivationKind) { return 1.0; }

/// One linear layer. `weight` is in×out and acts as a ↦ act(weightᵀ·a), so
/// column k of the final layer is the class-k direction.
struct Layer {
  DenseMatrix weight;
  ActivationKind activation = ActivationKind::Identity;
};

/// Feedforward network: all layers except the last form the penultimate map
/// f_p, the last layer is linear with identity activation. There are no bias
/// vectors anywhere; affine behaviour comes from lifting the input by one
/// constant-1 feature (see prepared_inputs).
class NetworkModel {
 public:
  /// dims = {input, hidden..., classes}; hidden activations ReLU, final
  /// identity; weights uniform in ±1/sqrt(fan_in) from the seed.
  NetworkModel(const std::vector<size_t>& dims, uint64_t seed);
  explicit NetworkModel(std::vector<Layer> layers);

  size_t layer_count() const { return layers_.size(); }
  size_t input_dim() const { return layers_.front().weight.rows(); }
  size_t class_count() const { return layers_.back().weight.cols(); }

  /// Output dimension of f_p: the next-to-last layer width, or the input
  /// dimension for single-layer models (f_p is then the identity).
  size_t penultimate_dim() const {
    return layers_.size() >= 2 ? layers_[layers_.size() - 2].weight.cols()
                               : input_dim();
  }

  const std::vector<Layer>& layers() const { return layers_; }
  std::vector<Layer>& layers() { return layers_; }
  const DenseMatrix& final_weight() const { return layers_.back().weight; }

 private:
  void validate() const;
  std::vector<Layer> layers_;
};

/// Cached activations from one forward pass over a batch; feeds backward().
struct GradientTape {
  DenseMatrix input;
  std::vector<DenseMatrix> pre;
  std::vector<DenseMatrix> act;
};

GradientTape forward_trace(const NetworkModel& model, const DenseMatrix& batch);

Vector forward_penultimate(const NetworkModel& model, const Vector& x);
DenseMatrix forward_penultimate(const NetworkModel& model,
                                const DenseMatrix& batch);
Vector logits(const NetworkModel& model, const Vector& x);
DenseMatrix logits(const NetworkModel& model, const DenseMatrix& batch);

/// Probability vector with max-subtraction; entries in (0,1], sum 1.
Vector softmax(const Vector& z);

enum class LossKind : uint8_t { CrossEntropy, Tailoring };

/// Tailoring needs the d×c centroid matrix the penultimate outputs are
/// pulled toward; CrossEntropy ignores it.
struct LossSpec {
  LossKind kind = LossKind::CrossEntropy;
  const DenseMatrix* centroids = nullptr;
};

/// Batch loss under the pinned conventions: CrossEntropy is the mean
/// per-point −log softmax(logits)[label]; Tailoring is the summed squared
/// distance of penultimate outputs to their class centroid.
double loss_value(const NetworkModel& model, const DenseMatrix& batch,
                  const PartitionMatrix& targets, const LossSpec& loss);

/// Exact reverse-mode gradient of loss_value with respect to every layer
/// weight. The Tailoring loss does not touch the final layer, whose gradient
/// comes back zero.
std::vector<DenseMatrix> backward(const NetworkModel& model,
                                  const DenseMatrix& batch,
                                  const PartitionMatrix& targets,
                                  const LossSpec& loss);

struct TrainConfig {
  size_t epochs = 0;
  size_t batch_size = 32;
  double learning_rate = 0.1;
  double momentum = 0.0;
  uint64_t seed = 0;
};

struct TrainTelemetry {
  std::vector<double> epoch_losses;
};

/// Mini-batch SGD on cross-entropy. Reproducible: fixed shuffles from the
/// config seed, fixed batch order, deterministic accumulation.
TrainTelemetry train(NetworkModel& model, const LabeledDataset& data,
                     const TrainConfig& config);

/// Product of layer spectral norms over all layers: an upper bound on the
/// Lipschitz modulus of both x ↦ logits and the softmax output (exact
/// computation is intractable; this is only a bound).
double lipschitz_upper_bound(const NetworkModel& model, double tol = 1e-10,
                             int max_iter = 10000);

/// Same product excluding the final layer: an upper bound on L_p, the
/// modulus of f_p alone.
double penultimate_lipschitz_upper_bound(const NetworkModel& model,
                                         double tol = 1e-10,
                                         int max_iter = 10000);

/// ∇ₓ of the single-point cross-entropy at `label`.
Vector input_gradient_cross_entropy(const NetworkModel& model, const Vector& x,
                                    uint32_t label);

/// ∇ₓ of ‖f_p(x) − target‖².
Vector input_gradient_distance(const NetworkModel& model, const Vector& x,
                               const Vector& target);

Vector augment_point(const Vector& x);
DenseMatrix augment_columns(const DenseMatrix& m);

/// Model-space view of raw features: identity when dimensions already
/// match, bias lift (constant-1 row appended) when the model expects exactly
/// one more input, error otherwise.
DenseMatrix prepared_inputs(const NetworkModel& model, const DenseMatrix& raw);
Vector prepared_point(const NetworkModel& model, const Vector& raw);

/// Fraction of points whose argmax logit equals the label.
double softmax_accuracy(const NetworkModel& model, const LabeledDataset& data);

}  // namespace cnet
