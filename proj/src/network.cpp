#include "network.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rng.hpp"

namespace cnet {

namespace {

void apply_activation(ActivationKind kind, DenseMatrix& m) {
  if (kind == ActivationKind::ReLU) {
    for (double& x : m.data()) x = x > 0.0 ? x : 0.0;
  }
}

void apply_activation_derivative(ActivationKind kind, const DenseMatrix& pre,
                                 DenseMatrix& delta) {
  if (kind == ActivationKind::ReLU) {
    const auto& p = pre.data();
    auto& d = delta.data();
    for (size_t i = 0; i < d.size(); ++i) {
      if (p[i] <= 0.0) d[i] = 0.0;
    }
  }
}

DenseMatrix column_matrix(const Vector& x) {
  return DenseMatrix(x.size(), 1, x);
}

}  // namespace

NetworkModel::NetworkModel(const std::vector<size_t>& dims, uint64_t seed) {
  if (dims.size() < 2) {
    fail(ErrorCode::InvalidArgument, "a network needs at least two dimensions");
  }
  Rng rng(seed);
  layers_.reserve(dims.size() - 1);
  for (size_t l = 0; l + 1 < dims.size(); ++l) {
    Layer layer;
    layer.weight = DenseMatrix(dims[l], dims[l + 1], 0.0);
    const double bound = 1.0 / std::sqrt(static_cast<double>(dims[l]));
    for (double& w : layer.weight.data()) w = rng.uniform(-bound, bound);
    layer.activation = (l + 2 < dims.size()) ? ActivationKind::ReLU
                                             : ActivationKind::Identity;
    layers_.push_back(std::move(layer));
  }
  validate();
}

NetworkModel::NetworkModel(std::vector<Layer> layers)
    : layers_(std::move(layers)) {
  validate();
}

void NetworkModel::validate() const {
  if (layers_.empty()) {
    fail(ErrorCode::InvalidArgument, "a network needs at least one layer");
  }
  for (size_t l = 0; l + 1 < layers_.size(); ++l) {
    if (layers_[l].weight.cols() != layers_[l + 1].weight.rows()) {
      fail(ErrorCode::DimensionMismatch,
           "layer " + std::to_string(l) + " output " +
               std::to_string(layers_[l].weight.cols()) +
               " does not chain into layer " + std::to_string(l + 1) +
               " input " + std::to_string(layers_[l + 1].weight.rows()));
    }
  }
  if (layers_.back().activation != ActivationKind::Identity) {
    fail(ErrorCode::InvalidArgument,
         "the final layer must have identity activation");
  }
  if (penultimate_dim() + 1 < class_count()) {
    fail(ErrorCode::InvalidArgument,
         "penultimate dimension " + std::to_string(penultimate_dim()) +
             " must be at least class count minus one (" +
             std::to_string(class_count()) + " classes)");
  }
}

GradientTape forward_trace(const NetworkModel& model,
                           const DenseMatrix& batch) {
  if (batch.rows() != model.input_dim()) {
    fail(ErrorCode::DimensionMismatch,
         "input dimension " + std::to_string(batch.rows()) +
             " does not match model input " +
             std::to_string(model.input_dim()));
  }
  GradientTape tape;
  tape.input = batch;
  const DenseMatrix* current = &tape.input;
  for (const Layer& layer : model.layers()) {
    DenseMatrix pre = matmul_tn(layer.weight, *current);
    DenseMatrix act = pre;
    apply_activation(layer.activation, act);
    tape.pre.push_back(std::move(pre));
    tape.act.push_back(std::move(act));
    current = &tape.act.back();
  }
  return tape;
}

DenseMatrix forward_penultimate(const NetworkModel& model,
                                const DenseMatrix& batch) {
  if (batch.rows() != model.input_dim()) {
    fail(ErrorCode::DimensionMismatch,
         "input dimension " + std::to_string(batch.rows()) +
             " does not match model input " +
             std::to_string(model.input_dim()));
  }
  DenseMatrix current = batch;
  for (size_t l = 0; l + 1 < model.layer_count(); ++l) {
    const Layer& layer = model.layers()[l];
    DenseMatrix next = matmul_tn(layer.weight, current);
    apply_activation(layer.activation, next);
    current = std::move(next);
  }
  return current;
}

Vector forward_penultimate(const NetworkModel& model, const Vector& x) {
  return forward_penultimate(model, column_matrix(x)).column(0);
}

DenseMatrix logits(const NetworkModel& model, const DenseMatrix& batch) {
  DenseMatrix fp = forward_penultimate(model, batch);
  return matmul_tn(model.final_weight(), fp);
}

Vector logits(const NetworkModel& model, const Vector& x) {
  return logits(model, column_matrix(x)).column(0);
}

Vector softmax(const Vector& z) {
  if (z.empty()) return {};
  const double zmax = *std::max_element(z.begin(), z.end());
  Vector out(z.size());
  double sum = 0.0;
  for (size_t i = 0; i < z.size(); ++i) {
    out[i] = std::exp(z[i] - zmax);
    sum += out[i];
  }
  for (double& v : out) v /= sum;
  return out;
}

namespace {

void check_loss_inputs(const NetworkModel& model, const DenseMatrix& batch,
                       const PartitionMatrix& targets, const LossSpec& loss) {
  if (batch.cols() != targets.size()) {
    fail(ErrorCode::DimensionMismatch,
         "batch has " + std::to_string(batch.cols()) + " columns but " +
             std::to_string(targets.size()) + " targets");
  }
  if (loss.kind == LossKind::CrossEntropy &&
      targets.classes() != model.class_count()) {
    fail(ErrorCode::DimensionMismatch,
         "target class count does not match the model");
  }
  if (loss.kind == LossKind::Tailoring) {
    if (loss.centroids == nullptr) {
      fail(ErrorCode::InvalidArgument,
           "tailoring loss needs a centroid matrix");
    }
    if (loss.centroids->rows() != model.penultimate_dim() ||
        loss.centroids->cols() < targets.classes()) {
      fail(ErrorCode::DimensionMismatch,
           "centroid matrix shape does not match penultimate dim/classes");
    }
  }
}

/// Softmax over each column of a pre-activation matrix, in place.
void softmax_columns(DenseMatrix& z) {
  for (size_t j = 0; j < z.cols(); ++j) {
    double* col = z.col(j);
    double zmax = col[0];
    for (size_t i = 1; i < z.rows(); ++i) zmax = std::max(zmax, col[i]);
    double sum = 0.0;
    for (size_t i = 0; i < z.rows(); ++i) {
      col[i] = std::exp(col[i] - zmax);
      sum += col[i];
    }
    for (size_t i = 0; i < z.rows(); ++i) col[i] /= sum;
  }
}

}  // namespace

double loss_value(const NetworkModel& model, const DenseMatrix& batch,
                  const PartitionMatrix& targets, const LossSpec& loss) {
  check_loss_inputs(model, batch, targets, loss);
  const size_t m = batch.cols();
  if (loss.kind == LossKind::CrossEntropy) {
    DenseMatrix z = logits(model, batch);
    double total = 0.0;
    for (size_t j = 0; j < m; ++j) {
      const double* col = z.col(j);
      double zmax = col[0];
      for (size_t i = 1; i < z.rows(); ++i) zmax = std::max(zmax, col[i]);
      double sum = 0.0;
      for (size_t i = 0; i < z.rows(); ++i) sum += std::exp(col[i] - zmax);
      total += std::log(sum) - (col[targets.label(j)] - zmax);
    }
    return total / static_cast<double>(m);
  }
  DenseMatrix fp = forward_penultimate(model, batch);
  double total = 0.0;
  for (size_t j = 0; j < m; ++j) {
    total += squared_distance(fp.col(j), loss.centroids->col(targets.label(j)),
                              fp.rows());
  }
  return total;
}

std::vector<DenseMatrix> backward(const NetworkModel& model,
                                  const DenseMatrix& batch,
                                  const PartitionMatrix& targets,
                                  const LossSpec& loss) {
  check_loss_inputs(model, batch, targets, loss);
  const size_t layer_count = model.layer_count();
  const size_t m = batch.cols();
  GradientTape tape = forward_trace(model, batch);

  std::vector<DenseMatrix> grads(layer_count);

  // Index of the deepest layer the loss attaches to, and the delta at its
  // activation output.
  size_t top;
  DenseMatrix delta;
  if (loss.kind == LossKind::CrossEntropy) {
    top = layer_count - 1;
    delta = tape.pre[top];
    softmax_columns(delta);
    const double inv_m = 1.0 / static_cast<double>(m);
    for (size_t j = 0; j < m; ++j) {
      delta(targets.label(j), j) -= 1.0;
      double* col = delta.col(j);
      for (size_t i = 0; i < delta.rows(); ++i) col[i] *= inv_m;
    }
  } else {
    grads[layer_count - 1] =
        DenseMatrix(model.final_weight().rows(), model.final_weight().cols(), 0.0);
    if (layer_count == 1) {
      // f_p is the identity here; no weight participates in the loss.
      return grads;
    }
    top = layer_count - 2;
    const DenseMatrix& fp = tape.act[top];
    delta = DenseMatrix(fp.rows(), m, 0.0);
    for (size_t j = 0; j < m; ++j) {
      const double* fj = fp.col(j);
      const double* cj = loss.centroids->col(targets.label(j));
      double* dj = delta.col(j);
      for (size_t i = 0; i < fp.rows(); ++i) dj[i] = 2.0 * (fj[i] - cj[i]);
    }
    apply_activation_derivative(model.layers()[top].activation, tape.pre[top],
                                delta);
  }

  for (size_t l = top + 1; l-- > 0;) {
    const DenseMatrix& below = (l == 0) ? tape.input : tape.act[l - 1];
    grads[l] = matmul_nt(below, delta);
    if (l > 0) {
      DenseMatrix next = matmul(model.layers()[l].weight, delta);
      apply_activation_derivative(model.layers()[l - 1].activation,
                                  tape.pre[l - 1], next);
      delta = std::move(next);
    }
  }
  return grads;
}

namespace {

DenseMatrix gather_columns(const DenseMatrix& src,
                           const std::vector<size_t>& order, size_t begin,
                           size_t end) {
  DenseMatrix out(src.rows(), end - begin, 0.0);
  for (size_t j = begin; j < end; ++j) {
    const double* s = src.col(order[j]);
    std::copy(s, s + src.rows(), out.col(j - begin));
  }
  return out;
}

}  // namespace

TrainTelemetry train(NetworkModel& model, const LabeledDataset& data,
                     const TrainConfig& config) {
  if (config.batch_size == 0) {
    fail(ErrorCode::InvalidArgument, "batch size must be positive");
  }
  if (data.classes() > model.class_count()) {
    fail(ErrorCode::DimensionMismatch,
         "dataset has more classes than the model outputs");
  }
  TrainTelemetry telemetry;
  if (config.epochs == 0) return telemetry;

  const DenseMatrix inputs = prepared_inputs(model, data.features());
  const size_t m = inputs.cols();
  Rng rng(config.seed);
  std::vector<size_t> order(m);
  std::iota(order.begin(), order.end(), size_t{0});

  std::vector<DenseMatrix> velocity;
  if (config.momentum != 0.0) {
    for (const Layer& layer : model.layers()) {
      velocity.emplace_back(layer.weight.rows(), layer.weight.cols(), 0.0);
    }
  }

  for (size_t epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    size_t batch_index = 0;
    for (size_t begin = 0; begin < m; begin += config.batch_size, ++batch_index) {
      const size_t end = std::min(m, begin + config.batch_size);
      DenseMatrix batch = gather_columns(inputs, order, begin, end);
      std::vector<uint32_t> batch_labels(end - begin);
      for (size_t j = begin; j < end; ++j) {
        batch_labels[j - begin] = data.labels().label(order[j]);
      }
      PartitionMatrix targets(std::move(batch_labels), model.class_count());

      LossSpec loss{LossKind::CrossEntropy, nullptr};
      const double batch_loss = loss_value(model, batch, targets, loss);
      if (!std::isfinite(batch_loss)) {
        fail(ErrorCode::Numeric,
             "non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                 std::to_string(batch_index));
      }
      epoch_loss += batch_loss * static_cast<double>(end - begin);

      std::vector<DenseMatrix> grads = backward(model, batch, targets, loss);
      for (size_t l = 0; l < grads.size(); ++l) {
        auto& w = model.layers()[l].weight.data();
        const auto& g = grads[l].data();
        if (config.momentum != 0.0) {
          auto& v = velocity[l].data();
          for (size_t i = 0; i < w.size(); ++i) {
            v[i] = config.momentum * v[i] - config.learning_rate * g[i];
            w[i] += v[i];
          }
        } else {
          for (size_t i = 0; i < w.size(); ++i) {
            w[i] -= config.learning_rate * g[i];
          }
        }
      }
    }
    telemetry.epoch_losses.push_back(epoch_loss / static_cast<double>(m));
  }
  return telemetry;
}

double lipschitz_upper_bound(const NetworkModel& model, double tol,
                             int max_iter) {
  double bound = 1.0;
  for (const Layer& layer : model.layers()) {
    bound *= activation_modulus(layer.activation) *
             spectral_norm(layer.weight, tol, max_iter);
  }
  return bound;
}

double penultimate_lipschitz_upper_bound(const NetworkModel& model, double tol,
                                         int max_iter) {
  double bound = 1.0;
  for (size_t l = 0; l + 1 < model.layer_count(); ++l) {
    const Layer& layer = model.layers()[l];
    bound *= activation_modulus(layer.activation) *
             spectral_norm(layer.weight, tol, max_iter);
  }
  return bound;
}

namespace {

Vector input_gradient(const NetworkModel& model, const Vector& x,
                      const LossSpec& loss, uint32_t label,
                      const Vector* target) {
  GradientTape tape = forward_trace(model, column_matrix(x));
  const size_t layer_count = model.layer_count();

  size_t top;
  DenseMatrix delta;
  if (loss.kind == LossKind::CrossEntropy) {
    top = layer_count - 1;
    delta = tape.pre[top];
    softmax_columns(delta);
    delta(label, 0) -= 1.0;
  } else {
    if (layer_count == 1) return Vector(x.size(), 0.0);
    top = layer_count - 2;
    const DenseMatrix& fp = tape.act[top];
    delta = DenseMatrix(fp.rows(), 1, 0.0);
    for (size_t i = 0; i < fp.rows(); ++i) {
      delta(i, 0) = 2.0 * (fp(i, 0) - (*target)[i]);
    }
    apply_activation_derivative(model.layers()[top].activation, tape.pre[top],
                                delta);
  }

  for (size_t l = top; l-- > 0;) {
    DenseMatrix next = matmul(model.layers()[l + 1].weight, delta);
    apply_activation_derivative(model.layers()[l].activation, tape.pre[l],
                                next);
    delta = std::move(next);
  }
  DenseMatrix g = matmul(model.layers()[0].weight, delta);
  return g.column(0);
}

}  // namespace

Vector input_gradient_cross_entropy(const NetworkModel& model, const Vector& x,
                                    uint32_t label) {
  if (label >= model.class_count()) {
    fail(ErrorCode::InvalidArgument, "label out of range");
  }
  LossSpec loss{LossKind::CrossEntropy, nullptr};
  return input_gradient(model, x, loss, label, nullptr);
}

Vector input_gradient_distance(const NetworkModel& model, const Vector& x,
                               const Vector& target) {
  if (target.size() != model.penultimate_dim()) {
    fail(ErrorCode::DimensionMismatch,
         "target dimension does not match the penultimate layer");
  }
  LossSpec loss{LossKind::Tailoring, nullptr};
  return input_gradient(model, x, loss, 0, &target);
}

Vector augment_point(const Vector& x) {
  Vector out = x;
  out.push_back(1.0);
  return out;
}

DenseMatrix augment_columns(const DenseMatrix& m) {
  DenseMatrix out(m.rows() + 1, m.cols(), 0.0);
  for (size_t j = 0; j < m.cols(); ++j) {
    const double* src = m.col(j);
    double* dst = out.col(j);
    std::copy(src, src + m.rows(), dst);
    dst[m.rows()] = 1.0;
  }
  return out;
}

DenseMatrix prepared_inputs(const NetworkModel& model, const DenseMatrix& raw) {
  if (raw.rows() == model.input_dim()) return raw;
  if (raw.rows() + 1 == model.input_dim()) return augment_columns(raw);
  fail(ErrorCode::DimensionMismatch,
       "feature dimension " + std::to_string(raw.rows()) +
           " matches neither the model input " +
           std::to_string(model.input_dim()) + " nor its bias-lifted form");
}

Vector prepared_point(const NetworkModel& model, const Vector& raw) {
  if (raw.size() == model.input_dim()) return raw;
  if (raw.size() + 1 == model.input_dim()) return augment_point(raw);
  fail(ErrorCode::DimensionMismatch,
       "point dimension " + std::to_string(raw.size()) +
           " matches neither the model input " +
           std::to_string(model.input_dim()) + " nor its bias-lifted form");
}

double softmax_accuracy(const NetworkModel& model, const LabeledDataset& data) {
  const DenseMatrix inputs = prepared_inputs(model, data.features());
  const DenseMatrix z = logits(model, inputs);
  size_t hits = 0;
  for (size_t j = 0; j < z.cols(); ++j) {
    const double* col = z.col(j);
    size_t best = 0;
    for (size_t i = 1; i < z.rows(); ++i) {
      if (col[i] > col[best]) best = i;
    }
    if (best == data.labels().label(j)) ++hits;
  }
  return data.count() == 0 ? 0.0
                           : static_cast<double>(hits) /
                                 static_cast<double>(data.count());
}

}  // namespace cnet
