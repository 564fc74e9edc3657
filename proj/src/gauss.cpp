#include "gauss.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "linalg.hpp"
#include "rng.hpp"

namespace cnet {

GaussHead make_gauss_head(CentroidSystem centroids) {
  GaussHead head;
  head.outlier_threshold = 1.0 / static_cast<double>(centroids.centroids.cols());
  head.centroids = std::move(centroids);
  return head;
}

Vector gauss_confidence(const GaussHead& head, const Vector& fp) {
  const DenseMatrix& c = head.centroids.centroids;
  if (fp.size() != c.rows()) {
    fail(ErrorCode::DimensionMismatch,
         "penultimate dimension " + std::to_string(fp.size()) +
             " does not match centroid dimension " + std::to_string(c.rows()));
  }
  Vector kappa(c.cols());
  for (size_t k = 0; k < c.cols(); ++k) {
    kappa[k] = std::exp(-squared_distance(fp.data(), c.col(k), c.rows()));
  }
  return kappa;
}

GaussPrediction predict_gauss(const GaussHead& head, const Vector& fp) {
  const Vector kappa = gauss_confidence(head, fp);
  size_t best = 0;
  for (size_t k = 1; k < kappa.size(); ++k) {
    if (kappa[k] > kappa[best]) best = k;
  }
  GaussPrediction out;
  out.cls = static_cast<uint32_t>(best);
  out.confidence = kappa[best];
  out.outlier = kappa[best] < head.outlier_threshold;
  return out;
}

CentroidSystem kmeans_centroid_update(const DenseMatrix& fp_matrix,
                                      const PartitionMatrix& labels) {
  if (fp_matrix.cols() != labels.size()) {
    fail(ErrorCode::DimensionMismatch,
         "point count does not match label count");
  }
  const uint32_t classes = labels.classes();
  const std::vector<size_t> counts = labels.class_counts();
  for (uint32_t k = 0; k < classes; ++k) {
    if (counts[k] == 0) {
      fail(ErrorCode::EmptyClass,
           "class " + std::to_string(k) +
               " has no members; the centroid update is undefined");
    }
  }
  DenseMatrix centroids(fp_matrix.rows(), classes, 0.0);
  for (size_t j = 0; j < fp_matrix.cols(); ++j) {
    const double* fj = fp_matrix.col(j);
    double* ck = centroids.col(labels.label(j));
    for (size_t i = 0; i < fp_matrix.rows(); ++i) ck[i] += fj[i];
  }
  for (uint32_t k = 0; k < classes; ++k) {
    double* ck = centroids.col(k);
    const double inv = 1.0 / static_cast<double>(counts[k]);
    for (size_t i = 0; i < fp_matrix.rows(); ++i) ck[i] *= inv;
  }
  CentroidSystem system;
  system.centroids = std::move(centroids);
  system.provenance = CentroidProvenance::KMeansOptimal;
  return system;
}

double tailoring_loss(const DenseMatrix& fp_matrix,
                      const PartitionMatrix& labels,
                      const DenseMatrix& centroids) {
  if (fp_matrix.cols() != labels.size()) {
    fail(ErrorCode::DimensionMismatch,
         "point count does not match label count");
  }
  if (fp_matrix.rows() != centroids.rows() ||
      labels.classes() > centroids.cols()) {
    fail(ErrorCode::DimensionMismatch,
         "centroid matrix shape does not match points/classes");
  }
  double total = 0.0;
  for (size_t j = 0; j < fp_matrix.cols(); ++j) {
    total += squared_distance(fp_matrix.col(j),
                              centroids.col(labels.label(j)),
                              fp_matrix.rows());
  }
  return total;
}

TailorResult tailor_network(NetworkModel& model, const LabeledDataset& data,
                            const TailorConfig& config) {
  if (config.epochs == 0 || config.batch_size == 0 ||
      !(config.learning_rate > 0.0)) {
    fail(ErrorCode::InvalidArgument,
         "tailoring needs positive epochs, batch size and learning rate");
  }
  const DenseMatrix inputs = prepared_inputs(model, data.features());
  const size_t m = inputs.cols();

  TailorResult result;
  CentroidSystem centroids;

  Rng rng(config.seed);
  std::vector<size_t> order(m);
  std::iota(order.begin(), order.end(), size_t{0});

  for (size_t epoch = 0; epoch < config.epochs; ++epoch) {
    if (epoch == 0 || config.refresh == CentroidRefresh::EveryEpoch) {
      const DenseMatrix fp = forward_penultimate(model, inputs);
      centroids = kmeans_centroid_update(fp, data.labels());
      result.refresh_losses.push_back(
          tailoring_loss(fp, data.labels(), centroids.centroids));
    }

    rng.shuffle(order);
    for (size_t begin = 0; begin < m; begin += config.batch_size) {
      const size_t end = std::min(m, begin + config.batch_size);
      const size_t bsz = end - begin;
      DenseMatrix batch(inputs.rows(), bsz, 0.0);
      std::vector<uint32_t> batch_labels(bsz);
      for (size_t j = begin; j < end; ++j) {
        const double* src = inputs.col(order[j]);
        std::copy(src, src + inputs.rows(), batch.col(j - begin));
        batch_labels[j - begin] = data.labels().label(order[j]);
      }
      PartitionMatrix targets(std::move(batch_labels), data.classes());
      LossSpec loss{LossKind::Tailoring, &centroids.centroids};

      const double batch_loss = loss_value(model, batch, targets, loss);
      if (!std::isfinite(batch_loss)) {
        fail(ErrorCode::Numeric,
             "non-finite tailoring loss at epoch " + std::to_string(epoch));
      }

      std::vector<DenseMatrix> grads = backward(model, batch, targets, loss);
      const double step = config.learning_rate / static_cast<double>(bsz);
      for (size_t l = 0; l + 1 < grads.size(); ++l) {
        auto& w = model.layers()[l].weight.data();
        const auto& g = grads[l].data();
        for (size_t i = 0; i < w.size(); ++i) w[i] -= step * g[i];
      }
    }
  }

  // Final head over the refined map; a last refresh so that the head
  // carries the exact minimizer for the final weights.
  const DenseMatrix fp = forward_penultimate(model, inputs);
  centroids = kmeans_centroid_update(fp, data.labels());
  result.final_loss = tailoring_loss(fp, data.labels(), centroids.centroids);
  result.refresh_losses.push_back(result.final_loss);
  result.head = make_gauss_head(std::move(centroids));
  return result;
}

double reachability_gap(const NetworkModel& model, const DenseMatrix& inputs,
                        const GaussHead& head, uint32_t k) {
  const DenseMatrix& c = head.centroids.centroids;
  if (k >= c.cols()) fail(ErrorCode::InvalidArgument, "class index out of range");
  const DenseMatrix fp = forward_penultimate(model, inputs);
  double best = HUGE_VAL;
  for (size_t j = 0; j < fp.cols(); ++j) {
    best = std::min(best, squared_distance(fp.col(j), c.col(k), fp.rows()));
  }
  return std::sqrt(best);
}

double gauss_accuracy(const NetworkModel& model, const GaussHead& head,
                      const LabeledDataset& data) {
  const DenseMatrix inputs = prepared_inputs(model, data.features());
  const DenseMatrix fp = forward_penultimate(model, inputs);
  const DenseMatrix& c = head.centroids.centroids;
  size_t hits = 0;
  for (size_t j = 0; j < fp.cols(); ++j) {
    size_t best = 0;
    double best_dist = squared_distance(fp.col(j), c.col(0), fp.rows());
    for (size_t k = 1; k < c.cols(); ++k) {
      const double dist = squared_distance(fp.col(j), c.col(k), fp.rows());
      if (dist < best_dist) {
        best_dist = dist;
        best = k;
      }
    }
    if (best == data.labels().label(j)) ++hits;
  }
  return data.count() == 0 ? 0.0
                           : static_cast<double>(hits) /
                                 static_cast<double>(data.count());
}

}  // namespace cnet
