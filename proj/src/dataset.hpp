#pragma once

#include <cstdint>
#include <string>
#include <utility>

#include "matrix.hpp"
#include "partition.hpp"

namespace cnet {

/// Affine record mapping raw values to stored features:
/// stored = (raw − offset) / scale.
struct NormalizationRecord {
  double scale = 1.0;
  double offset = 0.0;
};

struct ImageGeometry {
  uint32_t height = 0;
  uint32_t width = 0;
  uint32_t channels = 0;
  bool valid() const { return height > 0 && width > 0 && channels > 0; }
  size_t pixel_count() const {
    return static_cast<size_t>(height) * width * channels;
  }
};

struct DatasetMetadata {
  std::string name;
  NormalizationRecord normalization;
  ImageGeometry geometry;  // zeroed when the data is not image-shaped
};

/// Columns of `features` are points; `labels` is the matching partition.
class LabeledDataset {
 public:
  LabeledDataset(DenseMatrix features, PartitionMatrix labels,
                 DatasetMetadata meta);

  const DenseMatrix& features() const { return features_; }
  const PartitionMatrix& labels() const { return labels_; }
  const DatasetMetadata& metadata() const { return meta_; }

  size_t count() const { return features_.cols(); }
  size_t dim() const { return features_.rows(); }
  uint32_t classes() const { return labels_.classes(); }

 private:
  DenseMatrix features_;
  PartitionMatrix labels_;
  DatasetMetadata meta_;
};

/// Parses the big-endian IDX pair (images magic 0x00000803, labels magic
/// 0x00000801); pixels land in [0,1] as byte/255 with the geometry and the
/// normalization recorded in the metadata.
LabeledDataset load_idx(const std::string& images_path,
                        const std::string& labels_path);

/// Writes the dataset back to the IDX pair; features are de-normalized and
/// rounded to bytes, so load_idx → write_idx reproduces files byte-exactly.
void write_idx(const LabeledDataset& dataset, const std::string& images_path,
               const std::string& labels_path);

/// Seeded isotropic Gaussian clusters with unit variance. Means are spread
/// at distance `separation` from the origin: evenly around a circle in the
/// first two coordinates for dim ≥ 2, along the line for dim == 1.
LabeledDataset synth_blobs(uint32_t classes, uint32_t per_class, uint32_t dim,
                           double separation, uint64_t seed);

/// Seeded shuffle split into disjoint, exhaustive train/test parts.
std::pair<LabeledDataset, LabeledDataset> split(const LabeledDataset& dataset,
                                                double fraction,
                                                uint64_t seed);

double normalize_value(const NormalizationRecord& n, double raw);
double denormalize_value(const NormalizationRecord& n, double stored);

}  // namespace cnet
