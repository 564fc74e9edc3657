#include "dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "rng.hpp"

namespace cnet {

namespace {

constexpr uint32_t kImagesMagic = 0x00000803;
constexpr uint32_t kLabelsMagic = 0x00000801;

uint32_t read_u32_be(std::ifstream& in, const std::string& path) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) {
    fail(ErrorCode::Format, path + ": truncated header");
  }
  return (uint32_t(b[0]) << 24) | (uint32_t(b[1]) << 16) |
         (uint32_t(b[2]) << 8) | uint32_t(b[3]);
}

void write_u32_be(std::ofstream& out, uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v >> 24),
                        static_cast<unsigned char>(v >> 16),
                        static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::vector<unsigned char> read_payload(std::ifstream& in, size_t expected,
                                        const std::string& path) {
  std::vector<unsigned char> buf(expected);
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(expected));
  const size_t got = static_cast<size_t>(in.gcount());
  if (got != expected) {
    fail(ErrorCode::Format, path + ": truncated payload, expected " +
                                std::to_string(expected) + " bytes, got " +
                                std::to_string(got));
  }
  return buf;
}

}  // namespace

LabeledDataset::LabeledDataset(DenseMatrix features, PartitionMatrix labels,
                               DatasetMetadata meta)
    : features_(std::move(features)),
      labels_(std::move(labels)),
      meta_(std::move(meta)) {
  if (features_.cols() != labels_.size()) {
    fail(ErrorCode::DimensionMismatch,
         "feature column count " + std::to_string(features_.cols()) +
             " does not equal label count " + std::to_string(labels_.size()));
  }
  if (!features_.all_finite()) {
    fail(ErrorCode::Numeric, "dataset features contain non-finite values");
  }
}

LabeledDataset load_idx(const std::string& images_path,
                        const std::string& labels_path) {
  std::ifstream img(images_path, std::ios::binary);
  if (!img) fail(ErrorCode::Io, "cannot open " + images_path);
  std::ifstream lbl(labels_path, std::ios::binary);
  if (!lbl) fail(ErrorCode::Io, "cannot open " + labels_path);

  const uint32_t img_magic = read_u32_be(img, images_path);
  if (img_magic != kImagesMagic) {
    fail(ErrorCode::Format, images_path + ": bad magic " +
                                std::to_string(img_magic) +
                                ", expected 2051 (0x00000803)");
  }
  const uint32_t n_images = read_u32_be(img, images_path);
  const uint32_t rows = read_u32_be(img, images_path);
  const uint32_t cols = read_u32_be(img, images_path);

  const uint32_t lbl_magic = read_u32_be(lbl, labels_path);
  if (lbl_magic != kLabelsMagic) {
    fail(ErrorCode::Format, labels_path + ": bad magic " +
                                std::to_string(lbl_magic) +
                                ", expected 2049 (0x00000801)");
  }
  const uint32_t n_labels = read_u32_be(lbl, labels_path);

  if (n_images != n_labels) {
    fail(ErrorCode::Format, "image count " + std::to_string(n_images) +
                                " does not match label count " +
                                std::to_string(n_labels));
  }
  if (n_images == 0 || rows == 0 || cols == 0) {
    fail(ErrorCode::Format, images_path + ": empty image set");
  }

  const size_t pixels = static_cast<size_t>(rows) * cols;
  const auto raw = read_payload(img, pixels * n_images, images_path);
  const auto raw_labels = read_payload(lbl, n_images, labels_path);

  DenseMatrix features(pixels, n_images, 0.0);
  for (size_t j = 0; j < n_images; ++j) {
    double* fj = features.col(j);
    const unsigned char* src = raw.data() + j * pixels;
    for (size_t i = 0; i < pixels; ++i) fj[i] = double(src[i]) / 255.0;
  }

  std::vector<uint32_t> labels(raw_labels.begin(), raw_labels.end());
  const uint32_t classes =
      1 + *std::max_element(labels.begin(), labels.end());

  DatasetMetadata meta;
  meta.name = images_path;
  meta.normalization = {255.0, 0.0};
  meta.geometry = {rows, cols, 1};
  return LabeledDataset(std::move(features),
                        PartitionMatrix(std::move(labels), classes),
                        std::move(meta));
}

void write_idx(const LabeledDataset& dataset, const std::string& images_path,
               const std::string& labels_path) {
  const auto& geo = dataset.metadata().geometry;
  if (!geo.valid() || geo.channels != 1 ||
      geo.pixel_count() != dataset.dim()) {
    fail(ErrorCode::InvalidArgument,
         "write_idx needs single-channel image geometry matching the feature dim");
  }
  std::ofstream img(images_path, std::ios::binary);
  if (!img) fail(ErrorCode::Io, "cannot open " + images_path + " for writing");
  std::ofstream lbl(labels_path, std::ios::binary);
  if (!lbl) fail(ErrorCode::Io, "cannot open " + labels_path + " for writing");

  const auto& norm = dataset.metadata().normalization;
  const uint32_t count = static_cast<uint32_t>(dataset.count());

  write_u32_be(img, kImagesMagic);
  write_u32_be(img, count);
  write_u32_be(img, geo.height);
  write_u32_be(img, geo.width);
  std::vector<unsigned char> buf(dataset.dim());
  for (size_t j = 0; j < count; ++j) {
    const double* fj = dataset.features().col(j);
    for (size_t i = 0; i < buf.size(); ++i) {
      const double raw = denormalize_value(norm, fj[i]);
      const double clamped = std::min(255.0, std::max(0.0, std::round(raw)));
      buf[i] = static_cast<unsigned char>(clamped);
    }
    img.write(reinterpret_cast<const char*>(buf.data()),
              static_cast<std::streamsize>(buf.size()));
  }

  write_u32_be(lbl, kLabelsMagic);
  write_u32_be(lbl, count);
  for (size_t j = 0; j < count; ++j) {
    const unsigned char l = static_cast<unsigned char>(dataset.labels().label(j));
    lbl.write(reinterpret_cast<const char*>(&l), 1);
  }
  if (!img || !lbl) fail(ErrorCode::Io, "short write while saving IDX pair");
}

LabeledDataset synth_blobs(uint32_t classes, uint32_t per_class, uint32_t dim,
                           double separation, uint64_t seed) {
  if (classes == 0 || per_class == 0 || dim == 0) {
    fail(ErrorCode::InvalidArgument, "synth_blobs arguments must be positive");
  }
  DenseMatrix means(dim, classes, 0.0);
  for (uint32_t k = 0; k < classes; ++k) {
    if (dim == 1) {
      means(0, k) = separation * k;
    } else {
      const double angle = 2.0 * M_PI * k / classes;
      means(0, k) = separation * std::cos(angle);
      means(1, k) = separation * std::sin(angle);
    }
  }

  Rng rng(seed);
  const size_t m = static_cast<size_t>(classes) * per_class;
  DenseMatrix features(dim, m, 0.0);
  std::vector<uint32_t> labels(m);
  size_t j = 0;
  for (uint32_t k = 0; k < classes; ++k) {
    for (uint32_t p = 0; p < per_class; ++p, ++j) {
      double* fj = features.col(j);
      for (uint32_t i = 0; i < dim; ++i) {
        fj[i] = means(i, k) + rng.next_gaussian();
      }
      labels[j] = k;
    }
  }

  DatasetMetadata meta;
  char name[64];
  std::snprintf(name, sizeof(name), "blobs-c%u-p%u-d%u", classes, per_class, dim);
  meta.name = name;
  return LabeledDataset(std::move(features),
                        PartitionMatrix(std::move(labels), classes),
                        std::move(meta));
}

std::pair<LabeledDataset, LabeledDataset> split(const LabeledDataset& dataset,
                                                double fraction,
                                                uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    fail(ErrorCode::InvalidArgument, "split fraction must be in (0,1)");
  }
  const size_t m = dataset.count();
  const size_t train_m =
      static_cast<size_t>(std::llround(fraction * static_cast<double>(m)));
  if (train_m == 0 || train_m >= m) {
    fail(ErrorCode::InvalidArgument,
         "split produces an empty part (m=" + std::to_string(m) +
             ", fraction=" + std::to_string(fraction) + ")");
  }

  std::vector<size_t> order(m);
  std::iota(order.begin(), order.end(), size_t{0});
  Rng rng(seed);
  rng.shuffle(order);

  auto take = [&](size_t begin, size_t end) {
    DenseMatrix f(dataset.dim(), end - begin, 0.0);
    std::vector<uint32_t> l(end - begin);
    for (size_t j = begin; j < end; ++j) {
      const size_t src = order[j];
      const double* s = dataset.features().col(src);
      std::copy(s, s + dataset.dim(), f.col(j - begin));
      l[j - begin] = dataset.labels().label(src);
    }
    return LabeledDataset(std::move(f),
                          PartitionMatrix(std::move(l), dataset.classes()),
                          dataset.metadata());
  };
  return {take(0, train_m), take(train_m, m)};
}

double normalize_value(const NormalizationRecord& n, double raw) {
  return (raw - n.offset) / n.scale;
}

double denormalize_value(const NormalizationRecord& n, double stored) {
  return stored * n.scale + n.offset;
}

}  // namespace cnet
