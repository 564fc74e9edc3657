#include "serialize.hpp"

#include <cstring>
#include <fstream>

namespace cnet {

namespace {

constexpr uint32_t kFormatVersion = 1;

void write_bytes(std::ofstream& out, const void* p, size_t n) {
  out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

void write_u32_le(std::ofstream& out, uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v),
                        static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16),
                        static_cast<unsigned char>(v >> 24)};
  write_bytes(out, b, 4);
}

void write_f64_le(std::ofstream& out, double x) {
  uint64_t bits;
  std::memcpy(&bits, &x, 8);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
  write_bytes(out, b, 8);
}

void read_bytes(std::ifstream& in, void* p, size_t n, const std::string& path) {
  if (!in.read(static_cast<char*>(p), static_cast<std::streamsize>(n))) {
    fail(ErrorCode::Format, path + ": truncated container");
  }
}

uint32_t read_u32_le(std::ifstream& in, const std::string& path) {
  unsigned char b[4];
  read_bytes(in, b, 4, path);
  return uint32_t(b[0]) | (uint32_t(b[1]) << 8) | (uint32_t(b[2]) << 16) |
         (uint32_t(b[3]) << 24);
}

double read_f64_le(std::ifstream& in, const std::string& path) {
  unsigned char b[8];
  read_bytes(in, b, 8, path);
  uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= uint64_t(b[i]) << (8 * i);
  double x;
  std::memcpy(&x, &bits, 8);
  return x;
}

void expect_magic(std::ifstream& in, const char* magic,
                  const std::string& path) {
  char got[4];
  read_bytes(in, got, 4, path);
  if (std::memcmp(got, magic, 4) != 0) {
    fail(ErrorCode::Format,
         path + ": bad magic, expected \"" + std::string(magic, 4) + "\"");
  }
}

void expect_version(std::ifstream& in, const std::string& path) {
  const uint32_t version = read_u32_le(in, path);
  if (version != kFormatVersion) {
    fail(ErrorCode::Format, path + ": unsupported format version " +
                                std::to_string(version));
  }
}

void write_matrix_block(std::ofstream& out, const DenseMatrix& m) {
  write_u32_le(out, static_cast<uint32_t>(m.rows()));
  write_u32_le(out, static_cast<uint32_t>(m.cols()));
  for (double x : m.data()) write_f64_le(out, x);
}

DenseMatrix read_matrix_block(std::ifstream& in, const std::string& path) {
  const uint32_t rows = read_u32_le(in, path);
  const uint32_t cols = read_u32_le(in, path);
  if (rows == 0 || cols == 0) {
    fail(ErrorCode::Format, path + ": zero matrix dimension");
  }
  std::vector<double> data(static_cast<size_t>(rows) * cols);
  for (double& x : data) x = read_f64_le(in, path);
  return DenseMatrix(rows, cols, std::move(data));
}

uint8_t read_u8(std::ifstream& in, const std::string& path) {
  unsigned char b;
  read_bytes(in, &b, 1, path);
  return b;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot open " + path + " for writing");
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open " + path);
  return in;
}

void write_centroid_block(std::ofstream& out, const CentroidSystem& system) {
  out.write("CNCS", 4);
  write_u32_le(out, kFormatVersion);
  write_matrix_block(out, system.centroids);
  const uint8_t provenance = static_cast<uint8_t>(system.provenance);
  write_bytes(out, &provenance, 1);
  const uint8_t has_shift = system.shift.has_value() ? 1 : 0;
  write_bytes(out, &has_shift, 1);
  if (system.shift) {
    write_u32_le(out, static_cast<uint32_t>(system.shift->size()));
    for (double x : *system.shift) write_f64_le(out, x);
  }
  write_f64_le(out, system.residual);
}

CentroidSystem read_centroid_block(std::ifstream& in,
                                   const std::string& path) {
  expect_magic(in, "CNCS", path);
  expect_version(in, path);
  CentroidSystem system;
  system.centroids = read_matrix_block(in, path);
  const uint8_t provenance = read_u8(in, path);
  if (provenance > 1) {
    fail(ErrorCode::Format, path + ": unknown centroid provenance tag " +
                                std::to_string(provenance));
  }
  system.provenance = static_cast<CentroidProvenance>(provenance);
  const uint8_t has_shift = read_u8(in, path);
  if (has_shift > 1) {
    fail(ErrorCode::Format, path + ": corrupt shift flag");
  }
  if (has_shift == 1) {
    const uint32_t dim = read_u32_le(in, path);
    Vector shift(dim);
    for (double& x : shift) x = read_f64_le(in, path);
    system.shift = std::move(shift);
  }
  system.residual = read_f64_le(in, path);
  return system;
}

}  // namespace

void save_model(const NetworkModel& model, const std::string& path) {
  std::ofstream out = open_out(path);
  out.write("CNWM", 4);
  write_u32_le(out, kFormatVersion);
  write_u32_le(out, static_cast<uint32_t>(model.layer_count()));
  for (const Layer& layer : model.layers()) {
    write_u32_le(out, static_cast<uint32_t>(layer.weight.rows()));
    write_u32_le(out, static_cast<uint32_t>(layer.weight.cols()));
    const uint8_t tag = static_cast<uint8_t>(layer.activation);
    write_bytes(out, &tag, 1);
    for (double x : layer.weight.data()) write_f64_le(out, x);
  }
  if (!out) fail(ErrorCode::Io, "short write while saving " + path);
}

NetworkModel load_model(const std::string& path) {
  std::ifstream in = open_in(path);
  expect_magic(in, "CNWM", path);
  expect_version(in, path);
  const uint32_t layer_count = read_u32_le(in, path);
  if (layer_count == 0) {
    fail(ErrorCode::Format, path + ": model with zero layers");
  }
  std::vector<Layer> layers;
  layers.reserve(layer_count);
  for (uint32_t l = 0; l < layer_count; ++l) {
    const uint32_t rows = read_u32_le(in, path);
    const uint32_t cols = read_u32_le(in, path);
    if (rows == 0 || cols == 0) {
      fail(ErrorCode::Format, path + ": zero weight dimension");
    }
    const uint8_t tag = read_u8(in, path);
    if (tag > 1) {
      fail(ErrorCode::Format,
           path + ": unknown activation tag " + std::to_string(tag));
    }
    std::vector<double> data(static_cast<size_t>(rows) * cols);
    for (double& x : data) x = read_f64_le(in, path);
    layers.push_back(Layer{DenseMatrix(rows, cols, std::move(data)),
                           static_cast<ActivationKind>(tag)});
  }
  return NetworkModel(std::move(layers));
}

void save_centroid_system(const CentroidSystem& system,
                          const std::string& path) {
  std::ofstream out = open_out(path);
  write_centroid_block(out, system);
  if (!out) fail(ErrorCode::Io, "short write while saving " + path);
}

CentroidSystem load_centroid_system(const std::string& path) {
  std::ifstream in = open_in(path);
  return read_centroid_block(in, path);
}

void save_gauss_head(const GaussHead& head, const std::string& path) {
  std::ofstream out = open_out(path);
  out.write("CNGH", 4);
  write_u32_le(out, kFormatVersion);
  write_centroid_block(out, head.centroids);
  write_f64_le(out, head.outlier_threshold);
  if (!out) fail(ErrorCode::Io, "short write while saving " + path);
}

GaussHead load_gauss_head(const std::string& path) {
  std::ifstream in = open_in(path);
  expect_magic(in, "CNGH", path);
  expect_version(in, path);
  GaussHead head;
  head.centroids = read_centroid_block(in, path);
  head.outlier_threshold = read_f64_le(in, path);
  return head;
}

}  // namespace cnet
