#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <string>
#include <vector>

#include "dataset.hpp"

using namespace cnet;

namespace {

void put_u32_be(std::vector<unsigned char>& out, uint32_t v) {
  out.push_back(static_cast<unsigned char>(v >> 24));
  out.push_back(static_cast<unsigned char>(v >> 16));
  out.push_back(static_cast<unsigned char>(v >> 8));
  out.push_back(static_cast<unsigned char>(v));
}

void write_file(const std::string& path, const std::vector<unsigned char>& b) {
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(b.data()),
            static_cast<std::streamsize>(b.size()));
}

std::vector<unsigned char> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::vector<unsigned char>(std::istreambuf_iterator<char>(in), {});
}

struct IdxFixture {
  std::string images = "test_dataset_images.idx";
  std::string labels = "test_dataset_labels.idx";
  std::vector<unsigned char> pixels{0, 128, 255, 64, 10, 20, 30, 40};

  IdxFixture() {
    std::vector<unsigned char> img;
    put_u32_be(img, 0x00000803);
    put_u32_be(img, 2);  // count
    put_u32_be(img, 2);  // rows
    put_u32_be(img, 2);  // cols
    img.insert(img.end(), pixels.begin(), pixels.end());
    write_file(images, img);

    std::vector<unsigned char> lbl;
    put_u32_be(lbl, 0x00000801);
    put_u32_be(lbl, 2);
    lbl.push_back(3);
    lbl.push_back(1);
    write_file(labels, lbl);
  }
};

}  // namespace

TEST_CASE("load_idx parses the hand-crafted fixture exactly") {
  IdxFixture fx;
  const LabeledDataset ds = load_idx(fx.images, fx.labels);
  CHECK(ds.count() == 2);
  CHECK(ds.dim() == 4);
  CHECK(ds.classes() == 4);
  CHECK(ds.labels().label(0) == 3);
  CHECK(ds.labels().label(1) == 1);
  CHECK(ds.metadata().geometry.height == 2);
  CHECK(ds.metadata().geometry.width == 2);
  CHECK(ds.metadata().geometry.channels == 1);
  for (size_t j = 0; j < 2; ++j) {
    for (size_t i = 0; i < 4; ++i) {
      CHECK(ds.features()(i, j) ==
            double(fx.pixels[j * 4 + i]) / 255.0);
    }
  }
}

TEST_CASE("IDX round-trip reproduces the original bytes") {
  IdxFixture fx;
  const LabeledDataset ds = load_idx(fx.images, fx.labels);
  write_idx(ds, "test_dataset_rt_images.idx", "test_dataset_rt_labels.idx");
  CHECK(read_file("test_dataset_rt_images.idx") == read_file(fx.images));
  CHECK(read_file("test_dataset_rt_labels.idx") == read_file(fx.labels));
}

TEST_CASE("load_idx error paths are distinct") {
  IdxFixture fx;

  SUBCASE("bad magic") {
    auto bytes = read_file(fx.images);
    bytes[3] = 0x07;
    write_file("test_dataset_badmagic.idx", bytes);
    try {
      load_idx("test_dataset_badmagic.idx", fx.labels);
      FAIL("expected a format error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::Format);
      CHECK(std::string(e.what()).find("magic") != std::string::npos);
    }
  }

  SUBCASE("truncated payload reports expected vs actual byte counts") {
    auto bytes = read_file(fx.images);
    bytes.resize(bytes.size() - 3);
    write_file("test_dataset_trunc.idx", bytes);
    try {
      load_idx("test_dataset_trunc.idx", fx.labels);
      FAIL("expected a format error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::Format);
      CHECK(std::string(e.what()).find("8") != std::string::npos);
      CHECK(std::string(e.what()).find("5") != std::string::npos);
    }
  }

  SUBCASE("image/label count mismatch") {
    std::vector<unsigned char> lbl;
    put_u32_be(lbl, 0x00000801);
    put_u32_be(lbl, 3);
    lbl.push_back(0);
    lbl.push_back(1);
    lbl.push_back(2);
    write_file("test_dataset_mismatch.idx", lbl);
    try {
      load_idx(fx.images, "test_dataset_mismatch.idx");
      FAIL("expected a format error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::Format);
      CHECK(std::string(e.what()).find("match") != std::string::npos);
    }
  }

  SUBCASE("missing file is an io error") {
    CHECK_THROWS_AS(load_idx("test_dataset_nosuch.idx", fx.labels), Error);
  }
}

TEST_CASE("official MNIST test file, when present") {
  const char* dir = std::getenv("CNET_MNIST_DIR");
  if (dir == nullptr || *dir == '\0') {
    MESSAGE("CNET_MNIST_DIR not set; skipping the official-file check");
    return;
  }
  const std::string images = std::string(dir) + "/t10k-images-idx3-ubyte";
  const std::string labels = std::string(dir) + "/t10k-labels-idx1-ubyte";
  std::ifstream probe(images);
  if (!probe) {
    MESSAGE("MNIST files not found under CNET_MNIST_DIR; skipping");
    return;
  }
  const LabeledDataset ds = load_idx(images, labels);
  CHECK(ds.count() == 10000);
  CHECK(ds.dim() == 784);
  CHECK(ds.classes() == 10);
  CHECK(ds.labels().label(0) == 7);
}

TEST_CASE("synth_blobs basics") {
  SUBCASE("one point per class lands near its mean") {
    const LabeledDataset ds = synth_blobs(4, 1, 6, 50.0, 9);
    CHECK(ds.count() == 4);
    for (size_t j = 0; j < 4; ++j) {
      CHECK(ds.labels().label(j) == j);
      // The mean has norm 50; a unit-variance sample stays well within 10.
      double norm = 0.0;
      for (size_t i = 0; i < 6; ++i) {
        norm += ds.features()(i, j) * ds.features()(i, j);
      }
      CHECK(std::sqrt(norm) > 40.0);
      CHECK(std::sqrt(norm) < 60.0);
    }
  }

  SUBCASE("zero separation keeps classes identically distributed") {
    const LabeledDataset ds = synth_blobs(3, 50, 2, 0.0, 11);
    CHECK(ds.count() == 150);
    double norm_sum = 0.0;
    for (size_t j = 0; j < ds.count(); ++j) {
      norm_sum += std::abs(ds.features()(0, j));
    }
    CHECK(norm_sum / ds.count() < 3.0);  // all centered at the origin
  }

  SUBCASE("fixed seed is bit-identical across runs") {
    const LabeledDataset a = synth_blobs(3, 20, 4, 5.0, 1234);
    const LabeledDataset b = synth_blobs(3, 20, 4, 5.0, 1234);
    CHECK(a.features().data() == b.features().data());
    CHECK(a.labels().labels() == b.labels().labels());
  }
}

TEST_CASE("split is disjoint, exhaustive and seed-stable") {
  const LabeledDataset ds = synth_blobs(3, 40, 2, 5.0, 77);
  const auto [train, test] = split(ds, 0.75, 5);
  CHECK(train.count() == 90);
  CHECK(test.count() == 30);
  CHECK(train.count() + test.count() == ds.count());
  CHECK(train.classes() == ds.classes());

  const auto [train2, test2] = split(ds, 0.75, 5);
  CHECK(train.features().data() == train2.features().data());
  CHECK(test.labels().labels() == test2.labels().labels());

  // Disjointness: every original column appears exactly once across parts.
  // Columns are unique with probability one, so match by exact bytes.
  size_t matches = 0;
  for (size_t j = 0; j < ds.count(); ++j) {
    const Vector col = ds.features().column(j);
    for (size_t t = 0; t < train.count(); ++t) {
      if (train.features().column(t) == col) ++matches;
    }
    for (size_t t = 0; t < test.count(); ++t) {
      if (test.features().column(t) == col) ++matches;
    }
  }
  CHECK(matches == ds.count());

  CHECK_THROWS_AS(split(ds, 0.0, 1), Error);
  CHECK_THROWS_AS(split(ds, 1.0, 1), Error);
}

TEST_CASE("normalization round-trips") {
  const NormalizationRecord n{255.0, 0.0};
  for (double raw : {0.0, 1.0, 17.0, 254.0, 255.0}) {
    CHECK(std::abs(denormalize_value(n, normalize_value(n, raw)) - raw) <=
          1e-12);
  }
}
