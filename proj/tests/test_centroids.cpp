#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <fstream>

#include "centroids.hpp"
#include "linalg.hpp"
#include "oracles.hpp"
#include "rng.hpp"
#include "serialize.hpp"

using namespace cnet;

namespace {

NetworkModel single_layer(DenseMatrix w) {
  std::vector<Layer> layers;
  layers.push_back({std::move(w), ActivationKind::Identity});
  return NetworkModel(std::move(layers));
}

CentroidSystem manual_system(DenseMatrix centroids) {
  CentroidSystem system;
  system.centroids = std::move(centroids);
  system.provenance = CentroidProvenance::FromWeights;
  return system;
}

}  // namespace

TEST_CASE("equidistant centroids: equal-norm weights need no shift") {
  const CentroidSystem system = equidistant_centroids(DenseMatrix::identity(3));
  CHECK(system.residual <= 1e-12);
  for (double v : *system.shift) CHECK(v == 0.0);
  for (size_t i = 0; i < 9; ++i) {
    CHECK(system.centroids.data()[i] == DenseMatrix::identity(3).data()[i]);
  }
}

TEST_CASE("equidistant centroids: the worked 2x2 single-equation case") {
  DenseMatrix w(2, 2, {1.0, 0.0, 0.0, 2.0});
  const CentroidSystem system = equidistant_centroids(w);
  REQUIRE(system.shift.has_value());
  CHECK((*system.shift)[0] == doctest::Approx(0.3).epsilon(1e-12));
  CHECK((*system.shift)[1] == doctest::Approx(-0.6).epsilon(1e-12));
  CHECK(system.centroids(0, 0) == doctest::Approx(1.3).epsilon(1e-12));
  CHECK(system.centroids(1, 0) == doctest::Approx(-0.6).epsilon(1e-12));
  CHECK(system.centroids(0, 1) == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(system.centroids(1, 1) == doctest::Approx(1.4).epsilon(1e-12));
  const double n0 = euclidean_norm(system.centroids.column(0));
  const double n1 = euclidean_norm(system.centroids.column(1));
  CHECK(n0 * n0 == doctest::Approx(2.05).epsilon(1e-12));
  CHECK(n1 * n1 == doctest::Approx(2.05).epsilon(1e-12));
}

TEST_CASE("equidistant centroids: random weights give equal norms") {
  Rng rng(3);
  const DenseMatrix w = oracle::random_matrix(10, 5, rng);
  const CentroidSystem system = equidistant_centroids(w);
  CHECK(equidistance_spread(system.centroids) <= 1e-9);
}

TEST_CASE("printed-sign regression: the uncorrected system is not equidistant") {
  // Expanding ‖W_{·1}+v‖² = ‖W_{·l}+v‖² puts ‖W_{·l}‖² − ‖W_{·1}‖² on the
  // right-hand side; the flipped variant must fail the equal-norm check
  // whenever the column norms differ.
  DenseMatrix w(2, 2, {1.0, 0.0, 0.0, 2.0});
  DenseMatrix a(1, 2, 0.0);
  a(0, 0) = 2.0 * (w(0, 0) - w(0, 1));
  a(0, 1) = 2.0 * (w(1, 0) - w(1, 1));
  const double n0 = 1.0, n1 = 4.0;
  const Vector flipped_rhs{n0 - n1};
  const auto solution = least_squares_solve(a, flipped_rhs);
  DenseMatrix z = w;
  for (size_t k = 0; k < 2; ++k) {
    for (size_t i = 0; i < 2; ++i) z(i, k) += solution.x[i];
  }
  CHECK(equidistance_spread(z) > 1e-3);

  // The corrected construction on the same weights passes.
  CHECK(equidistance_spread(equidistant_centroids(w).centroids) <= 1e-9);
}

TEST_CASE("equidistant centroids: degenerate collinear weights error out") {
  // Columns on one line with distinct norms make the shift system
  // inconsistent even though d >= c-1.
  DenseMatrix w(2, 3, 0.0);
  w(0, 0) = 0.0;
  w(0, 1) = 1.0;
  w(0, 2) = 2.0;
  try {
    equidistant_centroids(w);
    FAIL("expected a numeric error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Numeric);
    CHECK(std::string(e.what()).find("residual") != std::string::npos);
  }

  DenseMatrix narrow(1, 3, {1.0, 2.0, 3.0});
  CHECK_THROWS_AS(equidistant_centroids(narrow), Error);
}

TEST_CASE("kmeans_assign basics and the worked example") {
  const CentroidSystem system =
      equidistant_centroids(DenseMatrix(2, 2, {1.0, 0.0, 0.0, 2.0}));

  // A point sitting exactly on a centroid belongs to it.
  DenseMatrix at_centroid(2, 1, 0.0);
  at_centroid(0, 0) = system.centroids(0, 1);
  at_centroid(1, 0) = system.centroids(1, 1);
  CHECK(kmeans_assign(at_centroid, system).label(0) == 1);

  // f_p = (1, 0): squared distances 0.45 vs 2.45, so the first class.
  DenseMatrix p(2, 1, 0.0);
  p(0, 0) = 1.0;
  CHECK(kmeans_assign(p, system).label(0) == 0);
}

TEST_CASE("kmeans_assign matches the brute-force distance table") {
  Rng rng(17);
  const DenseMatrix points = oracle::random_matrix(6, 40, rng);
  const CentroidSystem system =
      manual_system(oracle::random_matrix(6, 5, rng));
  const PartitionMatrix got = kmeans_assign(points, system);
  const auto want =
      oracle::nearest_centroid_bruteforce(points, system.centroids);
  for (size_t j = 0; j < points.cols(); ++j) {
    CHECK(got.label(j) == want[j]);
  }
}

TEST_CASE("kmeans_assign breaks ties toward the lowest class index") {
  DenseMatrix c(2, 3, 0.0);
  c(0, 0) = 1.0;
  c(0, 1) = 1.0;  // duplicate of class 0
  c(1, 2) = 1.0;
  DenseMatrix p(2, 1, 0.0);
  p(0, 0) = 1.0;
  CHECK(kmeans_assign(p, manual_system(std::move(c))).label(0) == 0);
}

TEST_CASE("theorem-1 equivalence holds on random models and points") {
  Rng rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    const size_t c = 2 + rng.next_below(6);
    const size_t d = (c - 1) + 1 + rng.next_below(8);
    NetworkModel net({4, d, c}, rng.next_u64());
    const DenseMatrix points = oracle::random_matrix(4, 50, rng, -2.0, 2.0);
    const EquivalenceReport report = verify_equivalence(net, points);
    CHECK(report.mismatches == 0);
    CHECK(report.match_fraction() == 1.0);
  }
}

TEST_CASE("exactly tied logits are flagged, not failed") {
  // Two identical weight columns tie the logits for every input.
  DenseMatrix w(2, 2, 0.0);
  w(0, 0) = 0.7;
  w(1, 0) = -0.2;
  w(0, 1) = 0.7;
  w(1, 1) = -0.2;
  NetworkModel net = single_layer(std::move(w));
  const DenseMatrix points = DenseMatrix(2, 5, 0.4);
  const EquivalenceReport report = verify_equivalence(net, points);
  CHECK(report.ties == 5);
  CHECK(report.mismatches == 0);
  CHECK(report.match_fraction() == 1.0);
  CHECK(report.tie_indices.size() == 5);
}

TEST_CASE("shifted softmax: uniform at the origin, identity elsewhere") {
  Rng rng(31);
  const DenseMatrix w = oracle::random_matrix(6, 4, rng);
  const CentroidSystem system = equidistant_centroids(w);

  const Vector uniform = shifted_softmax(Vector(6, 0.0), system);
  for (double v : uniform) CHECK(v == doctest::Approx(0.25).epsilon(1e-12));

  for (int trial = 0; trial < 500; ++trial) {
    const Vector fp = oracle::random_vector(6, rng, -3.0, 3.0);
    const Vector via_shift = shifted_softmax(fp, system);
    const Vector direct = softmax(matvec_tn(w, fp));
    for (size_t k = 0; k < 4; ++k) {
      CHECK(std::abs(via_shift[k] - direct[k]) <= 1e-9);
    }
  }
}

TEST_CASE("shifted softmax rejects k-means centroids") {
  CentroidSystem system = manual_system(DenseMatrix::identity(3));
  system.provenance = CentroidProvenance::KMeansOptimal;
  CHECK_THROWS_AS(shifted_softmax(Vector(3, 0.0), system), Error);
}

TEST_CASE("confidence grows along a centroid ray for orthogonal centroids") {
  DenseMatrix w(3, 3, 0.0);
  for (size_t i = 0; i < 3; ++i) w(i, i) = 3.0;  // orthogonal, equal norms
  const CentroidSystem system = equidistant_centroids(w);

  double previous = 0.0;
  for (double alpha : {1.0, 2.0, 4.0, 8.0}) {
    Vector fp(3, 0.0);
    fp[1] = alpha * system.centroids(1, 1);
    const Vector conf = shifted_softmax(fp, system);
    CHECK(conf[1] > previous);
    previous = conf[1];
  }
  CHECK(previous > 0.999);
}

TEST_CASE("distortion bound: hand arithmetic and the vacuous case") {
  NetworkModel net = single_layer(DenseMatrix::identity(2));
  DenseMatrix z(2, 2, 0.0);
  z(0, 0) = -1.0;
  z(0, 1) = 1.0;
  const CentroidSystem system = manual_system(std::move(z));

  const DistortionBound bound = min_distortion_bound(
      net, Vector{-0.5, 0.0}, Vector{0.5, 0.0}, system, 1.0);
  CHECK(bound.centroid_separation == doctest::Approx(2.0));
  CHECK(bound.source_gap == doctest::Approx(0.5));
  CHECK(bound.target_gap == doctest::Approx(0.5));
  CHECK(bound.lower_bound == doctest::Approx(1.0));

  const DistortionBound vacuous = min_distortion_bound(
      net, Vector{-0.1, 3.0}, Vector{0.1, 3.0}, system, 1.0);
  CHECK(vacuous.lower_bound < 0.0);

  CHECK_THROWS_AS(min_distortion_bound(net, Vector{-0.5, 0.0},
                                       Vector{-0.6, 0.0}, system, 1.0),
                  Error);
  CHECK_THROWS_AS(min_distortion_bound(net, Vector{-0.5, 0.0},
                                       Vector{0.5, 0.0}, system, 0.0),
                  Error);
}

TEST_CASE("prototype gap bound: exact prototypes and the identity map") {
  NetworkModel net = single_layer(DenseMatrix::identity(2));
  DenseMatrix z(2, 2, 0.0);
  z(0, 0) = 1.0;
  z(1, 1) = 1.0;
  const CentroidSystem system = manual_system(std::move(z));

  // x at the prototype: bound and gap are both zero.
  CHECK(prototype_gap_bound(net, Vector{1.0, 0.0}, Vector{1.0, 0.0}, 0, system,
                            1.0) == 0.0);

  // Identity network: the bound equals the gap for any x.
  Rng rng(41);
  for (int trial = 0; trial < 50; ++trial) {
    const Vector x = oracle::random_vector(2, rng, -4.0, 4.0);
    const double bound =
        prototype_gap_bound(net, x, Vector{1.0, 0.0}, 0, system, 1.0);
    const double gap = std::sqrt((x[0] - 1.0) * (x[0] - 1.0) + x[1] * x[1]);
    CHECK(bound == doctest::Approx(gap).epsilon(1e-12));
  }

  // Violated precondition carries the achieved gap.
  try {
    prototype_gap_bound(net, Vector{0.0, 0.0}, Vector{0.5, 0.5}, 0, system,
                        1.0);
    FAIL("expected an invalid-argument error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidArgument);
    CHECK(std::string(e.what()).find("gap") != std::string::npos);
  }
}

TEST_CASE("prototype search reaches weight centroids of a linear map") {
  // Identity activations keep f_p linear and surjective, so a prototype
  // exists for every centroid.
  std::vector<Layer> layers;
  Rng rng(47);
  layers.push_back(
      {oracle::random_matrix(4, 3, rng), ActivationKind::Identity});
  layers.push_back(
      {oracle::random_matrix(3, 3, rng), ActivationKind::Identity});
  NetworkModel net(std::move(layers));
  const CentroidSystem system = equidistant_centroids(net.final_weight());

  const PrototypeSearchResult proto = find_prototype(net, system, 1, 99, 500);
  REQUIRE(proto.gap <= 1e-3);

  const double lipschitz = penultimate_lipschitz_upper_bound(net);
  for (int trial = 0; trial < 100; ++trial) {
    const Vector x = oracle::random_vector(4, rng, -2.0, 2.0);
    const double bound =
        prototype_gap_bound(net, x, proto.z, 1, system, lipschitz);
    const Vector fp = forward_penultimate(net, x);
    const double gap = std::sqrt(squared_distance(
        fp.data(), system.centroids.col(1), system.centroids.rows()));
    CHECK(bound + proto.gap + 1e-9 >= gap);
  }
}

TEST_CASE("assignment attains the enumerated partition optimum") {
  Rng rng(53);
  for (int trial = 0; trial < 30; ++trial) {
    const size_t m = 2 + rng.next_below(5);  // ≤ 6 points
    const size_t c = 2 + rng.next_below(2);  // ≤ 3 classes
    const DenseMatrix points =
        oracle::random_matrix(3, m, rng, -2.0, 2.0);
    const CentroidSystem system =
        manual_system(oracle::random_matrix(3, c, rng, -2.0, 2.0));
    const PartitionMatrix y = kmeans_assign(points, system);
    std::vector<uint32_t> labels(y.labels());
    const double got =
        oracle::partition_objective(points, system.centroids, labels);
    const double best =
        oracle::best_partition_objective(points, system.centroids);
    CHECK(got <= best + 1e-12);
  }
}

TEST_CASE("voronoi cones: assignment depends only on direction") {
  Rng rng(59);
  const DenseMatrix w = oracle::random_matrix(5, 4, rng);
  const CentroidSystem system = equidistant_centroids(w);
  int checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const Vector p = oracle::random_vector(5, rng, -2.0, 2.0);
    // Skip near-boundary points where rounding could flip the argmax.
    const Vector scores = matvec_tn(system.centroids, p);
    Vector sorted = scores;
    std::sort(sorted.rbegin(), sorted.rend());
    if (sorted[0] - sorted[1] <= 1e-6) continue;
    ++checked;

    DenseMatrix stacked(5, 4, 0.0);
    for (size_t i = 0; i < 5; ++i) {
      stacked(i, 0) = p[i];
      stacked(i, 1) = 0.5 * p[i];
      stacked(i, 2) = 2.0 * p[i];
      stacked(i, 3) = 10.0 * p[i];
    }
    const PartitionMatrix assign = kmeans_assign(stacked, system);
    CHECK(assign.label(1) == assign.label(0));
    CHECK(assign.label(2) == assign.label(0));
    CHECK(assign.label(3) == assign.label(0));
  }
  CHECK(checked > 150);
}

TEST_CASE("centroid system container round-trips bit-exactly") {
  Rng rng(61);
  CentroidSystem system =
      equidistant_centroids(oracle::random_matrix(4, 3, rng));
  system.residual = 3.5e-12;
  save_centroid_system(system, "test_centroids_sys.cncs");
  const CentroidSystem loaded = load_centroid_system("test_centroids_sys.cncs");
  CHECK(loaded.centroids.data() == system.centroids.data());
  CHECK(loaded.provenance == system.provenance);
  REQUIRE(loaded.shift.has_value());
  CHECK(*loaded.shift == *system.shift);
  CHECK(loaded.residual == system.residual);

  save_centroid_system(loaded, "test_centroids_sys2.cncs");
  std::ifstream a("test_centroids_sys.cncs", std::ios::binary);
  std::ifstream b("test_centroids_sys2.cncs", std::ios::binary);
  const std::string bytes_a((std::istreambuf_iterator<char>(a)), {});
  const std::string bytes_b((std::istreambuf_iterator<char>(b)), {});
  CHECK(bytes_a == bytes_b);
}
