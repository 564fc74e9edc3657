#pragma once

#include <string>

#include "centroids.hpp"
#include "gauss.hpp"
#include "network.hpp"

namespace cnet {

/// Versioned binary model container, bit-exact across round trips:
/// magic "CNWM", format version u32, layer count u32, then per layer
/// rows u32, cols u32, activation tag u8 (0 = ReLU, 1 = Identity) and the
/// weights as little-endian f64 in column-major order. All integers are
/// little-endian.
void save_model(const NetworkModel& model, const std::string& path);
NetworkModel load_model(const std::string& path);

/// Centroid container sharing the same conventions: magic "CNCS", version,
/// matrix block, provenance tag byte, optional shift vector block, residual.
void save_centroid_system(const CentroidSystem& system,
                          const std::string& path);
CentroidSystem load_centroid_system(const std::string& path);

/// Gauss head container: magic "CNGH", version, embedded centroid block,
/// outlier threshold as f64.
void save_gauss_head(const GaussHead& head, const std::string& path);
GaussHead load_gauss_head(const std::string& path);

}  // namespace cnet
