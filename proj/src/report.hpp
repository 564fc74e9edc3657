#pragma once

#include <string>
#include <vector>

#include "dataset.hpp"
#include "gauss.hpp"
#include "network.hpp"

namespace cnet {

struct RankEntry {
  size_t sample_id = 0;
  uint32_t predicted_class = 0;
  double confidence = 0.0;
  bool outlier = false;
};

/// All samples ranked by the Gauss confidence of their predicted class,
/// highest first; confidence ties break on the sample id.
std::vector<RankEntry> rank_by_confidence(const NetworkModel& model,
                                          const GaussHead& head,
                                          const LabeledDataset& data);

/// Top-k and bottom-k slices of the ranking as CSV
/// (group,rank,sample_id,predicted_class,confidence,outlier).
void write_rank_csv(const std::string& path,
                    const std::vector<RankEntry>& ranking, size_t k);

}  // namespace cnet
