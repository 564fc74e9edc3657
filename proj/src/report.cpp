#include "report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

namespace cnet {

std::vector<RankEntry> rank_by_confidence(const NetworkModel& model,
                                          const GaussHead& head,
                                          const LabeledDataset& data) {
  const DenseMatrix inputs = prepared_inputs(model, data.features());
  const DenseMatrix fp = forward_penultimate(model, inputs);

  std::vector<RankEntry> entries;
  entries.reserve(data.count());
  for (size_t j = 0; j < data.count(); ++j) {
    const GaussPrediction pred = predict_gauss(head, fp.column(j));
    entries.push_back({j, pred.cls, pred.confidence, pred.outlier});
  }
  std::sort(entries.begin(), entries.end(),
            [](const RankEntry& a, const RankEntry& b) {
              if (a.confidence != b.confidence) {
                return a.confidence > b.confidence;
              }
              return a.sample_id < b.sample_id;
            });
  return entries;
}

void write_rank_csv(const std::string& path,
                    const std::vector<RankEntry>& ranking, size_t k) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::Io, "cannot open " + path + " for writing");
  out << "group,rank,sample_id,predicted_class,confidence,outlier\n";
  char buf[40];
  const size_t top = std::min(k, ranking.size());
  for (size_t i = 0; i < top; ++i) {
    const RankEntry& e = ranking[i];
    std::snprintf(buf, sizeof(buf), "%.17g", e.confidence);
    out << "top," << (i + 1) << ',' << e.sample_id << ',' << e.predicted_class
        << ',' << buf << ',' << (e.outlier ? 1 : 0) << '\n';
  }
  const size_t bottom = std::min(k, ranking.size() - top);
  for (size_t i = 0; i < bottom; ++i) {
    const RankEntry& e = ranking[ranking.size() - bottom + i];
    std::snprintf(buf, sizeof(buf), "%.17g", e.confidence);
    out << "bottom," << (i + 1) << ',' << e.sample_id << ','
        << e.predicted_class << ',' << buf << ',' << (e.outlier ? 1 : 0)
        << '\n';
  }
  if (!out) fail(ErrorCode::Io, "short write to " + path);
}

}  // namespace cnet
