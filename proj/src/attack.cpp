#include "attack.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>

#include "linalg.hpp"
#include "rng.hpp"

namespace cnet {

const char* head_name(HeadKind kind) {
  return kind == HeadKind::Softmax ? "softmax" : "gauss";
}

namespace {

void check_head(const ScoringHead& head) {
  if (head.kind == HeadKind::Gauss && head.gauss == nullptr) {
    fail(ErrorCode::InvalidArgument, "gauss head attacks need a GaussHead");
  }
}

struct PointScore {
  uint32_t top = 0;
  double top_score = 0.0;
  Vector scores;
};

PointScore score_from(const ScoringHead& head, const Vector& penultimate,
                      const Vector& lg) {
  PointScore out;
  out.scores = head.kind == HeadKind::Softmax
                   ? softmax(lg)
                   : gauss_confidence(*head.gauss, penultimate);
  for (size_t k = 1; k < out.scores.size(); ++k) {
    if (out.scores[k] > out.scores[out.top]) {
      out.top = static_cast<uint32_t>(k);
    }
  }
  out.top_score = out.scores[out.top];
  return out;
}

PointScore score_point(const NetworkModel& model, const ScoringHead& head,
                       const Vector& x_model) {
  const Vector fp = forward_penultimate(model, x_model);
  const Vector lg = matvec_tn(model.final_weight(), fp);
  return score_from(head, fp, lg);
}

/// First-layer cache for cheap re-evaluation after single-pixel edits:
/// editing input coordinate i shifts the layer-0 pre-activation by
/// delta·(row i of the weight), and only the layers above get recomputed.
class PixelProbe {
 public:
  PixelProbe(const NetworkModel& model, Vector x_model)
      : model_(&model),
        x_(std::move(x_model)),
        w0t_(model.layers()[0].weight.transposed()) {
    pre0_ = matvec_tn(model.layers()[0].weight, x_);
  }

  struct Result {
    Vector penultimate;
    Vector logits;
  };

  Result evaluate(const std::vector<std::pair<size_t, double>>& edits) const {
    Vector pre = pre0_;
    for (const auto& [coord, value] : edits) {
      const double delta = value - x_[coord];
      if (delta == 0.0) continue;
      const double* w_row = w0t_.col(coord);
      for (size_t i = 0; i < pre.size(); ++i) pre[i] += delta * w_row[i];
    }

    Result out;
    const size_t layer_count = model_->layer_count();
    if (layer_count == 1) {
      out.logits = std::move(pre);
      out.penultimate = x_;
      for (const auto& [coord, value] : edits) out.penultimate[coord] = value;
      return out;
    }

    Vector current = std::move(pre);
    if (model_->layers()[0].activation == ActivationKind::ReLU) {
      for (double& v : current) v = v > 0.0 ? v : 0.0;
    }
    for (size_t l = 1; l + 1 < layer_count; ++l) {
      current = matvec_tn(model_->layers()[l].weight, current);
      if (model_->layers()[l].activation == ActivationKind::ReLU) {
        for (double& v : current) v = v > 0.0 ? v : 0.0;
      }
    }
    out.logits = matvec_tn(model_->final_weight(), current);
    out.penultimate = std::move(current);
    return out;
  }

 private:
  const NetworkModel* model_;
  Vector x_;
  Vector pre0_;
  DenseMatrix w0t_;
};

double grid_value(const PixelBudget& budget, uint32_t index) {
  const uint32_t k = budget.candidates_per_channel;
  return budget.lo + (budget.hi - budget.lo) * static_cast<double>(index) /
                         static_cast<double>(k - 1);
}

uint32_t snap_to_grid(const PixelBudget& budget, double value) {
  const uint32_t k = budget.candidates_per_channel;
  const double t = (value - budget.lo) / (budget.hi - budget.lo);
  const double idx = std::round(t * static_cast<double>(k - 1));
  if (idx <= 0.0) return 0;
  if (idx >= static_cast<double>(k - 1)) return k - 1;
  return static_cast<uint32_t>(idx);
}

void check_budget(const PixelBudget& budget, size_t feature_dim) {
  if (!budget.geometry.valid()) {
    fail(ErrorCode::InvalidArgument, "one-pixel attack needs image geometry");
  }
  if (budget.geometry.pixel_count() != feature_dim) {
    fail(ErrorCode::DimensionMismatch,
         "image geometry covers " +
             std::to_string(budget.geometry.pixel_count()) +
             " values but the input has " + std::to_string(feature_dim));
  }
  if (!(budget.lo < budget.hi)) {
    fail(ErrorCode::InvalidArgument, "pixel value range requires lo < hi");
  }
  if (budget.candidates_per_channel < 2) {
    fail(ErrorCode::InvalidArgument, "need at least two candidate values");
  }
}

struct BestCandidate {
  bool found = false;
  size_t position = 0;
  std::vector<double> values;
  uint32_t attacked_class = 0;
  double confidence = -1.0;
};

/// Evaluates one (position, values) candidate; keeps it when it flips the
/// prediction with a higher wrong-class confidence than the incumbent.
void consider_candidate(const PixelProbe& probe, const ScoringHead& head,
                        uint32_t clean_class, const PixelBudget& budget,
                        size_t position, const std::vector<double>& values,
                        BestCandidate& best) {
  const uint32_t channels = budget.geometry.channels;
  std::vector<std::pair<size_t, double>> edits(channels);
  for (uint32_t ch = 0; ch < channels; ++ch) {
    edits[ch] = {position * channels + ch, values[ch]};
  }
  const PixelProbe::Result r = probe.evaluate(edits);
  const PointScore s = score_from(head, r.penultimate, r.logits);
  if (s.top == clean_class) return;
  if (!best.found || s.top_score > best.confidence) {
    best.found = true;
    best.position = position;
    best.values = values;
    best.attacked_class = s.top;
    best.confidence = s.top_score;
  }
}

std::optional<OnePixelCandidate> finish_candidate(const Vector& x_raw,
                                                  const PixelBudget& budget,
                                                  const BestCandidate& best) {
  if (!best.found) return std::nullopt;
  OnePixelCandidate out;
  out.position = best.position;
  out.values = best.values;
  out.attacked = x_raw;
  const uint32_t channels = budget.geometry.channels;
  for (uint32_t ch = 0; ch < channels; ++ch) {
    out.attacked[best.position * channels + ch] = best.values[ch];
  }
  out.attacked_class = best.attacked_class;
  out.confidence = best.confidence;
  return out;
}

std::optional<OnePixelCandidate> one_pixel_exhaustive(
    const NetworkModel& model, const ScoringHead& head, const Vector& x_raw,
    const PixelBudget& budget, uint32_t clean_class) {
  const PixelProbe probe(model, prepared_point(model, x_raw));
  const size_t positions = static_cast<size_t>(budget.geometry.height) *
                           budget.geometry.width;
  const uint32_t channels = budget.geometry.channels;
  const uint32_t k = budget.candidates_per_channel;

  BestCandidate best;
  std::vector<uint32_t> odo(channels, 0);
  std::vector<double> values(channels, 0.0);
  for (size_t p = 0; p < positions; ++p) {
    std::fill(odo.begin(), odo.end(), 0u);
    while (true) {
      for (uint32_t ch = 0; ch < channels; ++ch) {
        values[ch] = grid_value(budget, odo[ch]);
      }
      consider_candidate(probe, head, clean_class, budget, p, values, best);
      uint32_t ch = 0;
      while (ch < channels && ++odo[ch] == k) {
        odo[ch] = 0;
        ++ch;
      }
      if (ch == channels) break;
    }
  }
  return finish_candidate(x_raw, budget, best);
}

std::optional<OnePixelCandidate> one_pixel_evolution(
    const NetworkModel& model, const ScoringHead& head, const Vector& x_raw,
    const PixelBudget& budget, uint32_t clean_class, uint64_t seed,
    const EvolutionConfig& cfg) {
  if (cfg.population < 4) {
    fail(ErrorCode::InvalidArgument,
         "differential evolution needs a population of at least 4");
  }
  const PixelProbe probe(model, prepared_point(model, x_raw));
  const size_t positions = static_cast<size_t>(budget.geometry.height) *
                           budget.geometry.width;
  const uint32_t channels = budget.geometry.channels;
  const size_t dims = 1 + channels;

  Rng rng(seed);
  BestCandidate best;

  // Genome: [position, value per channel], continuous; evaluation snaps to
  // the exhaustive search grid.
  auto snap_position = [&](double g) {
    double p = std::floor(g);
    if (p < 0.0) p = 0.0;
    if (p > static_cast<double>(positions - 1)) {
      p = static_cast<double>(positions - 1);
    }
    return static_cast<size_t>(p);
  };

  std::vector<double> values(channels, 0.0);
  auto fitness = [&](const std::vector<double>& genome) {
    const size_t p = snap_position(genome[0]);
    for (uint32_t ch = 0; ch < channels; ++ch) {
      values[ch] = grid_value(budget, snap_to_grid(budget, genome[1 + ch]));
    }
    std::vector<std::pair<size_t, double>> edits(channels);
    for (uint32_t ch = 0; ch < channels; ++ch) {
      edits[ch] = {p * channels + ch, values[ch]};
    }
    const PixelProbe::Result r = probe.evaluate(edits);
    const PointScore s = score_from(head, r.penultimate, r.logits);
    double strongest_wrong = -1.0;
    for (size_t c = 0; c < s.scores.size(); ++c) {
      if (c != clean_class && s.scores[c] > strongest_wrong) {
        strongest_wrong = s.scores[c];
      }
    }
    if (s.top != clean_class &&
        (!best.found || s.top_score > best.confidence)) {
      best.found = true;
      best.position = p;
      best.values = values;
      best.attacked_class = s.top;
      best.confidence = s.top_score;
    }
    return strongest_wrong;
  };

  std::vector<std::vector<double>> population(cfg.population,
                                              std::vector<double>(dims, 0.0));
  std::vector<double> scores(cfg.population, 0.0);
  for (auto& genome : population) {
    genome[0] = rng.uniform(0.0, static_cast<double>(positions));
    for (uint32_t ch = 0; ch < channels; ++ch) {
      genome[1 + ch] = rng.uniform(budget.lo, budget.hi);
    }
  }
  for (size_t i = 0; i < cfg.population; ++i) scores[i] = fitness(population[i]);

  std::vector<double> trial(dims, 0.0);
  for (size_t iter = 0; iter < cfg.iterations; ++iter) {
    for (size_t i = 0; i < cfg.population; ++i) {
      size_t r1, r2, r3;
      do { r1 = rng.next_below(cfg.population); } while (r1 == i);
      do { r2 = rng.next_below(cfg.population); } while (r2 == i || r2 == r1);
      do {
        r3 = rng.next_below(cfg.population);
      } while (r3 == i || r3 == r1 || r3 == r2);

      const size_t forced = rng.next_below(dims);
      for (size_t d = 0; d < dims; ++d) {
        const bool cross = rng.next_double() < cfg.crossover_rate || d == forced;
        trial[d] = cross ? population[r1][d] +
                               cfg.differential_weight *
                                   (population[r2][d] - population[r3][d])
                         : population[i][d];
      }
      trial[0] = std::clamp(trial[0], 0.0, static_cast<double>(positions) - 1e-9);
      for (uint32_t ch = 0; ch < channels; ++ch) {
        trial[1 + ch] = std::clamp(trial[1 + ch], budget.lo, budget.hi);
      }
      const double trial_score = fitness(trial);
      if (trial_score >= scores[i]) {
        population[i] = trial;
        scores[i] = trial_score;
      }
    }
  }
  return finish_candidate(x_raw, budget, best);
}

}  // namespace

Vector fgsm_attack(const NetworkModel& model, const ScoringHead& head,
                   const Vector& x_raw, uint32_t label, double epsilon,
                   double lo, double hi) {
  check_head(head);
  if (epsilon < 0.0) {
    fail(ErrorCode::InvalidArgument, "epsilon must be non-negative");
  }
  const Vector x_model = prepared_point(model, x_raw);
  Vector grad;
  if (head.kind == HeadKind::Softmax) {
    grad = input_gradient_cross_entropy(model, x_model, label);
  } else {
    const DenseMatrix& c = head.gauss->centroids.centroids;
    if (label >= c.cols()) {
      fail(ErrorCode::InvalidArgument, "label out of range for the gauss head");
    }
    grad = input_gradient_distance(model, x_model, c.column(label));
  }
  for (double g : grad) {
    if (!std::isfinite(g)) {
      fail(ErrorCode::Numeric, "non-finite gradient in fgsm_attack");
    }
  }

  Vector out(x_raw.size());
  for (size_t i = 0; i < x_raw.size(); ++i) {
    const double sign = grad[i] > 0.0 ? 1.0 : (grad[i] < 0.0 ? -1.0 : 0.0);
    out[i] = std::clamp(x_raw[i] + epsilon * sign, lo, hi);
  }
  return out;
}

namespace {

double raw_distortion(const Vector& a, const Vector& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

/// Fills the Theorem-2 columns of a successful record. When the two points
/// land in the same centroid cell despite the head flip (tie-edge cases),
/// the theorem's premise does not hold and the trivial bound 0 is recorded.
void annotate_bound(AttackRecord& record, const AttackArm& arm,
                    const Vector& x_model, const Vector& xt_model) {
  try {
    const DistortionBound bound = min_distortion_bound(
        *arm.model, x_model, xt_model, *arm.centroids, arm.lipschitz);
    record.bound_lower = bound.lower_bound;
  } catch (const Error&) {
    record.bound_lower = 0.0;
  }
  record.bound_ok = record.distortion_l2 >= record.bound_lower;
}

}  // namespace

FgsmSweepOutput fgsm_sweep(const AttackArm& arm, const LabeledDataset& data,
                           const std::vector<double>& epsilons, double lo,
                           double hi) {
  check_head(arm.head);
  if (epsilons.empty() ||
      !std::is_sorted(epsilons.begin(), epsilons.end())) {
    fail(ErrorCode::InvalidArgument,
         "fgsm_sweep needs a non-empty ascending epsilon grid");
  }
  const NetworkModel& model = *arm.model;
  const size_t m = data.count();

  FgsmSweepOutput out;
  std::vector<size_t> correct(epsilons.size(), 0);
  std::vector<double> conf_sum(epsilons.size(), 0.0);
  std::vector<size_t> conf_count(epsilons.size(), 0);

  for (size_t j = 0; j < m; ++j) {
    const Vector x_raw = data.features().column(j);
    const uint32_t label = data.labels().label(j);
    const Vector x_model = prepared_point(model, x_raw);
    const PointScore clean = score_point(model, arm.head, x_model);

    for (size_t e = 0; e < epsilons.size(); ++e) {
      const Vector xt_raw =
          fgsm_attack(model, arm.head, x_raw, label, epsilons[e], lo, hi);
      const Vector xt_model = prepared_point(model, xt_raw);
      const PointScore attacked = score_point(model, arm.head, xt_model);

      if (attacked.top == label) {
        ++correct[e];
      } else {
        conf_sum[e] += attacked.top_score;
        ++conf_count[e];
      }

      if (attacked.top != clean.top) {
        AttackRecord record;
        record.sample_id = j;
        record.head = arm.head.kind;
        record.true_class = label;
        record.pred_class = clean.top;
        record.attacked_class = attacked.top;
        record.success = true;
        record.distortion_l2 = raw_distortion(xt_raw, x_raw);
        record.conf_before = clean.top_score;
        record.conf_after = attacked.top_score;
        record.epsilon = epsilons[e];
        annotate_bound(record, arm, x_model, xt_model);
        out.successes.push_back(std::move(record));
      }
    }
  }

  for (size_t e = 0; e < epsilons.size(); ++e) {
    FgsmSweepRow row;
    row.epsilon = epsilons[e];
    row.accuracy = m == 0 ? 0.0
                          : static_cast<double>(correct[e]) /
                                static_cast<double>(m);
    row.mean_confidence_misclassified =
        conf_count[e] == 0 ? 0.0
                           : conf_sum[e] / static_cast<double>(conf_count[e]);
    out.rows.push_back(row);
  }
  return out;
}

std::optional<OnePixelCandidate> one_pixel_attack(
    const NetworkModel& model, const ScoringHead& head, const Vector& x_raw,
    const PixelBudget& budget, PixelStrategy strategy, uint64_t seed,
    const EvolutionConfig& evolution) {
  check_head(head);
  check_budget(budget, x_raw.size());
  const PointScore clean =
      score_point(model, head, prepared_point(model, x_raw));
  if (strategy == PixelStrategy::Exhaustive) {
    return one_pixel_exhaustive(model, head, x_raw, budget, clean.top);
  }
  return one_pixel_evolution(model, head, x_raw, budget, clean.top, seed,
                             evolution);
}

AttackReport one_pixel_campaign(const AttackArm& arm,
                                const LabeledDataset& data,
                                const CampaignConfig& config) {
  check_head(arm.head);
  AttackReport report;
  if (config.sample_count == 0 || data.count() == 0) {
    report.aggregates.rate_defined = false;
    return report;
  }
  check_budget(config.budget, data.dim());

  std::vector<size_t> order(data.count());
  std::iota(order.begin(), order.end(), size_t{0});
  Rng rng(config.seed);
  rng.shuffle(order);
  const size_t n = std::min(config.sample_count, data.count());

  const NetworkModel& model = *arm.model;
  for (size_t s = 0; s < n; ++s) {
    const size_t j = order[s];
    const Vector x_raw = data.features().column(j);
    const Vector x_model = prepared_point(model, x_raw);
    const PointScore clean = score_point(model, arm.head, x_model);

    AttackRecord record;
    record.sample_id = j;
    record.head = arm.head.kind;
    record.true_class = data.labels().label(j);
    record.pred_class = clean.top;
    record.conf_before = clean.top_score;

    const auto candidate =
        one_pixel_attack(model, arm.head, x_raw, config.budget,
                         config.strategy, config.seed + j, config.evolution);
    if (candidate) {
      record.success = true;
      record.attacked_class = candidate->attacked_class;
      record.conf_after = candidate->confidence;
      record.distortion_l2 = raw_distortion(candidate->attacked, x_raw);
      annotate_bound(record, arm, x_model,
                     prepared_point(model, candidate->attacked));
    } else {
      record.attacked_class = clean.top;
      record.conf_after = clean.top_score;
    }
    report.records.push_back(std::move(record));
  }

  auto& agg = report.aggregates;
  agg.attempted = report.records.size();
  double conf_total = 0.0;
  for (const AttackRecord& r : report.records) {
    if (r.success) {
      ++agg.successes;
      conf_total += r.conf_after;
      if (!r.bound_ok) ++agg.bound_violations;
    }
  }
  agg.rate_defined = agg.attempted > 0;
  agg.attack_rate = agg.rate_defined
                        ? static_cast<double>(agg.successes) /
                              static_cast<double>(agg.attempted)
                        : 0.0;
  agg.mean_success_confidence =
      agg.successes == 0 ? 0.0
                         : conf_total / static_cast<double>(agg.successes);
  return report;
}

std::vector<AttackReport> attack_campaign(const std::vector<AttackArm>& arms,
                                          const LabeledDataset& data,
                                          const CampaignConfig& config) {
  std::vector<AttackReport> reports;
  reports.reserve(arms.size());
  for (const AttackArm& arm : arms) {
    reports.push_back(one_pixel_campaign(arm, data, config));
  }
  return reports;
}

std::vector<ScatterCell> scatter_table(
    const std::vector<AttackRecord>& records) {
  std::map<std::pair<int, int>, size_t> bins;
  for (const AttackRecord& r : records) {
    if (!r.success) continue;
    const int before = static_cast<int>(std::lround(r.conf_before * 10.0));
    const int after = static_cast<int>(std::lround(r.conf_after * 10.0));
    ++bins[{before, after}];
  }
  std::vector<ScatterCell> table;
  table.reserve(bins.size());
  for (const auto& [key, count] : bins) {
    table.push_back({key.first / 10.0, key.second / 10.0, count});
  }
  return table;
}

namespace {

std::string fmt_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::ofstream open_csv(const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::Io, "cannot open " + path + " for writing");
  return out;
}

}  // namespace

void write_attack_csv(const std::string& path,
                      const std::vector<AttackRecord>& records) {
  std::ofstream out = open_csv(path);
  out << "sample_id,head,true_class,pred_class,attacked_class,success,"
         "distortion_l2,conf_before,conf_after\n";
  for (const AttackRecord& r : records) {
    out << r.sample_id << ',' << head_name(r.head) << ',' << r.true_class
        << ',' << r.pred_class << ',' << r.attacked_class << ','
        << (r.success ? 1 : 0) << ',' << fmt_double(r.distortion_l2) << ','
        << fmt_double(r.conf_before) << ',' << fmt_double(r.conf_after)
        << '\n';
  }
  if (!out) fail(ErrorCode::Io, "short write to " + path);
}

void write_scatter_csv(const std::string& path,
                       const std::vector<ScatterCell>& table) {
  std::ofstream out = open_csv(path);
  out << "conf_before,conf_after,count\n";
  char buf[64];
  for (const ScatterCell& cell : table) {
    std::snprintf(buf, sizeof(buf), "%.1f,%.1f,%zu\n", cell.conf_before,
                  cell.conf_after, cell.count);
    out << buf;
  }
  if (!out) fail(ErrorCode::Io, "short write to " + path);
}

void write_bounds_csv(const std::string& path,
                      const std::vector<AttackRecord>& records) {
  std::ofstream out = open_csv(path);
  out << "sample_id,head,distortion_l2,lower_bound,satisfied\n";
  for (const AttackRecord& r : records) {
    if (!r.success) continue;
    out << r.sample_id << ',' << head_name(r.head) << ','
        << fmt_double(r.distortion_l2) << ',' << fmt_double(r.bound_lower)
        << ',' << (r.bound_ok ? 1 : 0) << '\n';
  }
  if (!out) fail(ErrorCode::Io, "short write to " + path);
}

void write_sweep_csv(const std::string& path,
                     const std::vector<FgsmSweepRow>& rows) {
  std::ofstream out = open_csv(path);
  out << "epsilon,accuracy,mean_confidence_misclassified\n";
  for (const FgsmSweepRow& row : rows) {
    out << fmt_double(row.epsilon) << ',' << fmt_double(row.accuracy) << ','
        << fmt_double(row.mean_confidence_misclassified) << '\n';
  }
  if (!out) fail(ErrorCode::Io, "short write to " + path);
}

}  // namespace cnet
