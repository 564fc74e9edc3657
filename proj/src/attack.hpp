#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "centroids.hpp"
#include "dataset.hpp"
#include "gauss.hpp"
#include "network.hpp"

namespace cnet {

enum class HeadKind : uint8_t { Softmax = 0, Gauss = 1 };

/// Scoring stage an attack targets: softmax probabilities over the logits,
/// or Gauss confidences over penultimate outputs.
struct ScoringHead {
  HeadKind kind = HeadKind::Softmax;
  const GaussHead* gauss = nullptr;  // required when kind == Gauss
};

const char* head_name(HeadKind kind);

/// One attack target: the model, the head under attack, the centroid system
/// the distortion bound is evaluated against (Z for softmax, C for Gauss)
/// and a valid upper bound on the Lipschitz modulus of f_p.
struct AttackArm {
  const NetworkModel* model = nullptr;
  ScoringHead head;
  const CentroidSystem* centroids = nullptr;
  double lipschitz = 1.0;
};

struct PixelBudget {
  ImageGeometry geometry;
  double lo = 0.0;
  double hi = 1.0;
  uint32_t candidates_per_channel = 16;
};

enum class PixelStrategy : uint8_t { Exhaustive = 0, Evolution = 1 };

/// Differential-evolution search parameters for PixelStrategy::Evolution.
/// Candidates snap to the same position/value grid the exhaustive search
/// walks, so evolution can never succeed where exhaustive does not.
struct EvolutionConfig {
  size_t population = 32;
  size_t iterations = 30;
  double differential_weight = 0.5;
  double crossover_rate = 0.9;
};

struct AttackRecord {
  size_t sample_id = 0;
  HeadKind head = HeadKind::Softmax;
  uint32_t true_class = 0;
  uint32_t pred_class = 0;
  uint32_t attacked_class = 0;
  bool success = false;
  double distortion_l2 = 0.0;  // raw input space
  double conf_before = 0.0;
  double conf_after = 0.0;
  double epsilon = 0.0;      // FGSM step, 0 for one-pixel records
  double bound_lower = 0.0;  // Theorem-2 lower bound, successes only
  bool bound_ok = true;      // distortion_l2 ≥ bound_lower
};

struct AttackAggregates {
  double attack_rate = 0.0;
  double mean_success_confidence = 0.0;
  size_t attempted = 0;
  size_t successes = 0;
  size_t bound_violations = 0;
  bool rate_defined = false;
};

struct AttackReport {
  std::vector<AttackRecord> records;
  AttackAggregates aggregates;
};

/// x̃ = clip(x + ε·sign(∇ₓ loss), lo, hi) on the raw features; the loss is
/// cross-entropy at `label` for the softmax head and squared distance to the
/// label's centroid for the Gauss head.
Vector fgsm_attack(const NetworkModel& model, const ScoringHead& head,
                   const Vector& x_raw, uint32_t label, double epsilon,
                   double lo, double hi);

struct FgsmSweepRow {
  double epsilon = 0.0;
  double accuracy = 0.0;
  double mean_confidence_misclassified = 0.0;
};

struct FgsmSweepOutput {
  std::vector<FgsmSweepRow> rows;
  /// Every (sample, ε) pair whose prediction flipped, with distortion bound
  /// columns filled in.
  std::vector<AttackRecord> successes;
};

/// Figure-style sweep: one gradient sign per image, evaluated over the
/// ascending ε grid. Accuracy is measured against the true labels, so the
/// ε = 0 row reproduces the clean accuracy exactly.
FgsmSweepOutput fgsm_sweep(const AttackArm& arm, const LabeledDataset& data,
                           const std::vector<double>& epsilons, double lo,
                           double hi);

struct OnePixelCandidate {
  size_t position = 0;  // pixel index in row-major image order
  Vector values;        // new value per channel
  Vector attacked;      // full raw image after the edit
  uint32_t attacked_class = 0;
  double confidence = 0.0;  // head score of attacked_class on the edit
};

/// Most harmful single-pixel edit: among candidates that flip the
/// prediction, the one with maximal wrong-class confidence; nullopt when no
/// candidate flips. Exhaustive walks every position × value-grid
/// combination; Evolution runs seeded differential evolution over the same
/// grid.
std::optional<OnePixelCandidate> one_pixel_attack(
    const NetworkModel& model, const ScoringHead& head, const Vector& x_raw,
    const PixelBudget& budget, PixelStrategy strategy, uint64_t seed,
    const EvolutionConfig& evolution = {});

struct CampaignConfig {
  size_t sample_count = 0;
  uint64_t seed = 0;
  PixelStrategy strategy = PixelStrategy::Exhaustive;
  PixelBudget budget;
  EvolutionConfig evolution;
};

/// One-pixel campaign over a seeded sample for a single arm.
AttackReport one_pixel_campaign(const AttackArm& arm,
                                const LabeledDataset& data,
                                const CampaignConfig& config);

/// Runs the same seeded sample through every arm (softmax and Gauss
/// typically), so the reports are directly comparable.
std::vector<AttackReport> attack_campaign(const std::vector<AttackArm>& arms,
                                          const LabeledDataset& data,
                                          const CampaignConfig& config);

struct ScatterCell {
  double conf_before = 0.0;
  double conf_after = 0.0;
  size_t count = 0;
};

/// (conf_before, conf_after, count) over successful records, binned to one
/// decimal; cell counts sum to the number of successes.
std::vector<ScatterCell> scatter_table(const std::vector<AttackRecord>& records);

void write_attack_csv(const std::string& path,
                      const std::vector<AttackRecord>& records);
void write_scatter_csv(const std::string& path,
                       const std::vector<ScatterCell>& table);
void write_bounds_csv(const std::string& path,
                      const std::vector<AttackRecord>& records);
void write_sweep_csv(const std::string& path,
                     const std::vector<FgsmSweepRow>& rows);

}  // namespace cnet
