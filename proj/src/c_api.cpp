#include "cnet/cnet.h"

#include <cstring>
#include <new>
#include <string>

#include "attack.hpp"
#include "centroids.hpp"
#include "dataset.hpp"
#include "error.hpp"
#include "gauss.hpp"
#include "network.hpp"
#include "report.hpp"
#include "serialize.hpp"

struct cnet_dataset {
  cnet::LabeledDataset impl;
};

struct cnet_model {
  cnet::NetworkModel impl;
};

struct cnet_gauss_head {
  cnet::GaussHead impl;
};

namespace {

thread_local std::string g_last_error;

cnet_status map_code(cnet::ErrorCode code) {
  switch (code) {
    case cnet::ErrorCode::InvalidArgument: return CNET_ERR_INVALID_ARGUMENT;
    case cnet::ErrorCode::DimensionMismatch: return CNET_ERR_DIMENSION_MISMATCH;
    case cnet::ErrorCode::Io: return CNET_ERR_IO;
    case cnet::ErrorCode::Format: return CNET_ERR_FORMAT;
    case cnet::ErrorCode::Numeric: return CNET_ERR_NUMERIC;
    case cnet::ErrorCode::EmptyClass: return CNET_ERR_EMPTY_CLASS;
    case cnet::ErrorCode::NoConvergence: return CNET_ERR_NO_CONVERGENCE;
  }
  return CNET_ERR_UNKNOWN;
}

cnet_status set_error(cnet_status status, const char* message) {
  g_last_error = message;
  return status;
}

/// Runs fn with the standard exception-to-status translation.
template <typename Fn>
cnet_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return CNET_OK;
  } catch (const cnet::Error& e) {
    g_last_error = e.what();
    return map_code(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return CNET_ERR_UNKNOWN;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return CNET_ERR_UNKNOWN;
  }
}

cnet::ScoringHead make_scoring_head(cnet_head_kind kind,
                                    const cnet_gauss_head* gauss_head) {
  cnet::ScoringHead head;
  head.kind = kind == CNET_HEAD_SOFTMAX ? cnet::HeadKind::Softmax
                                        : cnet::HeadKind::Gauss;
  head.gauss = gauss_head ? &gauss_head->impl : nullptr;
  return head;
}

/// Builds the attack arm for a model/head pair: the centroid system the
/// distortion bound uses and the penultimate Lipschitz bound.
struct ArmContext {
  cnet::CentroidSystem centroids;
  cnet::AttackArm arm;
};

ArmContext make_arm(const cnet_model* model, cnet_head_kind kind,
                    const cnet_gauss_head* gauss_head) {
  if (kind == CNET_HEAD_GAUSS && gauss_head == nullptr) {
    cnet::fail(cnet::ErrorCode::InvalidArgument,
               "the gauss head requires a loaded head object");
  }
  ArmContext ctx;
  if (kind == CNET_HEAD_SOFTMAX) {
    ctx.centroids = cnet::equidistant_centroids(model->impl.final_weight());
  } else {
    ctx.centroids = gauss_head->impl.centroids;
  }
  ctx.arm.model = &model->impl;
  ctx.arm.head = make_scoring_head(kind, gauss_head);
  ctx.arm.centroids = &ctx.centroids;
  ctx.arm.lipschitz = cnet::penultimate_lipschitz_upper_bound(model->impl);
  return ctx;
}

}  // namespace

extern "C" {

const char* cnet_status_name(cnet_status status) {
  switch (status) {
    case CNET_OK: return "ok";
    case CNET_ERR_INVALID_ARGUMENT: return "invalid argument";
    case CNET_ERR_DIMENSION_MISMATCH: return "dimension mismatch";
    case CNET_ERR_IO: return "io error";
    case CNET_ERR_FORMAT: return "format error";
    case CNET_ERR_NUMERIC: return "numeric error";
    case CNET_ERR_EMPTY_CLASS: return "empty class";
    case CNET_ERR_NO_CONVERGENCE: return "no convergence";
    case CNET_ERR_UNKNOWN: break;
  }
  return "unknown error";
}

const char* cnet_last_error(void) { return g_last_error.c_str(); }

void cnet_version(int* major, int* minor, int* patch) {
  if (major) *major = 1;
  if (minor) *minor = 0;
  if (patch) *patch = 0;
}

cnet_status cnet_dataset_load_idx(const char* images_path,
                                  const char* labels_path,
                                  cnet_dataset** out) {
  if (!images_path || !labels_path || !out) {
    return set_error(CNET_ERR_INVALID_ARGUMENT, "null argument");
  }
  return guarded([&] {
    *out = new cnet_dataset{cnet::load_idx(images_path, labels_path)};
  });
}

cnet_status cnet_dataset_synth_blobs(uint32_t classes, uint32_t per_class,
                                     uint32_t dim, double separation,
                                     uint64_t seed, cnet_dataset** out) {
  if (!out) return set_error(CNET_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    *out = new cnet_dataset{
        cnet::synth_blobs(classes, per_class, dim, separation, seed)};
  });
}

cnet_status cnet_dataset_split(const cnet_dataset* dataset, double fraction,
                               uint64_t seed, cnet_dataset** train_out,
                               cnet_dataset** test_out) {
  if (!dataset || !train_out || !test_out) {
    return set_error(CNET_ERR_INVALID_ARGUMENT, "null argument");
  }
  return guarded([&] {
    auto [train, test] = cnet::split(dataset->impl, fraction, seed);
    *train_out = new cnet_dataset{std::move(train)};
    *test_out = new cnet_dataset{std::move(test)};
  });
}

uint32_t cnet_dataset_count(const cnet_dataset* dataset) {
  return dataset ? static_cast<uint32_t>(dataset->impl.count()) : 0;
}

uint32_t cnet_dataset_dim(const cnet_dataset* dataset) {
  return dataset ? static_cast<uint32_t>(dataset->impl.dim()) : 0;
}

uint32_t cnet_dataset_classes(const cnet_dataset* dataset) {
  return dataset ? dataset->impl.classes() : 0;
}

void cnet_dataset_free(cnet_dataset* dataset) { delete dataset; }

cnet_status cnet_model_create(const uint32_t* dims, uint32_t n_dims,
                              int bias_lift, uint64_t seed, cnet_model** out) {
  if (!dims || !out) {
    return set_error(CNET_ERR_INVALID_ARGUMENT, "null argument");
  }
  if (n_dims < 2) {
    return set_error(CNET_ERR_INVALID_ARGUMENT,
                     "a network needs at least input and output dimensions");
  }
  return guarded([&] {
    std::vector<size_t> sizes(dims, dims + n_dims);
    if (bias_lift) sizes[0] += 1;
    *out = new cnet_model{cnet::NetworkModel(sizes, seed)};
  });
}

cnet_status cnet_model_train(cnet_model* model, const cnet_dataset* data,
                             uint32_t epochs, uint32_t batch_size,
                             double learning_rate, double momentum,
                             uint64_t seed) {
  if (!model || !data) {
    return set_error(CNET_ERR_INVALID_ARGUMENT, "null argument");
  }
  return guarded([&] {
    cnet::TrainConfig config;
    config.epochs = epochs;
    config.batch_size = batch_size;
    config.learning_rate = learning_rate;
    config.momentum = momentum;
    config.seed = seed;
    cnet::train(model->impl, data->impl, config);
  });
}

cnet_status cnet_model_accuracy(const cnet_model* model,
                                const cnet_dataset* data, double* out) {
  if (!model || !data || !out) {
    return set_error(CNET_ERR_INVALID_ARGUMENT, "null argument");
  }
  return guarded([&] { *out = cnet::softmax_accuracy(model->impl, data->impl); });
}

cnet_status cnet_model_save(const cnet_model* model, const char* path) {
  if (!model || !path) {
    return set_error(CNET_ERR_INVALID_ARGUMENT, "null argument");
  }
  return guarded([&] { cnet::save_model(model->impl, path); });
}

cnet_status cnet_model_load(const char* path, cnet_model** out) {
  if (!path || !out) {
    return set_error(CNET_ERR_INVALID_ARGUMENT, "null argument");
  }
  return guarded([&] { *out = new cnet_model{cnet::load_model(path)}; });
}

void cnet_model_free(cnet_model* model) { delete model; }

cnet_status cnet_model_verify_equivalence(const cnet_model* model,
                                          const cnet_dataset* data,
                                          cnet_verify_report* out) {
  if (!model || !data || !out) {
    return set_error(CNET_ERR_INVALID_ARGUMENT, "null argument");
  }
  return guarded([&] {
    const cnet::DenseMatrix inputs =
        cnet::prepared_inputs(model->impl, data->impl.features());
    const cnet::EquivalenceReport report =
        cnet::verify_equivalence(model->impl, inputs);
    out->match_fraction = report.match_fraction();
    out->total_points = report.total;
    out->tied_points = report.ties;
    out->mismatches = report.mismatches;
    out->equidistance_spread = report.spread;
    out->system_residual = report.system_residual;
  });
}

cnet_status cnet_model_tailor(cnet_model* model, const cnet_dataset* data,
                              uint32_t epochs, uint32_t batch_size,
                              double learning_rate, cnet_refresh refresh,
                              uint64_t seed, double* final_loss_out,
                              cnet_gauss_head** head_out) {
  if (!model || !data || !head_out) {
    return set_error(CNET_ERR_INVALID_ARGUMENT, "null argument");
  }
  return guarded([&] {
    cnet::TailorConfig config;
    config.epochs = epochs;
    config.batch_size = batch_size;
    config.learning_rate = learning_rate;
    config.refresh = refresh == CNET_REFRESH_ONCE
                         ? cnet::CentroidRefresh::Once
                         : cnet::CentroidRefresh::EveryEpoch;
    config.seed = seed;
    cnet::TailorResult result =
        cnet::tailor_network(model->impl, data->impl, config);
    if (final_loss_out) *final_loss_out = result.final_loss;
    *head_out = new cnet_gauss_head{std::move(result.head)};
  });
}

cnet_status cnet_gauss_accuracy(const cnet_model* model,
                                const cnet_gauss_head* head,
                                const cnet_dataset* data, double* out) {
  if (!model || !head || !data || !out) {
    return set_error(CNET_ERR_INVALID_ARGUMENT, "null argument");
  }
  return guarded([&] {
    *out = cnet::gauss_accuracy(model->impl, head->impl, data->impl);
  });
}

cnet_status cnet_gauss_head_save(const cnet_gauss_head* head,
                                 const char* path) {
  if (!head || !path) {
    return set_error(CNET_ERR_INVALID_ARGUMENT, "null argument");
  }
  return guarded([&] { cnet::save_gauss_head(head->impl, path); });
}

cnet_status cnet_gauss_head_load(const char* path, cnet_gauss_head** out) {
  if (!path || !out) {
    return set_error(CNET_ERR_INVALID_ARGUMENT, "null argument");
  }
  return guarded([&] {
    *out = new cnet_gauss_head{cnet::load_gauss_head(path)};
  });
}

void cnet_gauss_head_free(cnet_gauss_head* head) { delete head; }

cnet_status cnet_fgsm_sweep(const cnet_model* model, cnet_head_kind head,
                            const cnet_gauss_head* gauss_head,
                            const cnet_dataset* data, const double* epsilons,
                            uint32_t n_eps, double clip_lo, double clip_hi,
                            const char* csv_path, double* accuracy_out,
                            double* confidence_out) {
  if (!model || !data || !epsilons || n_eps == 0) {
    return set_error(CNET_ERR_INVALID_ARGUMENT, "null argument");
  }
  return guarded([&] {
    ArmContext ctx = make_arm(model, head, gauss_head);
    const std::vector<double> grid(epsilons, epsilons + n_eps);
    const cnet::FgsmSweepOutput sweep =
        cnet::fgsm_sweep(ctx.arm, data->impl, grid, clip_lo, clip_hi);
    if (csv_path) cnet::write_sweep_csv(csv_path, sweep.rows);
    for (uint32_t e = 0; e < n_eps; ++e) {
      if (accuracy_out) accuracy_out[e] = sweep.rows[e].accuracy;
      if (confidence_out) {
        confidence_out[e] = sweep.rows[e].mean_confidence_misclassified;
      }
    }
  });
}

cnet_status cnet_one_pixel_campaign(
    const cnet_model* model, cnet_head_kind head,
    const cnet_gauss_head* gauss_head, const cnet_dataset* data,
    uint32_t sample_count, uint64_t seed, cnet_pixel_strategy strategy,
    uint32_t value_candidates, double value_lo, double value_hi,
    const char* csv_path, const char* scatter_csv_path,
    const char* bounds_csv_path, cnet_attack_aggregate* aggregate_out) {
  if (!model || !data) {
    return set_error(CNET_ERR_INVALID_ARGUMENT, "null argument");
  }
  return guarded([&] {
    ArmContext ctx = make_arm(model, head, gauss_head);
    cnet::CampaignConfig config;
    config.sample_count = sample_count;
    config.seed = seed;
    config.strategy = strategy == CNET_PIXEL_EXHAUSTIVE
                          ? cnet::PixelStrategy::Exhaustive
                          : cnet::PixelStrategy::Evolution;
    config.budget.geometry = data->impl.metadata().geometry;
    config.budget.lo = value_lo;
    config.budget.hi = value_hi;
    config.budget.candidates_per_channel = value_candidates;

    const cnet::AttackReport report =
        cnet::one_pixel_campaign(ctx.arm, data->impl, config);
    if (csv_path) cnet::write_attack_csv(csv_path, report.records);
    if (scatter_csv_path) {
      cnet::write_scatter_csv(scatter_csv_path,
                              cnet::scatter_table(report.records));
    }
    if (bounds_csv_path) cnet::write_bounds_csv(bounds_csv_path, report.records);
    if (aggregate_out) {
      aggregate_out->attack_rate = report.aggregates.attack_rate;
      aggregate_out->mean_success_confidence =
          report.aggregates.mean_success_confidence;
      aggregate_out->attempted = report.aggregates.attempted;
      aggregate_out->successes = report.aggregates.successes;
      aggregate_out->bound_violations = report.aggregates.bound_violations;
      aggregate_out->rate_defined = report.aggregates.rate_defined ? 1 : 0;
    }
  });
}

cnet_status cnet_rank_confidence(const cnet_model* model,
                                 const cnet_gauss_head* head,
                                 const cnet_dataset* data, uint32_t k,
                                 const char* csv_path, uint64_t* ids_out,
                                 double* confidence_out, int* outlier_out,
                                 uint32_t* n_out) {
  if (!model || !head || !data || k == 0) {
    return set_error(CNET_ERR_INVALID_ARGUMENT, "null argument");
  }
  return guarded([&] {
    const std::vector<cnet::RankEntry> ranking =
        cnet::rank_by_confidence(model->impl, head->impl, data->impl);
    if (csv_path) cnet::write_rank_csv(csv_path, ranking, k);

    const size_t top = std::min<size_t>(k, ranking.size());
    const size_t bottom = std::min<size_t>(k, ranking.size() - top);
    uint32_t filled = 0;
    auto emit = [&](const cnet::RankEntry& e) {
      if (ids_out) ids_out[filled] = e.sample_id;
      if (confidence_out) confidence_out[filled] = e.confidence;
      if (outlier_out) outlier_out[filled] = e.outlier ? 1 : 0;
      ++filled;
    };
    for (size_t i = 0; i < top; ++i) emit(ranking[i]);
    for (size_t i = 0; i < bottom; ++i) {
      emit(ranking[ranking.size() - bottom + i]);
    }
    if (n_out) *n_out = filled;
  });
}

}  // extern "C"
