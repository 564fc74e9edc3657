/*
 * cnet — centroid-based network toolkit, C API.
 *
 * Every object is an opaque handle created and released by this library.
 * Functions return CNET_OK on success; on failure they return an error code
 * and leave a human-readable detail string in the calling thread, retrievable
 * via cnet_last_error(). Out-parameters are untouched on failure.
 */

#ifndef CNET_H
#define CNET_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cnet_status {
  CNET_OK = 0,
  CNET_ERR_INVALID_ARGUMENT = 1,
  CNET_ERR_DIMENSION_MISMATCH = 2,
  CNET_ERR_IO = 3,
  CNET_ERR_FORMAT = 4,
  CNET_ERR_NUMERIC = 5,
  CNET_ERR_EMPTY_CLASS = 6,
  CNET_ERR_NO_CONVERGENCE = 7,
  CNET_ERR_UNKNOWN = 8
} cnet_status;

const char* cnet_status_name(cnet_status status);

/* Detail message for the most recent failure on this thread. */
const char* cnet_last_error(void);

void cnet_version(int* major, int* minor, int* patch);

/* ---------------------------------------------------------------- datasets */

typedef struct cnet_dataset cnet_dataset;

cnet_status cnet_dataset_load_idx(const char* images_path,
                                  const char* labels_path,
                                  cnet_dataset** out);

cnet_status cnet_dataset_synth_blobs(uint32_t classes, uint32_t per_class,
                                     uint32_t dim, double separation,
                                     uint64_t seed, cnet_dataset** out);

cnet_status cnet_dataset_split(const cnet_dataset* dataset, double fraction,
                               uint64_t seed, cnet_dataset** train_out,
                               cnet_dataset** test_out);

uint32_t cnet_dataset_count(const cnet_dataset* dataset);
uint32_t cnet_dataset_dim(const cnet_dataset* dataset);
uint32_t cnet_dataset_classes(const cnet_dataset* dataset);

void cnet_dataset_free(cnet_dataset* dataset);

/* ------------------------------------------------------------------ models */

typedef struct cnet_model cnet_model;

/*
 * dims = {input, hidden..., classes}; hidden layers ReLU, final identity.
 * When bias_lift is nonzero the input dimension is raised by one and a
 * constant-1 feature is appended to every input at run time.
 */
cnet_status cnet_model_create(const uint32_t* dims, uint32_t n_dims,
                              int bias_lift, uint64_t seed, cnet_model** out);

cnet_status cnet_model_train(cnet_model* model, const cnet_dataset* data,
                             uint32_t epochs, uint32_t batch_size,
                             double learning_rate, double momentum,
                             uint64_t seed);

cnet_status cnet_model_accuracy(const cnet_model* model,
                                const cnet_dataset* data, double* out);

cnet_status cnet_model_save(const cnet_model* model, const char* path);
cnet_status cnet_model_load(const char* path, cnet_model** out);

void cnet_model_free(cnet_model* model);

/* ------------------------------------------------- Theorem-1 verification */

typedef struct cnet_verify_report {
  double match_fraction;     /* over non-tied points */
  uint64_t total_points;
  uint64_t tied_points;
  uint64_t mismatches;
  double equidistance_spread;
  double system_residual;
} cnet_verify_report;

cnet_status cnet_model_verify_equivalence(const cnet_model* model,
                                          const cnet_dataset* data,
                                          cnet_verify_report* out);

/* --------------------------------------------------------------- tailoring */

typedef struct cnet_gauss_head cnet_gauss_head;

typedef enum cnet_refresh {
  CNET_REFRESH_ONCE = 0,
  CNET_REFRESH_EVERY_EPOCH = 1
} cnet_refresh;

cnet_status cnet_model_tailor(cnet_model* model, const cnet_dataset* data,
                              uint32_t epochs, uint32_t batch_size,
                              double learning_rate, cnet_refresh refresh,
                              uint64_t seed, double* final_loss_out,
                              cnet_gauss_head** head_out);

cnet_status cnet_gauss_accuracy(const cnet_model* model,
                                const cnet_gauss_head* head,
                                const cnet_dataset* data, double* out);

cnet_status cnet_gauss_head_save(const cnet_gauss_head* head,
                                 const char* path);
cnet_status cnet_gauss_head_load(const char* path, cnet_gauss_head** out);

void cnet_gauss_head_free(cnet_gauss_head* head);

/* ----------------------------------------------------------------- attacks */

typedef enum cnet_head_kind {
  CNET_HEAD_SOFTMAX = 0,
  CNET_HEAD_GAUSS = 1
} cnet_head_kind;

typedef enum cnet_pixel_strategy {
  CNET_PIXEL_EXHAUSTIVE = 0,
  CNET_PIXEL_EVOLUTION = 1
} cnet_pixel_strategy;

/*
 * FGSM sweep over an ascending epsilon grid. Writes the plot-ready CSV to
 * csv_path and, when non-NULL, fills accuracy_out / confidence_out (both of
 * length n_eps). gauss_head may be NULL for the softmax head.
 */
cnet_status cnet_fgsm_sweep(const cnet_model* model, cnet_head_kind head,
                            const cnet_gauss_head* gauss_head,
                            const cnet_dataset* data, const double* epsilons,
                            uint32_t n_eps, double clip_lo, double clip_hi,
                            const char* csv_path, double* accuracy_out,
                            double* confidence_out);

typedef struct cnet_attack_aggregate {
  double attack_rate;
  double mean_success_confidence;
  uint64_t attempted;
  uint64_t successes;
  uint64_t bound_violations; /* Theorem-2 lower-bound violations */
  int rate_defined;          /* 0 when the sample was empty */
} cnet_attack_aggregate;

/*
 * One-pixel campaign over a seeded sample. Requires an image-shaped dataset;
 * the pixel geometry comes from the dataset metadata. Writes the per-sample
 * CSV to csv_path and, when the paths are non-NULL, the confidence scatter
 * table and the distortion-bound table beside it.
 */
cnet_status cnet_one_pixel_campaign(
    const cnet_model* model, cnet_head_kind head,
    const cnet_gauss_head* gauss_head, const cnet_dataset* data,
    uint32_t sample_count, uint64_t seed, cnet_pixel_strategy strategy,
    uint32_t value_candidates, double value_lo, double value_hi,
    const char* csv_path, const char* scatter_csv_path,
    const char* bounds_csv_path, cnet_attack_aggregate* aggregate_out);

/* ----------------------------------------------------------------- ranking */

/*
 * Ranks samples by the Gauss confidence of their predicted class and writes
 * the top-k/bottom-k listing to csv_path. When the out arrays are non-NULL
 * they receive 2*k entries (top block first, then bottom block); *n_out gets
 * the number filled (smaller for small datasets).
 */
cnet_status cnet_rank_confidence(const cnet_model* model,
                                 const cnet_gauss_head* head,
                                 const cnet_dataset* data, uint32_t k,
                                 const char* csv_path, uint64_t* ids_out,
                                 double* confidence_out, int* outlier_out,
                                 uint32_t* n_out);

#ifdef __cplusplus
}
#endif

#endif /* CNET_H */
