/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#ifndef GRADECAST_H
#define GRADECAST_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum GcStatus {
  GC_STATUS_OK = 0,
  GC_STATUS_NULL_POINTER = 1,
  GC_STATUS_IO = 2,
  GC_STATUS_DATA = 3,
  GC_STATUS_USAGE = 4,
  GC_STATUS_NUMERICAL = 5,
  GC_STATUS_PANIC = 6,
} GcStatus;

// Assessment components in chronological order.
typedef enum GcFeature {
  GC_FEATURE_T1 = 0,
  GC_FEATURE_T2 = 1,
  GC_FEATURE_CW = 2,
  GC_FEATURE_MTE = 3,
  GC_FEATURE_ETE = 4,
} GcFeature;

// Parsed or generated student records.
typedef struct GcCohort GcCohort;

// A fitted pipeline with its view metadata.
typedef struct GcModel GcModel;

// Cross-validated metrics: mean and population std over folds.
typedef struct GcMetrics {
  double r2_mean;
  double r2_std;
  double mae_mean;
  double mae_std;
  double mse_mean;
  double mse_std;
  double rmse_mean;
  double rmse_std;
} GcMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. The pointer is
// valid until the next `gc_*` call on the same thread.
const char *gc_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *gc_version(void);

// `Σ weights[i]·scores[i]` over the first `n` components in chronological
// order. Scores must lie in [0, 100]; weights must be non-negative and sum
// to 1.
//
// # Safety
// `scores` and `weights` must point to `n` readable doubles; `out` to one
// writable double.
enum GcStatus gc_composite_score(const double *scores,
                                 const double *weights,
                                 size_t n,
                                 double *out);

// Loads a cohort CSV. Rejected rows are skipped.
//
// # Safety
// `path` must be a NUL-terminated string; `out` must be writable.
enum GcStatus gc_cohort_load(const char *path, struct GcCohort **out);

// Generates a synthetic cohort with default calibration.
//
// # Safety
// `out` must be writable.
enum GcStatus gc_cohort_synthetic(size_t n_students, uint64_t seed, struct GcCohort **out);

// # Safety
// `cohort` must be a live handle; `out` must be writable.
enum GcStatus gc_cohort_len(const struct GcCohort *cohort, size_t *out);

// Pearson correlation of a component with the total over records where the
// component is present.
//
// # Safety
// `cohort` must be a live handle; `out` must be writable.
enum GcStatus gc_cohort_correlation(const struct GcCohort *cohort,
                                    enum GcFeature feature,
                                    double *out);

// Releases a cohort. Null is ignored.
//
// # Safety
// `cohort` must come from this library and not be used afterwards.
void gc_cohort_free(struct GcCohort *cohort);

// Cross-validates `pipeline` (e.g. "vae+et", "gru") on `view` ("d1",
// "d2-mte", "d2-ete"). `settings` holds optional `key = value` lines and
// may be null.
//
// # Safety
// String arguments must be NUL-terminated; `cohort` live; `out` writable.
enum GcStatus gc_evaluate(const struct GcCohort *cohort,
                          const char *view,
                          const char *pipeline,
                          uint64_t seed,
                          const char *settings,
                          struct GcMetrics *out);

// Fits `pipeline` on every complete row of `view`.
//
// # Safety
// String arguments must be NUL-terminated (`settings` may be null);
// `cohort` live; `out` writable.
enum GcStatus gc_model_train(const struct GcCohort *cohort,
                             const char *view,
                             const char *pipeline,
                             uint64_t seed,
                             const char *settings,
                             struct GcModel **out);

// # Safety
// `path` must be NUL-terminated; `out` writable.
enum GcStatus gc_model_load(const char *path, struct GcModel **out);

// # Safety
// `model` must be live; `path` NUL-terminated.
enum GcStatus gc_model_save(const struct GcModel *model, const char *path);

// Number of input columns the model expects.
//
// # Safety
// `model` must be live; `out` writable.
enum GcStatus gc_model_n_features(const struct GcModel *model, size_t *out);

// Predicts totals for `n_rows` row-major rows of `n_cols` raw feature
// values, in the column order of the model's view.
//
// # Safety
// `x` must hold `n_rows * n_cols` doubles and `out` room for `n_rows`.
enum GcStatus gc_model_predict(const struct GcModel *model,
                               const double *x,
                               size_t n_rows,
                               size_t n_cols,
                               double *out);

// Releases a model. Null is ignored.
//
// # Safety
// `model` must come from this library and not be used afterwards.
void gc_model_free(struct GcModel *model);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GRADECAST_H */
