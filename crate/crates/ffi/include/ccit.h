#ifndef CCIT_H
#define CCIT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code returned by every fallible function.
 */
typedef enum CcitStatus {
  CCIT_STATUS_OK = 0,
  CCIT_STATUS_NULL_POINTER = 1,
  CCIT_STATUS_INVALID_ARGUMENT = 2,
  CCIT_STATUS_DATA_ERROR = 3,
  CCIT_STATUS_INTERNAL = 4,
} CcitStatus;

typedef enum CcitVariant {
  CCIT_VARIANT_V1 = 1,
  CCIT_VARIANT_V2 = 2,
} CcitVariant;

typedef enum CcitDecision {
  CCIT_DECISION_CI = 0,
  CCIT_DECISION_NOT_CI = 1,
} CcitDecision;

/**
 * Opaque dataset handle.
 */
typedef struct CcitDataset CcitDataset;

/**
 * Opaque result handle.
 */
typedef struct CcitResult CcitResult;

/**
 * Options of [`ccit_test_run`]. Start from [`ccit_test_options_default`].
 */
typedef struct CcitTestOptions {
  /**
   * Bootstrap runs to average.
   */
  size_t bootstraps;
  /**
   * Decision threshold; any negative value selects `1/sqrt(n_test)`.
   */
  double tau;
  enum CcitVariant variant;
  uint64_t seed;
  size_t rounds;
  size_t max_depth;
  double learning_rate;
  size_t min_leaf;
  double l2_reg;
} CcitTestOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or an empty string. The
 * pointer stays valid until the next call into this library on the same
 * thread.
 */
const char *ccit_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *ccit_version(void);

/**
 * Copies `rows * (dx + dy + dz)` row-major values into a new dataset.
 * Columns of each row are ordered X block, Y block, Z block.
 *
 * # Safety
 * `values` must point to that many readable doubles (it may be null when
 * `rows` is 0) and `out` must be a valid pointer.
 */
enum CcitStatus ccit_dataset_new(const double *values,
                                 size_t rows,
                                 size_t dx,
                                 size_t dy,
                                 size_t dz,
                                 struct CcitDataset **out);

/**
 * Number of rows, or 0 for a null handle.
 *
 * # Safety
 * `dataset` must be null or a live handle from [`ccit_dataset_new`].
 */
size_t ccit_dataset_rows(const struct CcitDataset *dataset);

/**
 * Releases a dataset. Null is ignored.
 *
 * # Safety
 * `dataset` must be null or a live handle that is not used afterwards.
 */
void ccit_dataset_free(struct CcitDataset *dataset);

/**
 * Defaults: 50 bootstraps, automatic threshold, variant 2, seed 0 and the
 * default boosted-trees settings.
 */
struct CcitTestOptions ccit_test_options_default(void);

/**
 * Runs the bootstrap-aggregated test on `dataset`. `options` may be null
 * for the defaults.
 *
 * # Safety
 * `dataset` must be a live handle, `options` null or valid, `out` valid.
 */
enum CcitStatus ccit_test_run(const struct CcitDataset *dataset,
                              const struct CcitTestOptions *options,
                              struct CcitResult **out);

/**
 * Mean statistic used as the dependence score; NaN for a null handle.
 *
 * # Safety
 * `result` must be null or a live handle.
 */
double ccit_result_score(const struct CcitResult *result);

/**
 * # Safety
 * `result` must be null or a live handle.
 */
double ccit_result_mean_statistic(const struct CcitResult *result);

/**
 * Threshold the decision used; NaN for a null handle.
 *
 * # Safety
 * `result` must be null or a live handle.
 */
double ccit_result_tau(const struct CcitResult *result);

/**
 * # Safety
 * `result` must be null or a live handle.
 */
size_t ccit_result_bootstraps(const struct CcitResult *result);

/**
 * # Safety
 * `result` must be null or a live handle.
 */
size_t ccit_result_n_test(const struct CcitResult *result);

/**
 * Verdict of the aggregate test. A null handle reads as CI.
 *
 * # Safety
 * `result` must be null or a live handle.
 */
enum CcitDecision ccit_result_decision(const struct CcitResult *result);

/**
 * Writes the result as JSON into a new string; release it with
 * [`ccit_string_free`].
 *
 * # Safety
 * `result` must be a live handle and `out` valid.
 */
enum CcitStatus ccit_result_to_json(const struct CcitResult *result, char **out);

/**
 * # Safety
 * `s` must be null or a string returned by this library, not freed before.
 */
void ccit_string_free(char *s);

/**
 * # Safety
 * `result` must be null or a live handle that is not used afterwards.
 */
void ccit_result_free(struct CcitResult *result);

/**
 * ROC AUC of `scores` against 0/1 `labels`, ties credited one half.
 *
 * # Safety
 * `scores` and `labels` must each point to `n` readable elements and `out`
 * must be valid.
 */
enum CcitStatus ccit_roc_auc(const double *scores, const uint8_t *labels, size_t n, double *out);

/**
 * `1/sqrt(n_test)`.
 *
 * # Safety
 * `out` must be valid.
 */
enum CcitStatus ccit_default_tau(size_t n_test, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CCIT_H */
