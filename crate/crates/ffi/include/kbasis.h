/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef KBASIS_H
#define KBASIS_H

#include <stdint.h>
#include <stddef.h>

#define KB_MODE_TRUNCATED 0

#define KB_MODE_MODULAR 1

typedef enum KbStatus {
  KB_STATUS_OK = 0,
  KB_STATUS_INVALID_ARGUMENT = 1,
  KB_STATUS_NULL_POINTER = 2,
  /*
   Memory cap exceeded.
   */
  KB_STATUS_RESOURCE = 3,
  /*
   A Rust panic was caught at the boundary.
   */
  KB_STATUS_INTERNAL = 4,
} KbStatus;

/*
 Opaque model handle.
 */
typedef struct KbModel KbModel;

/*
 Opaque result of a Monte Carlo run. The histogram is stored as a dense
 list of `(value, count)` pairs in ascending value order.
 */
typedef struct KbTrialStats KbTrialStats;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message for the most recent failure on this thread, or NULL. The pointer
 stays valid until the next failing call on the same thread.
 */
const char *kb_last_error_message(void);

/*
 Library version as a static NUL-terminated string.
 */
const char *kb_version(void);

/*
 Creates a Bernoulli(`p`) model, or a fixed-size model with `fixed_size`
 elements when `fixed_size` is nonzero.

 # Safety
 `out` must be valid for writes.
 */
enum KbStatus kb_model_new(size_t n,
                           size_t k,
                           double alpha,
                           double p,
                           uint32_t mode,
                           size_t fixed_size,
                           struct KbModel **out);

/*
 # Safety
 `model` must be NULL or a handle from `kb_model_new` not yet freed.
 */
void kb_model_free(struct KbModel *model);

/*
 Target window `[lo, hi]` of the model.

 # Safety
 `model` must be a live handle; `lo` and `hi` valid for writes.
 */
enum KbStatus kb_model_window(const struct KbModel *model, size_t *lo, size_t *hi);

/*
 # Safety
 `out` must be valid for writes.
 */
enum KbStatus kb_threshold_p(size_t n,
                             size_t k,
                             double alpha,
                             double a_n,
                             uint32_t mode,
                             double *out);

/*
 # Safety
 `out` must be valid for writes.
 */
enum KbStatus kb_limit_basis_prob(size_t k, double alpha, double a, uint32_t mode, double *out);

/*
 Exact `E(X)` for 2-bases.

 # Safety
 `out` must be valid for writes.
 */
enum KbStatus kb_exact_mean_missing_k2(size_t n,
                                       double p,
                                       double alpha,
                                       uint32_t mode,
                                       double *out);

/*
 # Safety
 `out` must be valid for writes.
 */
enum KbStatus kb_asympt_mean_missing(size_t n,
                                     double p,
                                     double alpha,
                                     size_t k,
                                     uint32_t mode,
                                     double *out);

/*
 Runs `trials` trials under `seed`. `memory_cap` bounds the sumset
 bitmap in bytes; 0 selects the library default.

 # Safety
 `model` must be a live handle; `out` valid for writes.
 */
enum KbStatus kb_run_trials(const struct KbModel *model,
                            uint64_t trials,
                            uint64_t seed,
                            uint64_t memory_cap,
                            struct KbTrialStats **out);

/*
 # Safety
 `stats` must be NULL or a handle from `kb_run_trials` not yet freed.
 */
void kb_stats_free(struct KbTrialStats *stats);

/*
 Number of trials; 0 for a NULL handle.

 # Safety
 `stats` must be NULL or a live handle.
 */
uint64_t kb_stats_trials(const struct KbTrialStats *stats);

/*
 Trials in which the set was a basis; 0 for a NULL handle.

 # Safety
 `stats` must be NULL or a live handle.
 */
uint64_t kb_stats_basis_successes(const struct KbTrialStats *stats);

/*
 Mean of X; NaN for a NULL handle.

 # Safety
 `stats` must be NULL or a live handle.
 */
double kb_stats_mean_x(const struct KbTrialStats *stats);

/*
 Number of distinct values of X observed.

 # Safety
 `stats` must be NULL or a live handle.
 */
size_t kb_stats_histogram_len(const struct KbTrialStats *stats);

/*
 The `index`-th histogram entry in ascending value order.

 # Safety
 `stats` must be a live handle; `value` and `count` valid for writes.
 */
enum KbStatus kb_stats_histogram_entry(const struct KbTrialStats *stats,
                                       size_t index,
                                       uint64_t *value,
                                       uint64_t *count);

/*
 Basis-probability estimate with its 95% Wilson interval.

 # Safety
 `stats` must be a live handle; the out pointers valid for writes.
 */
enum KbStatus kb_stats_basis_estimate(const struct KbTrialStats *stats,
                                      double *p_hat,
                                      double *ci_lo,
                                      double *ci_hi);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* KBASIS_H */
