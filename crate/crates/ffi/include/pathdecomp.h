#ifndef PATHDECOMP_H
#define PATHDECOMP_H

/* Generated by cbindgen from crates/ffi/src. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every call.
 */
typedef enum PdStatus {
  PD_STATUS_OK = 0,
  PD_STATUS_NULL_POINTER = 1,
  /**
   * Bad argument or invalid table.
   */
  PD_STATUS_INVALID_ARGUMENT = 2,
  /**
   * Too many factors for the requested scheme.
   */
  PD_STATUS_CAPACITY = 3,
  /**
   * IPF did not converge.
   */
  PD_STATUS_CONVERGENCE = 4,
  /**
   * The outcome callback failed or returned a non-finite value.
   */
  PD_STATUS_CALLBACK = 5,
  /**
   * A Rust panic was caught at the boundary.
   */
  PD_STATUS_INTERNAL = 6,
} PdStatus;

/**
 * Decomposition scheme for homogamy changes.
 */
typedef enum PdScheme {
  /**
   * Preferences switched first.
   */
  PD_SCHEME_SEQUENTIAL_XY = 0,
  /**
   * Availability switched first.
   */
  PD_SCHEME_SEQUENTIAL_YX = 1,
  PD_SCHEME_PATH_INDEPENDENT = 2,
  PD_SCHEME_SHAPLEY = 3,
} PdScheme;

/**
 * Scheme for the generic callback decomposition.
 */
typedef enum PdGenericScheme {
  /**
   * Factors switched in the order given by `order`.
   */
  PD_GENERIC_SCHEME_SEQUENTIAL = 0,
  PD_GENERIC_SCHEME_PATH_INDEPENDENT = 1,
  PD_GENERIC_SCHEME_SHAPLEY = 2,
} PdGenericScheme;

/**
 * Opaque contingency table.
 */
typedef struct PdTable PdTable;

typedef struct PdHomogamyResult {
  double preference;
  double availability;
  double interaction;
  double total;
  double observed_share_from;
  double observed_share_to;
  /**
   * Nonzero when a zero-cell adjustment was applied.
   */
  int32_t zero_adjusted;
  double zero_adjustment;
} PdHomogamyResult;

/**
 * Outcome callback: `values` holds `n` factor values for one corner.
 * Write the outcome to `*out` and return 0, or return nonzero to abort.
 */
typedef int32_t (*PdOutcomeFn)(const double *values, size_t n, void *user_data, double *out);

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL.
 * Valid until the next failing call on the same thread.
 */
const char *pd_last_error(void);

/**
 * Creates a `k`×`k` table from row-major `counts` (rows = husbands).
 *
 * # Safety
 * `counts` must point to `k * k` readable doubles and `out` must be writable.
 */
enum PdStatus pd_table_new(size_t k, const double *counts, struct PdTable **out);

/**
 * Releases a table. NULL is ignored.
 *
 * # Safety
 * `table` must come from [`pd_table_new`] and not be freed twice.
 */
void pd_table_free(struct PdTable *table);

/**
 * Number of education levels.
 *
 * # Safety
 * `table` must be a live handle or NULL.
 */
size_t pd_table_k(const struct PdTable *table);

/**
 * Share of couples on the diagonal.
 *
 * # Safety
 * `table` must be a live handle and `out` writable.
 */
enum PdStatus pd_homogamy_share(const struct PdTable *table, double *out);

/**
 * Decomposes the change in homogamy share from `t0` to `t1` into
 * preference, availability and interaction parts.
 *
 * # Safety
 * `t0` and `t1` must be live handles and `out` writable.
 */
enum PdStatus pd_decompose_homogamy(const struct PdTable *t0,
                                    const struct PdTable *t1,
                                    enum PdScheme scheme,
                                    double ipf_tol,
                                    size_t ipf_max_iter,
                                    double zero_adjust,
                                    struct PdHomogamyResult *out);

/**
 * Decomposes `f(final) - f(baseline)` over `n` scalar factors.
 *
 * `order` is a permutation of `0..n` and is read only for the sequential
 * scheme. `components` receives `n` values. `interaction` and `total` are
 * optional.
 *
 * # Safety
 * `baseline`, `final_values` and `components` must hold `n` doubles;
 * `order`, when read, must hold `n` indices.
 */
enum PdStatus pd_decompose(size_t n,
                           const double *baseline,
                           const double *final_values,
                           enum PdGenericScheme scheme,
                           const size_t *order,
                           PdOutcomeFn outcome,
                           void *user_data,
                           double *components,
                           double *interaction,
                           double *total);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PATHDECOMP_H */
