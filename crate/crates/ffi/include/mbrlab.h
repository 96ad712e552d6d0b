#ifndef MBRLAB_H
#define MBRLAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum MbrStatus {
  MBR_STATUS_OK = 0,
  MBR_STATUS_NULL_POINTER = 1,
  MBR_STATUS_INVALID_ARGUMENT = 2,
  MBR_STATUS_INVALID_DISTRIBUTION = 3,
  MBR_STATUS_SPACE_MISMATCH = 4,
  MBR_STATUS_INDEX_OUT_OF_RANGE = 5,
  MBR_STATUS_INVALID_DELTA = 6,
  MBR_STATUS_MISSING_INPUT = 7,
  MBR_STATUS_TOO_LARGE = 8,
  MBR_STATUS_SOLVER_FAILURE = 9,
  MBR_STATUS_PANIC = 10,
} MbrStatus;

typedef enum MbrHumanFamily {
  MBR_HUMAN_FAMILY_ZIPF = 0,
  MBR_HUMAN_FAMILY_DIRICHLET = 1,
} MbrHumanFamily;

/**
 * Opaque categorical distribution.
 */
typedef struct MbrCategorical MbrCategorical;

/**
 * Opaque utility function.
 */
typedef struct MbrUtility MbrUtility;

/**
 * Inputs to [`mbr_bound_eval`]. `d_size == 0` and NaN floats mean "absent".
 */
typedef struct MbrBoundInputs {
  size_t n;
  size_t d_size;
  size_t dim;
  double delta;
  double wd_hm;
  double wd_tt;
  double u_max;
  double alpha_err;
} MbrBoundInputs;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *mbr_version(void);

/**
 * Message for the last failed call on this thread, or null. Valid until
 * the next call into the library from this thread.
 */
const char *mbr_last_error_message(void);

/**
 * Distribution over `len` hypotheses; `probs` must be nonnegative and sum to 1.
 */
enum MbrStatus mbr_categorical_new(const double *probs, size_t len, struct MbrCategorical **out);

void mbr_categorical_free(struct MbrCategorical *dist);

/**
 * Number of hypotheses, or 0 for a null handle.
 */
size_t mbr_categorical_len(const struct MbrCategorical *dist);

/**
 * Copy the probabilities into `out[0..len]`; `len` must equal the size.
 */
enum MbrStatus mbr_categorical_probs(const struct MbrCategorical *dist, double *out, size_t len);

/**
 * Draw `count` indices with the given seed into `out[0..count]`.
 */
enum MbrStatus mbr_categorical_sample(const struct MbrCategorical *dist,
                                      size_t count,
                                      uint64_t seed,
                                      size_t *out);

/**
 * Empirical distribution of `count` indices over a space of `space_size`.
 */
enum MbrStatus mbr_empirical_new(size_t space_size,
                                 const size_t *indices,
                                 size_t count,
                                 struct MbrCategorical **out);

/**
 * Temperature-transformed copy of `dist`.
 */
enum MbrStatus mbr_temperature_new(const struct MbrCategorical *dist,
                                   double temperature,
                                   struct MbrCategorical **out);

/**
 * Synthetic human distribution.
 */
enum MbrStatus mbr_human_new(size_t size,
                             enum MbrHumanFamily family,
                             double param,
                             uint64_t seed,
                             struct MbrCategorical **out);

/**
 * Utility from a row-major `size × size` matrix with entries in `[0, u_max]`.
 */
enum MbrStatus mbr_utility_from_matrix(const double *values,
                                       size_t size,
                                       double u_max,
                                       struct MbrUtility **out);

/**
 * Inner-product utility from row-major `size × dim` embeddings.
 */
enum MbrStatus mbr_utility_embedding(const double *embeddings,
                                     size_t size,
                                     size_t dim,
                                     struct MbrUtility **out);

void mbr_utility_free(struct MbrUtility *utility);

enum MbrStatus mbr_utility_value(const struct MbrUtility *utility,
                                 size_t y,
                                 size_t y_ref,
                                 double *out);

enum MbrStatus mbr_expected_utility(const struct MbrUtility *utility,
                                    const struct MbrCategorical *dist,
                                    size_t target,
                                    double *out);

/**
 * Exact MBR decision under `dist`.
 */
enum MbrStatus mbr_decode_exact(const struct MbrUtility *utility,
                                const struct MbrCategorical *dist,
                                size_t *out_chosen,
                                double *out_score);

/**
 * Monte Carlo MBR decision over the given reference indices.
 */
enum MbrStatus mbr_decode_mc(const struct MbrUtility *utility,
                             const size_t *refs,
                             size_t count,
                             size_t *out_chosen,
                             double *out_score);

/**
 * Mode of `dist` (lowest index on ties) and its probability.
 */
enum MbrStatus mbr_map_decode(const struct MbrCategorical *dist,
                              size_t *out_chosen,
                              double *out_prob);

/**
 * Wasserstein distance under a row-major `size × size` cost matrix.
 */
enum MbrStatus mbr_wasserstein(const struct MbrCategorical *nu,
                               const struct MbrCategorical *mu,
                               const double *cost,
                               size_t size,
                               double *out);

/**
 * Evaluate the bound named `kind` (for example `"theorem_bound"`).
 * `raw_form` selects the form before constants were rounded up.
 */
enum MbrStatus mbr_bound_eval(const char *kind,
                              const struct MbrBoundInputs *inputs,
                              bool raw_form,
                              double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MBRLAB_H */
