#ifndef BESTARM_H
#define BESTARM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum BestarmStatus {
  BESTARM_STATUS_OK = 0,
  BESTARM_STATUS_INVALID_ARGUMENT = 1,
  BESTARM_STATUS_NUMERIC_ERROR = 2,
  BESTARM_STATUS_NULL_POINTER = 3,
  BESTARM_STATUS_BUFFER_TOO_SMALL = 4,
  BESTARM_STATUS_PANIC = 5,
} BestarmStatus;

/**
 * Loss estimator used by mirror-descent based calls.
 */
typedef enum BestarmEstimator {
  BESTARM_ESTIMATOR_CENTERED_IMPORTANCE_WEIGHTED = 0,
  BESTARM_ESTIMATOR_UNWEIGHTED = 1,
} BestarmEstimator;

/**
 * Opaque Bernoulli instance.
 */
typedef struct BestarmInstance BestarmInstance;

/**
 * Scalar outcome of a selection or retention call.
 */
typedef struct BestarmOutcome {
  /**
   * Number of retained arms; for single-arm calls this is 1.
   */
  size_t retained_len;
  /**
   * Arm returned by the final identification step.
   */
  size_t chosen_arm;
  uint64_t samples_used;
  /**
   * Pseudo-regret of all pulls made.
   */
  double regret;
  /**
   * Best mean minus the best retained mean.
   */
  double gap;
} BestarmOutcome;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL if none failed.
 * The pointer stays valid until the next failing call on the same thread.
 */
const char *bestarm_last_error(void);

/**
 * Create an instance from `n` arm means in `[0, 1]`.
 *
 * # Safety
 * `means` must be valid for `n` reads and `out` for one write.
 */
enum BestarmStatus bestarm_instance_new(const double *means,
                                        size_t n,
                                        struct BestarmInstance **out);

/**
 * Create the hard instance with `n` arms: arm 0 at `1/2 + eps`, the rest at
 * `1/2`, and arm `j` at `1/2 + 2 eps` when `j` is nonnegative.
 *
 * # Safety
 * `out` must be valid for one write.
 */
enum BestarmStatus bestarm_hard_instance_new(size_t n,
                                             double eps,
                                             int64_t j,
                                             struct BestarmInstance **out);

/**
 * Release an instance. NULL is ignored.
 *
 * # Safety
 * `handle` must be NULL or a pointer from this library not yet freed.
 */
void bestarm_instance_free(struct BestarmInstance *handle);

/**
 * Number of arms, or 0 for NULL.
 *
 * # Safety
 * `handle` must be NULL or a live instance.
 */
size_t bestarm_instance_n_arms(const struct BestarmInstance *handle);

/**
 * Copy the arm means into `means`, which must hold `n_arms` values.
 *
 * # Safety
 * `handle` must be a live instance and `means` valid for `capacity` writes.
 */
enum BestarmStatus bestarm_instance_means(const struct BestarmInstance *handle,
                                          double *means,
                                          size_t capacity);

/**
 * Bernoulli KL divergence `d(x, y)`; infinite when `y` is 0 or 1 and differs from `x`.
 *
 * # Safety
 * `out` must be valid for one write.
 */
enum BestarmStatus bestarm_bernoulli_kl(double x, double y, double *out);

/**
 * Pseudo-regret of `rounds` rounds of mirror descent over all arms.
 *
 * # Safety
 * `handle` must be a live instance and `regret` valid for one write.
 */
enum BestarmStatus bestarm_osmd_regret(const struct BestarmInstance *handle,
                                       uint64_t rounds,
                                       enum BestarmEstimator estimator,
                                       uint64_t seed,
                                       uint64_t stream,
                                       double *regret);

/**
 * (eps, delta)-PAC identification over all arms by median elimination.
 *
 * # Safety
 * `handle` must be a live instance and `out` valid for one write.
 */
enum BestarmStatus bestarm_median_elimination(const struct BestarmInstance *handle,
                                              double eps,
                                              double delta,
                                              uint64_t seed,
                                              uint64_t stream,
                                              struct BestarmOutcome *out);

/**
 * Mirror descent for `rounds` rounds, then one arm drawn in proportion to its pulls.
 *
 * # Safety
 * `handle` must be a live instance and `out` valid for one write.
 */
enum BestarmStatus bestarm_find_best(const struct BestarmInstance *handle,
                                     uint64_t rounds,
                                     enum BestarmEstimator estimator,
                                     uint64_t seed,
                                     uint64_t stream,
                                     struct BestarmOutcome *out);

/**
 * (eps, delta)-PAC retention of `m` arms. Retained arms are written to
 * `retained` in ascending order; `out` is filled even when the buffer is
 * too small, so `out->retained_len` tells the required capacity.
 *
 * # Safety
 * `handle` must be a live instance, `retained` valid for `capacity` writes
 * and `out` for one write.
 */
enum BestarmStatus bestarm_pac_bar(const struct BestarmInstance *handle,
                                   double eps,
                                   double delta,
                                   size_t m,
                                   uint64_t seed,
                                   uint64_t stream,
                                   size_t *retained,
                                   size_t capacity,
                                   struct BestarmOutcome *out);

/**
 * Retention of `m` arms with expected gap below `r` at minimal sample cost.
 * Buffers behave as in `bestarm_pac_bar`.
 *
 * # Safety
 * As for `bestarm_pac_bar`.
 */
enum BestarmStatus bestarm_r_bar_sample(const struct BestarmInstance *handle,
                                        size_t m,
                                        double r,
                                        enum BestarmEstimator estimator,
                                        uint64_t seed,
                                        uint64_t stream,
                                        size_t *retained,
                                        size_t capacity,
                                        struct BestarmOutcome *out);

/**
 * Retention of `m` arms with expected gap below `r` at low regret.
 * Buffers behave as in `bestarm_pac_bar`.
 *
 * # Safety
 * As for `bestarm_pac_bar`.
 */
enum BestarmStatus bestarm_r_bar_regret(const struct BestarmInstance *handle,
                                        size_t m,
                                        double r,
                                        enum BestarmEstimator estimator,
                                        uint64_t seed,
                                        uint64_t stream,
                                        size_t *retained,
                                        size_t capacity,
                                        struct BestarmOutcome *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BESTARM_H */
