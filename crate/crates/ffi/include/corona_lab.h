#ifndef CORONA_LAB_H
#define CORONA_LAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CoronaStatus {
  CORONA_STATUS_OK = 0,
  CORONA_STATUS_NULL_POINTER = 1,
  CORONA_STATUS_INVALID_PARAMETER = 2,
  CORONA_STATUS_PARAMETER_ORDER = 3,
  CORONA_STATUS_OUT_OF_DOMAIN = 4,
  CORONA_STATUS_UNDERFLOW = 5,
  CORONA_STATUS_DATA_VIOLATION = 6,
  CORONA_STATUS_INVARIANT_VIOLATION = 7,
  CORONA_STATUS_NON_CONVERGENCE = 8,
  CORONA_STATUS_NUMERICAL_FAILURE = 9,
  CORONA_STATUS_PANIC = 10,
} CoronaStatus;

/**
 * Opaque parameter set.
 */
typedef struct CoronaParams CoronaParams;

typedef struct CoronaParamValues {
  uint32_t n;
  double c;
  double d;
  double log_c;
  double log_d;
  bool underflow;
  bool validated;
} CoronaParamValues;

typedef struct CoronaCertificate {
  double term_outer;
  double term_inner;
  double lb_sharp;
  /**
   * NaN unless `has_lb_paper`.
   */
  double lb_paper;
  bool has_lb_paper;
} CoronaCertificate;

typedef struct CoronaDataReport {
  double min_of_max;
  double max_of_max;
  size_t surface_points;
} CoronaDataReport;

typedef struct CoronaTopology {
  int64_t euler;
  uint64_t boundary_components;
  int64_t genus;
} CoronaTopology;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parameters from `(δ, M)` with the smallest admissible `n`.
 */
enum CoronaStatus corona_params_delta_chain(double delta, double m, struct CoronaParams **out);

/**
 * Parameters `(n, c, d)` given directly.
 */
enum CoronaStatus corona_params_direct(uint32_t n, double c, double d, struct CoronaParams **out);

/**
 * Releases a handle; null is ignored.
 *
 * # Safety
 * `p` must be null or a handle from a constructor that has not been freed.
 */
void corona_params_free(struct CoronaParams *p);

enum CoronaStatus corona_params_get(const struct CoronaParams *p, struct CoronaParamValues *out);

/**
 * Lower bounds on `‖G1‖` for any corona solution.
 */
enum CoronaStatus corona_certify(const struct CoronaParams *p, struct CoronaCertificate *out);

/**
 * Samples `base_points` points of `D2`, lifts them and checks the data bounds.
 */
enum CoronaStatus corona_verify(const struct CoronaParams *p,
                                size_t base_points,
                                uint64_t seed,
                                struct CoronaDataReport *out);

/**
 * Lower bound on the norm of any annulus interpolant.
 */
enum CoronaStatus corona_interp_lb(double eps, uint32_t n, double *out);

/**
 * Root order `N` and the certified minimum modulus it rests on.
 */
enum CoronaStatus corona_choose_root_order(uint32_t n,
                                           uint32_t *out_order,
                                           double *out_min_modulus);

enum CoronaStatus corona_topology(const struct CoronaParams *p, struct CoronaTopology *out);

/**
 * Sheet offset of the closed polygon with vertices `re[i] + i·im[i]`.
 *
 * # Safety
 * `re` and `im` must each point to `len` readable doubles.
 */
enum CoronaStatus corona_monodromy(const struct CoronaParams *p,
                                   const double *re,
                                   const double *im,
                                   size_t len,
                                   uint32_t *out);

/**
 * Message of the last failure on this thread, or null. Valid until the
 * next call into the library from the same thread.
 */
const char *corona_last_error_message(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CORONA_LAB_H */
