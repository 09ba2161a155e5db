#ifndef ROUGHNESS_H
#define ROUGHNESS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RoughStatus {
  ROUGH_STATUS_OK = 0,
  ROUGH_STATUS_NULL_POINTER = 1,
  ROUGH_STATUS_INVALID_ARGUMENT = 2,
  ROUGH_STATUS_DEGENERATE = 3,
  ROUGH_STATUS_NUMERICAL = 4,
  ROUGH_STATUS_INSUFFICIENT_RESOLUTION = 5,
  ROUGH_STATUS_PANIC = 6,
} RoughStatus;

typedef enum RoughBackend {
  ROUGH_BACKEND_CIRCULANT = 0,
  ROUGH_BACKEND_CHOLESKY = 1,
} RoughBackend;

typedef enum RoughModel {
  ROUGH_MODEL_FOU = 0,
  ROUGH_MODEL_DRIFTED_FBM = 1,
} RoughModel;

typedef enum RoughTransform {
  ROUGH_TRANSFORM_IDENTITY = 0,
  ROUGH_TRANSFORM_EXP_TWO_T = 1,
  ROUGH_TRANSFORM_SQUARE = 2,
  ROUGH_TRANSFORM_NON_MONOTONE = 3,
} RoughTransform;

/**
 * Opaque dyadic path handle.
 */
typedef struct RoughPath RoughPath;

/**
 * Parameters of a simulated observation `Y = ∫ g(X) ds`.
 */
typedef struct RoughProcessParams {
  enum RoughModel model;
  double hurst;
  double x0;
  /**
   * fOU mean-reversion speed (ignored for drifted fBm).
   */
  double rho;
  /**
   * fOU mean-reversion level (ignored for drifted fBm).
   */
  double mu;
  /**
   * Constant drift (ignored for fOU).
   */
  double drift;
  enum RoughTransform transform;
  uint32_t target_level;
  uint32_t oversample_q;
  enum RoughBackend backend;
} RoughProcessParams;

/**
 * Sequential scale estimate at one level.
 */
typedef struct RoughEstimate {
  uint32_t n;
  double r_hat;
  double r_seq;
  double eta_seq;
  double lambda_star;
} RoughEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread, or NULL. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *rough_last_error_message(void);

/**
 * Copies `len` values (`len` must be `2^L + 1`) into a new path handle.
 */
enum RoughStatus rough_path_from_values(const double *values, size_t len, struct RoughPath **out);

/**
 * Releases a handle; NULL is ignored.
 */
void rough_path_free(struct RoughPath *path);

/**
 * Number of values (`2^level + 1`), or 0 for NULL.
 */
size_t rough_path_len(const struct RoughPath *path);

enum RoughStatus rough_path_level(const struct RoughPath *path, uint32_t *out);

/**
 * Copies the path into `buf`, which must hold exactly `rough_path_len` values.
 */
enum RoughStatus rough_path_copy_values(const struct RoughPath *path, double *buf, size_t len);

enum RoughStatus rough_fgn_autocov(uint64_t k, double hurst, double *out);

/**
 * fBm on the grid of `level`, as a path handle.
 */
enum RoughStatus rough_simulate_fbm(uint32_t level,
                                    double hurst,
                                    uint64_t seed,
                                    enum RoughBackend backend_kind,
                                    struct RoughPath **out);

/**
 * Simulates `X` and returns `Y = ∫ g(X) ds` on the grid of `target_level`.
 */
enum RoughStatus rough_simulate_observed(const struct RoughProcessParams *params,
                                         uint64_t seed,
                                         struct RoughPath **out);

/**
 * Raw estimate at level `n`.
 */
enum RoughStatus rough_r_hat(const struct RoughPath *path, uint32_t n, double *out);

/**
 * Sequential scale estimate at level `n`; `alphas` points to `m + 1` weights.
 */
enum RoughStatus rough_r_seq(const struct RoughPath *path,
                             uint32_t n,
                             size_t m,
                             const double *alphas,
                             struct RoughEstimate *out);

/**
 * Writes `β_{n,k}` for `k = n − m − 1, …, n` into `out` (`m + 2` values).
 */
enum RoughStatus rough_beta_coeffs(uint32_t n,
                                   size_t m,
                                   const double *alphas,
                                   double *out,
                                   size_t out_len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ROUGHNESS_H */
