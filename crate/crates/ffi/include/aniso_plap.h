#ifndef ANISO_PLAP_H
#define ANISO_PLAP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ApStatus {
  AP_STATUS_OK = 0,
  AP_STATUS_NULL_POINTER = 1,
  AP_STATUS_INVALID_UTF8 = 2,
  AP_STATUS_PARSE = 3,
  AP_STATUS_INVALID_ARGUMENT = 4,
  AP_STATUS_GRID_TOO_COARSE = 5,
  AP_STATUS_NOT_CONVERGED = 6,
  AP_STATUS_GEOMETRY = 7,
  AP_STATUS_BUFFER_TOO_SMALL = 8,
  AP_STATUS_INTERNAL = 9,
} ApStatus;

/**
 * Opaque eigenpair.
 */
typedef struct ApEigen ApEigen;

/**
 * Opaque torsion solution.
 */
typedef struct ApTorsion ApTorsion;

typedef struct ApEigenSummary {
  double lambda;
  size_t iterations;
  double residual;
} ApEigenSummary;

/**
 * Node layout of a solution: `values[i + nx*j]` sits at
 * `(origin_x + i h, origin_y + j h)`; nodes outside the domain hold zero.
 */
typedef struct ApGrid {
  size_t nx;
  size_t ny;
  double origin_x;
  double origin_y;
  double h;
} ApGrid;

typedef struct ApTorsionSummary {
  /**
   * Torsional rigidity `∫v`.
   */
  double torsion;
  /**
   * `max v`.
   */
  double max;
  /**
   * `∫F(∇v)^p`.
   */
  double dual;
  size_t iterations;
  double residual;
} ApTorsionSummary;

typedef struct ApCheeger {
  double h_est;
  double r_star;
  double lower;
  double upper;
  double inradius;
  /**
   * Nonzero when `h_est` fell back to the upper bound.
   */
  int32_t fallback;
} ApCheeger;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread into `buf` (truncated and
 * NUL-terminated) and returns its full length in bytes, excluding the NUL.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t ap_last_error(char *buf, size_t len);

/**
 * `π_p = 2π (p-1)^{1/p} / (p sin(π/p))`.
 *
 * # Safety
 * `out` must be null or valid for writes.
 */
enum ApStatus ap_pi_p(double p, double *out);

/**
 * First Dirichlet eigenpair. On success `*out` owns a handle to release
 * with [`ap_eigen_free`].
 *
 * # Safety
 * `domain` and `norm` must be null or NUL-terminated strings; `out` must be
 * null or valid for writes.
 */
enum ApStatus ap_eigen_solve(const char *domain,
                             const char *norm,
                             double p,
                             double h,
                             double tol,
                             struct ApEigen **out);

/**
 * # Safety
 * `e` must be a live handle from [`ap_eigen_solve`]; `out` valid for writes.
 */
enum ApStatus ap_eigen_summary(const struct ApEigen *e, struct ApEigenSummary *out);

/**
 * # Safety
 * As [`ap_eigen_summary`].
 */
enum ApStatus ap_eigen_grid(const struct ApEigen *e, struct ApGrid *out);

/**
 * Copies the eigenfunction, normalized to `max u = 1`, into `out`, which
 * must hold `nx * ny` values.
 *
 * # Safety
 * `e` must be a live handle; `out` must point to `len` writable doubles.
 */
enum ApStatus ap_eigen_values(const struct ApEigen *e, double *out, size_t len);

/**
 * # Safety
 * `e` must be null or a handle from [`ap_eigen_solve`] not yet freed.
 */
void ap_eigen_free(struct ApEigen *e);

/**
 * Torsion function of `-Q_p v = 1`. On success `*out` owns a handle to
 * release with [`ap_torsion_free`].
 *
 * # Safety
 * As [`ap_eigen_solve`].
 */
enum ApStatus ap_torsion_solve(const char *domain,
                               const char *norm,
                               double p,
                               double h,
                               double tol,
                               struct ApTorsion **out);

/**
 * # Safety
 * `t` must be a live handle from [`ap_torsion_solve`]; `out` valid for writes.
 */
enum ApStatus ap_torsion_summary(const struct ApTorsion *t, struct ApTorsionSummary *out);

/**
 * # Safety
 * As [`ap_torsion_summary`].
 */
enum ApStatus ap_torsion_grid(const struct ApTorsion *t, struct ApGrid *out);

/**
 * # Safety
 * `t` must be a live handle; `out` must point to `len` writable doubles.
 */
enum ApStatus ap_torsion_values(const struct ApTorsion *t, double *out, size_t len);

/**
 * # Safety
 * `t` must be null or a handle from [`ap_torsion_solve`] not yet freed.
 */
void ap_torsion_free(struct ApTorsion *t);

/**
 * Cheeger bounds and the rolling-Wulff estimate from an `m`-radius sweep.
 *
 * # Safety
 * `domain` and `norm` must be null or NUL-terminated strings; `out` must be
 * null or valid for writes.
 */
enum ApStatus ap_cheeger(const char *domain, const char *norm, size_t m, struct ApCheeger *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ANISO_PLAP_H */
