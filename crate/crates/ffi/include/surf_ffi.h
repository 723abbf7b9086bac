#ifndef SURF_FFI_H
#define SURF_FFI_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes.
 */
typedef enum SurfStatus {
  SURF_STATUS_OK = 0,
  SURF_STATUS_NULL_POINTER = 1,
  SURF_STATUS_INVALID_ARGUMENT = 2,
  SURF_STATUS_DIMENSION = 3,
  SURF_STATUS_DEGENERATE = 4,
  SURF_STATUS_THRESHOLD = 5,
  SURF_STATUS_IO = 6,
  SURF_STATUS_PANIC = 7,
} SurfStatus;

/**
 * Field family for EC densities and thresholds.
 */
typedef enum SurfFieldType {
  SURF_FIELD_TYPE_GAUSSIAN = 0,
  SURF_FIELD_TYPE_STUDENT_T = 1,
} SurfFieldType;

/**
 * Lattice fields sharing one voxel set.
 */
typedef struct SurfEnsemble SurfEnsemble;

/**
 * A Gaussian smoothing kernel.
 */
typedef struct SurfKernel SurfKernel;

/**
 * A set of voxels.
 */
typedef struct SurfVoxelSet SurfVoxelSet;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *surf_version(void);

/**
 * Copies the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `len`) and returns the full message length, or 0 if none.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t surf_last_error_message(char *buf, size_t len);

/**
 * Creates a voxel set from `n` points of dimension `dim`, stored row-major.
 *
 * # Safety
 * `coords` must point to `n * dim` doubles and `out` must be writable.
 */
enum SurfStatus surf_voxel_set_new(size_t dim,
                                   const double *coords,
                                   size_t n,
                                   struct SurfVoxelSet **out);

/**
 * Creates the manifold domain (`data = 0`) or data lattice (`data = 1`) of
 * a named simulation preset.
 *
 * # Safety
 * `name` must be a NUL-terminated string and `out` writable.
 */
enum SurfStatus surf_voxel_set_from_preset(const char *name,
                                           double fwhm,
                                           int32_t data,
                                           struct SurfVoxelSet **out);

/**
 * Number of voxels, or 0 for a null handle.
 *
 * # Safety
 * `set` must be null or a live handle.
 */
size_t surf_voxel_set_len(const struct SurfVoxelSet *set);

/**
 * Releases a voxel set. Null is ignored.
 *
 * # Safety
 * `set` must be null or a handle not yet freed.
 */
void surf_voxel_set_free(struct SurfVoxelSet *set);

/**
 * Euler characteristic of the union of voxel boxes.
 *
 * # Safety
 * `set` must be a live handle and `out` writable.
 */
enum SurfStatus surf_euler_characteristic(const struct SurfVoxelSet *set, int64_t *out);

/**
 * Draws `n` standard Gaussian fields on `set` from stream `(seed, stream)`.
 *
 * # Safety
 * `set` must be a live handle and `out` writable.
 */
enum SurfStatus surf_ensemble_sample(const struct SurfVoxelSet *set,
                                     size_t n,
                                     uint64_t seed,
                                     uint64_t stream,
                                     struct SurfEnsemble **out);

/**
 * Wraps `nfields` fields on `set`; `values` holds the fields one after the other.
 *
 * # Safety
 * `values` must point to `nfields * len(set)` doubles and `out` be writable.
 */
enum SurfStatus surf_ensemble_from_values(const struct SurfVoxelSet *set,
                                          const double *values,
                                          size_t nfields,
                                          struct SurfEnsemble **out);

/**
 * Releases an ensemble. Null is ignored.
 *
 * # Safety
 * `e` must be null or a handle not yet freed.
 */
void surf_ensemble_free(struct SurfEnsemble *e);

/**
 * Creates a Gaussian kernel with one FWHM per axis; `truncation <= 0`
 * means untruncated.
 *
 * # Safety
 * `fwhm` must point to `dim` doubles and `out` be writable.
 */
enum SurfStatus surf_kernel_new(size_t dim,
                                const double *fwhm,
                                double truncation,
                                struct SurfKernel **out);

/**
 * Releases a kernel. Null is ignored.
 *
 * # Safety
 * `k` must be null or a handle not yet freed.
 */
void surf_kernel_free(struct SurfKernel *k);

/**
 * LKCs of the manifold over `domain` for smoothed white noise on `data`.
 * Writes up to four values to `out` and their count to `out_len`.
 *
 * # Safety
 * Handles must be live, `out` must hold 4 doubles, `out_len` may be null.
 */
enum SurfStatus surf_lkc_white_noise(const struct SurfVoxelSet *data,
                                     const struct SurfKernel *kernel,
                                     const struct SurfVoxelSet *domain,
                                     uint32_t r,
                                     double *out,
                                     size_t *out_len);

/**
 * LKC estimates from an ensemble.
 *
 * # Safety
 * Handles must be live, `out` must hold 4 doubles, `out_len` may be null.
 */
enum SurfStatus surf_lkc_estimate(const struct SurfEnsemble *ensemble,
                                  const struct SurfKernel *kernel,
                                  const struct SurfVoxelSet *domain,
                                  uint32_t r,
                                  double *out,
                                  size_t *out_len);

/**
 * Stationary LKCs of a box with `dim` side lengths.
 *
 * # Safety
 * `sides` must point to `dim` doubles and `out` hold `dim + 1` doubles.
 */
enum SurfStatus surf_lkc_closed_form(const double *sides, size_t dim, double fwhm, double *out);

/**
 * EC density `rho_d(u)`; `df` is used for t-fields only.
 *
 * # Safety
 * `out` must be writable.
 */
enum SurfStatus surf_ec_density(enum SurfFieldType kind,
                                double df,
                                size_t d,
                                double u,
                                double *out);

/**
 * The EEC threshold for `len` LKCs `L_0..`.
 *
 * # Safety
 * `lkcs` must point to `len` doubles and `out` be writable.
 */
enum SurfStatus surf_threshold(const double *lkcs,
                               size_t len,
                               enum SurfFieldType kind,
                               double df,
                               double alpha,
                               double *out);

/**
 * The t-field of an ensemble at `x`; `grad` (nullable) receives the gradient.
 *
 * # Safety
 * Handles must be live, `x` and `grad` must hold `dim` doubles.
 */
enum SurfStatus surf_t_field(const struct SurfEnsemble *ensemble,
                             const struct SurfKernel *kernel,
                             const double *x,
                             size_t dim,
                             double *value,
                             double *grad);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SURF_FFI_H */
