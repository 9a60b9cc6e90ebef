#ifndef SGP_PINN_H
#define SGP_PINN_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SgpStatus {
  SGP_STATUS_OK = 0,
  SGP_STATUS_NULL_POINTER = 1,
  SGP_STATUS_INVALID_UTF8 = 2,
  SGP_STATUS_IO = 3,
  SGP_STATUS_CONFIG = 4,
  SGP_STATUS_PHYSICS = 5,
  SGP_STATUS_TRAIN = 6,
  SGP_STATUS_ORACLE = 7,
  SGP_STATUS_UNSUPPORTED = 8,
  SGP_STATUS_BAD_ARGUMENT = 9,
  SGP_STATUS_PANIC = 10,
} SgpStatus;

/**
 * A trained model loaded from a checkpoint.
 */
typedef struct SgpModel SgpModel;

/**
 * Material and loading of the homogeneous 1D strip, SI units.
 */
typedef struct SgpMaterial1D {
  double mu_pa;
  double s0_pa;
  double d0_per_s;
  double m;
  double hardening_pa;
  double shear_rate_per_s;
  double t_max_s;
} SgpMaterial1D;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the last failed call on this thread. Valid until the
 * next call into the library from the same thread.
 */
const char *sgp_last_error(void);

/**
 * Library version, a static NUL-terminated string.
 */
const char *sgp_version(void);

/**
 * Loads a checkpoint. On success `*out` owns a model to release with
 * `sgp_model_free`.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum SgpStatus sgp_model_load(const char *path, struct SgpModel **out);

/**
 * Releases a model. Null is ignored.
 *
 * # Safety
 * `model` must come from `sgp_model_load` and not be used afterwards.
 */
void sgp_model_free(struct SgpModel *model);

/**
 * Number of network inputs (scaled coordinates per point).
 *
 * # Safety
 * `model` and `out` must be valid pointers.
 */
enum SgpStatus sgp_model_input_count(const struct SgpModel *model, size_t *out);

/**
 * Shear stress at the strip centre at `n` equally spaced times from 0 to
 * `t_max`: applied strain into `strain`, stress (Pa) into `stress`. For the
 * 2D model the stress is T12.
 *
 * # Safety
 * `strain` and `stress` must each hold `n` doubles.
 */
enum SgpStatus sgp_model_stress_strain(const struct SgpModel *model,
                                       size_t n,
                                       double *strain,
                                       double *stress);

/**
 * Plastic strain and shear stress (Pa) at one point given in scaled
 * coordinates (`n_coords` must equal `sgp_model_input_count`).
 *
 * # Safety
 * `coords` must hold `n_coords` doubles; `gamma_p` and `stress` must be valid.
 */
enum SgpStatus sgp_model_evaluate(const struct SgpModel *model,
                                  const double *coords,
                                  size_t n_coords,
                                  double *gamma_p,
                                  double *stress);

/**
 * Trains from a TOML config file into run directory `out_dir`.
 *
 * # Safety
 * Both arguments must be NUL-terminated strings.
 */
enum SgpStatus sgp_train(const char *config_path, const char *out_dir);

/**
 * Homogeneous reference solution: stress (Pa) at `n` equally spaced applied
 * strains from 0 to the maximum, interpolated from the integrated series.
 *
 * # Safety
 * `mat` must be valid; `strain` and `tau` must each hold `n` doubles.
 */
enum SgpStatus sgp_oracle_homogeneous(const struct SgpMaterial1D *mat,
                                      double tol,
                                      size_t n,
                                      double *strain,
                                      double *tau);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SGP_PINN_H */
