#ifndef RADTHERM_H
#define RADTHERM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every call.
 */
typedef enum RtStatus {
  RT_STATUS_OK = 0,
  RT_STATUS_NULL_POINTER = 1,
  RT_STATUS_INVALID_ARGUMENT = 2,
  RT_STATUS_BRACKET = 3,
  RT_STATUS_CONVERGENCE = 4,
  RT_STATUS_PARSE = 5,
  RT_STATUS_SHAPE = 6,
  RT_STATUS_NOT_FOUND = 7,
  RT_STATUS_IO = 8,
  RT_STATUS_TRAINING = 9,
  RT_STATUS_LOOKUP = 10,
  RT_STATUS_PANIC = 99,
} RtStatus;

/**
 * Measurement model selector.
 */
typedef enum RtModel {
  RT_MODEL_A = 0,
  RT_MODEL_B = 1,
  RT_MODEL_C = 2,
  RT_MODEL_D = 3,
} RtModel;

/**
 * Scene conditions (everything but the tube temperature) and quadrature.
 */
typedef struct RtScene RtScene;

/**
 * A loaded surrogate network.
 */
typedef struct RtSurrogate RtSurrogate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error of this thread into `buf` (NUL-terminated,
 * truncated to `len`). Returns the full message length in bytes.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t rt_last_error_message(char *buf, size_t len);

/**
 * Library version as a static NUL-terminated string.
 */
const char *rt_version(void);

/**
 * Spectral radiance (W·m⁻²·sr⁻¹·μm⁻¹) at `lambda_um` and `temp_k`.
 *
 * # Safety
 * `out` must be a valid pointer to a double.
 */
enum RtStatus rt_planck_radiance(double lambda_um, double temp_k, double *out);

/**
 * Nominal furnace conditions: ε = 0.82, α = 0.05, T_w = 1378.15 K,
 * T_g = 1253.15 K, band 3.7–4.2 μm, 64-node Gauss-Legendre.
 *
 * # Safety
 * `out` must be a valid pointer; the handle is released with [`rt_scene_free`].
 */
enum RtStatus rt_scene_new_nominal(struct RtScene **out);

/**
 * Scene with spectrally constant emissivity and absorption.
 * Temperatures in kelvin, band edges in μm.
 *
 * # Safety
 * `out` must be a valid pointer; the handle is released with [`rt_scene_free`].
 */
enum RtStatus rt_scene_new(double wall_temp_k,
                           double gas_temp_k,
                           double emissivity,
                           double absorption,
                           double path_length,
                           double band_lo_um,
                           double band_hi_um,
                           size_t quadrature_nodes,
                           struct RtScene **out);

/**
 * # Safety
 * `scene` must be null or a handle from `rt_scene_new*` not yet freed.
 */
void rt_scene_free(struct RtScene *scene);

/**
 * Band-integrated signal of `model` at tube temperature `tube_temp_k`.
 *
 * # Safety
 * `scene` must be a live handle and `out` a valid pointer.
 */
enum RtStatus rt_forward_signal(const struct RtScene *scene,
                                enum RtModel model,
                                double tube_temp_k,
                                double *out);

/**
 * Tube temperature (K) reproducing `signal` under `model`, by bisection
 * on 973.15–1573.15 K to 1e-3 K. `iterations` may be null.
 *
 * # Safety
 * `scene` must be a live handle, `out_temp_k` valid, `iterations` null or valid.
 */
enum RtStatus rt_invert_signal(const struct RtScene *scene,
                               enum RtModel model,
                               double signal,
                               double *out_temp_k,
                               uint32_t *iterations);

/**
 * Loads an `MLPT` model file.
 *
 * # Safety
 * `path` must be a NUL-terminated UTF-8 string and `out` a valid pointer;
 * the handle is released with [`rt_surrogate_free`].
 */
enum RtStatus rt_surrogate_load(const char *path, struct RtSurrogate **out);

/**
 * # Safety
 * `model` must be null or a handle from [`rt_surrogate_load`] not yet freed.
 */
void rt_surrogate_free(struct RtSurrogate *model);

/**
 * Number of weights in the network.
 *
 * # Safety
 * `model` must be a live handle and `out` a valid pointer.
 */
enum RtStatus rt_surrogate_parameter_count(const struct RtSurrogate *model, size_t *out);

/**
 * Predicts tube temperatures (K) for `rows` feature rows laid out
 * row-major as `[S, T_w, T_g, h_ε, μ_ε, σ_ε, h_α, μ_α, σ_α]`.
 *
 * # Safety
 * `inputs` must hold `rows * 9` doubles and `out` room for `rows` doubles.
 */
enum RtStatus rt_surrogate_predict(const struct RtSurrogate *model,
                                   const double *inputs,
                                   size_t rows,
                                   double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RADTHERM_H */
