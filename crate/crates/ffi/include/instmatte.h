#ifndef INSTMATTE_H
#define INSTMATTE_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum ImStatus {
  IM_STATUS_OK = 0,
  IM_STATUS_NULL_POINTER = 1,
  IM_STATUS_INVALID_ARGUMENT = 2,
  IM_STATUS_DIMENSION_MISMATCH = 3,
  IM_STATUS_EMPTY_INPUT = 4,
  IM_STATUS_SOLVER_FAILURE = 5,
  IM_STATUS_BACKEND_FAILURE = 6,
  IM_STATUS_IO = 7,
  IM_STATUS_INTERNAL = 99,
} ImStatus;

/**
 * Alpha matte.
 */
typedef struct ImAlpha ImAlpha;

/**
 * RGB image, 8 bits per channel.
 */
typedef struct ImImage ImImage;

/**
 * Binary mask.
 */
typedef struct ImMask ImMask;

/**
 * Pipeline settings; obtain defaults from [`im_config_default`].
 */
typedef struct ImConfig {
  uint32_t passes;
  uint32_t samples_k;
  uint32_t patch_size;
  uint32_t working_width;
  uint32_t working_height;
  /**
   * Nonzero keeps the aspect ratio when shrinking to the working size.
   */
  uint8_t preserve_aspect;
  double initial_rate;
  double rate_decay;
  double hi_threshold;
  double lo_threshold;
  uint64_t seed;
  uint32_t window_radius;
  double epsilon;
  double constraint_weight;
  double cg_tolerance;
  uint32_t cg_max_iterations;
} ImConfig;

/**
 * Evaluation scores.
 */
typedef struct ImMetrics {
  double sad;
  double mse;
  double gradient_error;
  uint64_t pixels;
} ImMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the last failure on this thread; empty after a
 * successful call. Owned by the library.
 */
const char *im_last_error_message(void);

struct ImConfig im_config_default(void);

/**
 * Copies `len = 3·width·height` bytes into a new image.
 *
 * # Safety
 * `rgb` must point to `len` readable bytes; `out` must be writable.
 */
enum ImStatus im_image_new(uint32_t width,
                           uint32_t height,
                           const uint8_t *rgb,
                           size_t len,
                           struct ImImage **out);

/**
 * # Safety
 * `image` must be a live handle.
 */
uint32_t im_image_width(const struct ImImage *image);

/**
 * # Safety
 * `image` must be a live handle.
 */
uint32_t im_image_height(const struct ImImage *image);

/**
 * Copies the pixels into `rgb`, which must hold exactly `3·width·height`
 * bytes.
 *
 * # Safety
 * `image` must be a live handle; `rgb` must point to `len` writable bytes.
 */
enum ImStatus im_image_copy_data(const struct ImImage *image, uint8_t *rgb, size_t len);

/**
 * # Safety
 * `image` must be null or a live handle, not used afterwards.
 */
void im_image_free(struct ImImage *image);

/**
 * Builds a mask from `width·height` bytes, nonzero meaning set.
 *
 * # Safety
 * `bytes` must point to `len` readable bytes; `out` must be writable.
 */
enum ImStatus im_mask_new(uint32_t width,
                          uint32_t height,
                          const uint8_t *bytes,
                          size_t len,
                          struct ImMask **out);

/**
 * # Safety
 * `mask` must be null or a live handle, not used afterwards.
 */
void im_mask_free(struct ImMask *mask);

/**
 * Builds a matte from `width·height` values in [0, 1].
 *
 * # Safety
 * `values` must point to `len` readable doubles; `out` must be writable.
 */
enum ImStatus im_alpha_new(uint32_t width,
                           uint32_t height,
                           const double *values,
                           size_t len,
                           struct ImAlpha **out);

/**
 * # Safety
 * `alpha` must be a live handle.
 */
uint32_t im_alpha_width(const struct ImAlpha *alpha);

/**
 * # Safety
 * `alpha` must be a live handle.
 */
uint32_t im_alpha_height(const struct ImAlpha *alpha);

/**
 * Copies the matte into `values`, which must hold `width·height` doubles.
 *
 * # Safety
 * `alpha` must be a live handle; `values` must point to `len` writable
 * doubles.
 */
enum ImStatus im_alpha_copy_data(const struct ImAlpha *alpha, double *values, size_t len);

/**
 * # Safety
 * `alpha` must be null or a live handle, not used afterwards.
 */
void im_alpha_free(struct ImAlpha *alpha);

/**
 * Writes the initial trimap of `mask` at dilation `radius` as encoded
 * bytes into `trimap`, which must hold `width·height` bytes.
 *
 * # Safety
 * `mask` must be a live handle; `trimap` must point to `len` writable
 * bytes.
 */
enum ImStatus im_mask_to_trimap(const struct ImMask *mask,
                                uint32_t radius,
                                uint8_t *trimap,
                                size_t len);

/**
 * Runs the full feedback pipeline for one instance with the reference
 * solver. `bbox` is `[x0, y0, x1, y1]` or null for the mask's tight box;
 * `others` lists the coarse masks of competing instances.
 *
 * # Safety
 * All handles must be live; `bbox` must be null or point to 4 values;
 * `others` must point to `n_others` live handles (or be null when
 * `n_others` is 0); `config` may be null for defaults; `out` must be
 * writable.
 */
enum ImStatus im_matte_instance(const struct ImImage *image,
                                const struct ImMask *mask,
                                const uint32_t *bbox,
                                const struct ImMask *const *others,
                                size_t n_others,
                                const struct ImConfig *config,
                                struct ImAlpha **out);

/**
 * `alpha·fg + (1 − alpha)·bg` per pixel.
 *
 * # Safety
 * All handles must be live; `out` must be writable.
 */
enum ImStatus im_composite(const struct ImImage *fg,
                           const struct ImImage *bg,
                           const struct ImAlpha *alpha,
                           struct ImImage **out);

/**
 * Scores `alpha` against `gt` over `region`, or over every pixel when
 * `region` is null.
 *
 * # Safety
 * `alpha` and `gt` must be live handles, `region` null or live; `out`
 * must be writable.
 */
enum ImStatus im_metrics(const struct ImAlpha *alpha,
                         const struct ImAlpha *gt,
                         const struct ImMask *region,
                         struct ImMetrics *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* INSTMATTE_H */
