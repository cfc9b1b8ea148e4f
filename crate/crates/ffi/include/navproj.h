#ifndef NAVPROJ_H
#define NAVPROJ_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum NpStatus {
  NP_STATUS_OK = 0,
  NP_STATUS_NULL_POINTER = 1,
  NP_STATUS_INVALID_ARGUMENT = 2,
  NP_STATUS_PARSE_ERROR = 3,
  NP_STATUS_TRANSFORM_ERROR = 4,
  NP_STATUS_BEHIND_LENS = 5,
  NP_STATUS_NO_GROUND_INTERSECTION = 6,
  NP_STATUS_FOOTPRINT_UNDEFINED = 7,
  NP_STATUS_BUFFER_TOO_SMALL = 8,
  NP_STATUS_IO_ERROR = 9,
  NP_STATUS_PANIC = 10,
} NpStatus;

typedef enum NpThrowKind {
  NP_THROW_KIND_OK = 0,
  NP_THROW_KIND_TOO_CLOSE = 1,
  NP_THROW_KIND_TOO_FAR = 2,
  // The optical axis never meets the ground.
  NP_THROW_KIND_UNDEFINED = 3,
} NpThrowKind;

typedef enum NpAnchorKind {
  NP_ANCHOR_KIND_DESTINATION = 0,
  NP_ANCHOR_KIND_ARROW = 1,
} NpAnchorKind;

typedef enum NpImageFormat {
  NP_IMAGE_FORMAT_PNG = 0,
  NP_IMAGE_FORMAT_PPM = 1,
} NpImageFormat;

// Opaque RGB8 frame.
typedef struct NpFramebuffer NpFramebuffer;

// Opaque path-to-frame pipeline.
typedef struct NpPipeline NpPipeline;

// Opaque projector calibration and mount.
typedef struct NpProjector NpProjector;

typedef struct NpPose2 {
  double x;
  double y;
  double yaw;
} NpPose2;

typedef struct NpPoint3 {
  double x;
  double y;
  double z;
} NpPoint3;

typedef struct NpPixel {
  double u;
  double v;
} NpPixel;

// Ground quadrilateral lit by the projector, corners ordered
// top-left, top-right, bottom-right, bottom-left of the image.
typedef struct NpFootprint {
  struct NpPoint3 corners[4];
  double near_width_m;
  double far_width_m;
  double depth_m;
  double area_m2;
} NpFootprint;

// `distance_m` is NaN when `kind` is `NP_THROW_KIND_UNDEFINED`.
typedef struct NpThrow {
  enum NpThrowKind kind;
  double distance_m;
} NpThrow;

typedef struct NpAnchor {
  struct NpPoint3 position;
  double heading;
  enum NpAnchorKind kind;
} NpAnchor;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or NULL if none.
// The pointer stays valid until the next failing call on the same thread.
const char *np_last_error(void);

// Parses a projector calibration (TOML text). When `transforms_toml` is not
// NULL and names both the base and lens frames, the mount is taken from it.
//
// # Safety
// Strings must be NUL-terminated; `out_projector` must be writable.
enum NpStatus np_projector_load(const char *projector_toml,
                                const char *transforms_toml,
                                struct NpProjector **out_projector);

// # Safety
// `projector` must come from [`np_projector_load`] and not be used afterwards.
void np_projector_free(struct NpProjector *projector);

// Image pixel of a world point (pixel centers at integer coordinates).
//
// # Safety
// `projector` must be a live handle; `out_pixel` must be writable.
enum NpStatus np_projector_project(const struct NpProjector *projector,
                                   struct NpPose2 robot,
                                   struct NpPoint3 point,
                                   struct NpPixel *out_pixel);

// Ground point (z = 0) lit by pixel `(u, v)`.
//
// # Safety
// `projector` must be a live handle; `out_point` must be writable.
enum NpStatus np_projector_unproject(const struct NpProjector *projector,
                                     struct NpPose2 robot,
                                     double u,
                                     double v,
                                     struct NpPoint3 *out_point);

// # Safety
// `projector` must be a live handle; `out_footprint` must be writable.
enum NpStatus np_projector_footprint(const struct NpProjector *projector,
                                     struct NpPose2 robot,
                                     struct NpFootprint *out_footprint);

// Lens-to-ground throw against the rated range. An out-of-range throw is
// reported in `out_throw`, not as an error status.
//
// # Safety
// `projector` must be a live handle; `out_throw` must be writable.
enum NpStatus np_projector_validate_throw(const struct NpProjector *projector,
                                          struct NpPose2 robot,
                                          struct NpThrow *out_throw);

// Resamples a path into anchors, destination first. Writes at most
// `capacity` anchors and always sets `out_len` to the full count; returns
// `NP_STATUS_BUFFER_TOO_SMALL` if they did not fit.
//
// # Safety
// `points` must hold `len` elements; `out_anchors` must hold `capacity`.
enum NpStatus np_resample(const struct NpPoint3 *points,
                          uintptr_t len,
                          double spacing_m,
                          double destination_diameter_m,
                          struct NpAnchor *out_anchors,
                          uintptr_t capacity,
                          uintptr_t *out_len);

// Builds a rendering pipeline. `transforms_toml` and `style_toml` may be NULL.
//
// # Safety
// Strings must be NUL-terminated; `out_pipeline` must be writable.
enum NpStatus np_pipeline_new(const char *projector_toml,
                              const char *transforms_toml,
                              const char *style_toml,
                              double spacing_m,
                              double destination_diameter_m,
                              struct NpPipeline **out_pipeline);

// # Safety
// `pipeline` must come from [`np_pipeline_new`] and not be used afterwards.
void np_pipeline_free(struct NpPipeline *pipeline);

// Renders one frame from a JSON path record.
//
// # Safety
// `pipeline` must be a live handle; `path_json` NUL-terminated;
// `out_frame` writable.
enum NpStatus np_pipeline_render_json(const struct NpPipeline *pipeline,
                                      const char *path_json,
                                      struct NpFramebuffer **out_frame);

// Renders one frame from path points given in `frame`, ordered start to goal.
//
// # Safety
// `pipeline` must be a live handle; `frame` NUL-terminated; `points` must
// hold `len` elements; `out_frame` writable.
enum NpStatus np_pipeline_render_points(const struct NpPipeline *pipeline,
                                        const char *frame,
                                        const struct NpPoint3 *points,
                                        uintptr_t len,
                                        struct NpFramebuffer **out_frame);

// # Safety
// `frame` must be a live handle or NULL.
uint32_t np_framebuffer_width(const struct NpFramebuffer *frame);

// # Safety
// `frame` must be a live handle or NULL.
uint32_t np_framebuffer_height(const struct NpFramebuffer *frame);

// Row-major RGB8 pixels, `3 * width * height` bytes, owned by the frame.
//
// # Safety
// `frame` must be a live handle or NULL; `out_len` may be NULL.
const uint8_t *np_framebuffer_data(const struct NpFramebuffer *frame, uintptr_t *out_len);

// Encodes the frame as PNG or binary PPM into a new buffer released with
// [`np_bytes_free`].
//
// # Safety
// `frame` must be a live handle; `out_bytes` and `out_len` writable.
enum NpStatus np_framebuffer_encode(const struct NpFramebuffer *frame,
                                    enum NpImageFormat format,
                                    uint8_t **out_bytes,
                                    uintptr_t *out_len);

// # Safety
// `frame` must come from a render call and not be used afterwards.
void np_framebuffer_free(struct NpFramebuffer *frame);

// # Safety
// `bytes` and `len` must be exactly as returned by [`np_framebuffer_encode`].
void np_bytes_free(uint8_t *bytes, uintptr_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NAVPROJ_H */
