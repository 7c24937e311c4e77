#ifndef HENLAB_H
#define HENLAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>

typedef enum HenlabCurve {
  HENLAB_CURVE_P1 = 0,
  HENLAB_CURVE_PD1 = 1,
  HENLAB_CURVE_L13 = 2,
} HenlabCurve;

typedef enum HenlabFamily {
  HENLAB_FAMILY_H3 = 0,
  HENLAB_FAMILY_H3_INVERSE = 1,
  HENLAB_FAMILY_CROSSFORM_SQ = 2,
  HENLAB_FAMILY_QR = 3,
} HenlabFamily;

typedef enum HenlabOrbitClass {
  HENLAB_ORBIT_CLASS_ELLIPTIC = 0,
  HENLAB_ORBIT_CLASS_SINK = 1,
  HENLAB_ORBIT_CLASS_SOURCE = 2,
  HENLAB_ORBIT_CLASS_SADDLE_CONTRACTING = 3,
  HENLAB_ORBIT_CLASS_SADDLE_EXPANDING = 4,
  HENLAB_ORBIT_CLASS_SADDLE_CONSERVATIVE = 5,
  HENLAB_ORBIT_CLASS_PARABOLIC = 6,
  HENLAB_ORBIT_CLASS_UNRESOLVED = 7,
} HenlabOrbitClass;

typedef enum HenlabPerturbation {
  HENLAB_PERTURBATION_XY = 0,
  HENLAB_PERTURBATION_X_ARCTAN_Y = 1,
} HenlabPerturbation;

/**
 * Result code of every call.
 */
typedef enum HenlabStatus {
  HENLAB_STATUS_OK = 0,
  HENLAB_STATUS_NULL_POINTER = 1,
  HENLAB_STATUS_INVALID_ARGUMENT = 2,
  /**
   * Newton, continuation or another numerical procedure failed.
   */
  HENLAB_STATUS_NUMERICAL = 3,
  /**
   * The map is singular at the given point.
   */
  HENLAB_STATUS_SINGULAR = 4,
  HENLAB_STATUS_PANIC = 5,
} HenlabStatus;

/**
 * Opaque map handle.
 */
typedef struct HenlabMap HenlabMap;

/**
 * Opaque periodic orbit handle.
 */
typedef struct HenlabOrbit HenlabOrbit;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *henlab_version(void);

/**
 * Message of the last failed call on this thread, or null. The pointer is
 * valid until the next failing call on the same thread.
 */
const char *henlab_last_error_message(void);

/**
 * Creates a validated map. `d` is `+1` or `-1`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum HenlabStatus henlab_map_new(enum HenlabFamily family,
                                 enum HenlabPerturbation perturbation,
                                 int d,
                                 double m1,
                                 double m2,
                                 double eps,
                                 struct HenlabMap **out);

/**
 * # Safety
 * `map` is null or a handle from [`henlab_map_new`] not yet freed.
 */
void henlab_map_free(struct HenlabMap *map);

/**
 * # Safety
 * `map` is a live handle; `out_x`, `out_y` are valid for writes.
 */
enum HenlabStatus henlab_map_forward(const struct HenlabMap *map,
                                     double x,
                                     double y,
                                     double *out_x,
                                     double *out_y);

/**
 * # Safety
 * As for [`henlab_map_forward`].
 */
enum HenlabStatus henlab_map_backward(const struct HenlabMap *map,
                                      double x,
                                      double y,
                                      double *out_x,
                                      double *out_y);

/**
 * Jacobian matrix at `(x, y)`, row-major into `out[4]`.
 *
 * # Safety
 * `map` is a live handle; `out` is valid for writes of four doubles.
 */
enum HenlabStatus henlab_map_jacobian(const struct HenlabMap *map, double x, double y, double *out);

/**
 * Newton search for a period-`q` orbit from `(x0, y0)`.
 *
 * # Safety
 * `map` is a live handle; `out` is valid for writes.
 */
enum HenlabStatus henlab_orbit_find(const struct HenlabMap *map,
                                    size_t q,
                                    double x0,
                                    double y0,
                                    struct HenlabOrbit **out);

/**
 * # Safety
 * `orbit` is null or a handle from [`henlab_orbit_find`] not yet freed.
 */
void henlab_orbit_free(struct HenlabOrbit *orbit);

/**
 * Minimal period; 0 for a null handle.
 *
 * # Safety
 * `orbit` is null or a live handle.
 */
size_t henlab_orbit_period(const struct HenlabOrbit *orbit);

/**
 * Point `k` of the cycle, `0 <= k < period`.
 *
 * # Safety
 * `orbit` is a live handle; `out_x`, `out_y` are valid for writes.
 */
enum HenlabStatus henlab_orbit_point(const struct HenlabOrbit *orbit,
                                     size_t k,
                                     double *out_x,
                                     double *out_y);

/**
 * Multipliers as `[re0, im0, re1, im1]`, ordered by modulus, and the
 * Jacobian product of the cycle.
 *
 * # Safety
 * `orbit` is a live handle; `multipliers` is valid for writes of four
 * doubles and `jacobian` for one.
 */
enum HenlabStatus henlab_orbit_spectrum(const struct HenlabOrbit *orbit,
                                        double *multipliers,
                                        double *jacobian);

/**
 * Stability class and whether the cycle is invariant under `(x, y) -> (y, x)`.
 *
 * # Safety
 * `orbit` is a live handle; both out-pointers are valid for writes.
 */
enum HenlabStatus henlab_orbit_class(const struct HenlabOrbit *orbit,
                                     enum HenlabOrbitClass *class_,
                                     bool *symmetric);

/**
 * Closed-form `M1` values of a fixed-point curve of the conservative map
 * at `m2`. `*exists` is false where the curve does not reach `m2`; the
 * M1 outputs are then left untouched.
 *
 * # Safety
 * All out-pointers are valid for writes.
 */
enum HenlabStatus henlab_curve_m1(enum HenlabCurve curve,
                                  int d,
                                  double m2,
                                  bool *exists,
                                  double *m1_plus,
                                  double *m1_minus);

/**
 * Parses a family name such as `qr` or `h3-inverse`.
 *
 * # Safety
 * `name` is a valid NUL-terminated string; `out` is valid for writes.
 */
enum HenlabStatus henlab_family_from_name(const char *name, enum HenlabFamily *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HENLAB_H */
