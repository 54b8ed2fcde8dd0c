#ifndef FINSLER_AB_H
#define FINSLER_AB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Dimension of every metric the library builds.
 */
#define FAB_DIM 3

typedef enum FabStatus {
  FAB_STATUS_OK = 0,
  FAB_STATUS_NULL_POINTER = 1,
  FAB_STATUS_INVALID_ARGUMENT = 2,
  /**
   * `(x, y)` or `s` outside where the metric or profile is defined.
   */
  FAB_STATUS_DOMAIN = 3,
  /**
   * Degenerate metric, flag or ODE coefficient.
   */
  FAB_STATUS_NUMERICAL = 4,
  FAB_STATUS_PANIC = 5,
} FabStatus;

/**
 * Opaque metric handle.
 */
typedef struct FabMetric FabMetric;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer is
 * valid until the next library call on the same thread.
 */
const char *fab_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *fab_version(void);

/**
 * Builds a metric from a preset name (`"s3-berger"`), its parameter, and a
 * profile name (`riemannian`, `randers`, `kropina`, `ode:k1`, `ode:k0`,
 * `ode:km1`, `file:PATH`). `dphi0` is the slope used by `ode:*` profiles.
 *
 * # Safety
 * `preset` and `phi` must be NUL-terminated strings; `out` must be writable.
 */
enum FabStatus fab_metric_new(const char *preset,
                              double epsilon,
                              const char *phi,
                              double dphi0,
                              struct FabMetric **out);

/**
 * Builds a metric from a JSON run configuration (same format as the CLI's
 * `--config`).
 *
 * # Safety
 * `config_json` must be a NUL-terminated string; `out` must be writable.
 */
enum FabStatus fab_metric_from_config(const char *config_json, struct FabMetric **out);

/**
 * # Safety
 * `m` must come from `fab_metric_new`/`fab_metric_from_config` and not be
 * used afterwards. Null is ignored.
 */
void fab_metric_free(struct FabMetric *m);

/**
 * `F(x, y)`. `x` and `y` point to `FAB_DIM` doubles.
 *
 * # Safety
 * Pointers must be valid for the stated lengths.
 */
enum FabStatus fab_finsler(const struct FabMetric *m,
                           const double *x,
                           const double *y,
                           double *out);

/**
 * Spray coefficients `G^i(x, y)` into `out[0..FAB_DIM]`. `alphabeta`
 * selects the closed-form route instead of differentiating `F^2`.
 *
 * # Safety
 * Pointers must be valid for `FAB_DIM` doubles.
 */
enum FabStatus fab_spray(const struct FabMetric *m,
                         const double *x,
                         const double *y,
                         bool alphabeta,
                         double *out);

/**
 * Ricci scalar `Ric(x, y)` (degree two in `y`) from the generic pipeline.
 *
 * # Safety
 * Pointers must be valid for the stated lengths.
 */
enum FabStatus fab_ricci(const struct FabMetric *m, const double *x, const double *y, double *out);

/**
 * Flag curvature `K(x, y, u)`.
 *
 * # Safety
 * Pointers must be valid for the stated lengths.
 */
enum FabStatus fab_flag_curvature(const struct FabMetric *m,
                                  const double *x,
                                  const double *y,
                                  const double *u,
                                  double *out);

/**
 * Runs the verification suite for a JSON run configuration. `passed`
 * receives the overall verdict and `report_json` the report, to be freed
 * with `fab_string_free`. A failing check is not an error status.
 *
 * # Safety
 * `config_json` must be a NUL-terminated string; out-pointers writable.
 */
enum FabStatus fab_verify(const char *config_json, bool *passed, char **report_json);

/**
 * Solves the sphere profile equation with Einstein sign `k_sign` (+1, 0, -1)
 * from `phi(0) = phi0`, `phi'(0) = dphi0`. The tabulated solution goes to
 * `solution_json` (loadable as `file:PATH` once written to disk).
 *
 * # Safety
 * `solution_json` must be writable.
 */
enum FabStatus fab_solve_sphere_phi(int32_t k_sign,
                                    double b,
                                    double phi0,
                                    double dphi0,
                                    char **solution_json);

/**
 * # Safety
 * `s` must come from this library and not be used afterwards. Null is ignored.
 */
void fab_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FINSLER_AB_H */
