/* C interface for the boundary detection library. */

#ifndef BDLLE_H
#define BDLLE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Error codes shared with the C header.
 */
#define BDLLE_OK 0

#define BDLLE_ERR_NULL_ARGUMENT 1

#define BDLLE_ERR_INVALID_INPUT 2

#define BDLLE_ERR_EMPTY_NEIGHBORHOOD 3

#define BDLLE_ERR_NUMERICAL 4

#define BDLLE_ERR_IO 5

#define BDLLE_ERR_BUFFER_TOO_SMALL 6

#define BDLLE_ERR_PANIC 7

/**
 * Opaque point-cloud handle.
 */
typedef struct BdlleCloud BdlleCloud;

/**
 * Opaque detection-result handle.
 */
typedef struct BdlleReport BdlleReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Creates a cloud from a row-major `n x p` buffer. On success writes the
 * new handle to `out`.
 *
 * # Safety
 * `data` must point to `n * p` doubles and `out` must be a valid pointer.
 */
int bdlle_cloud_create(const double *data, uintptr_t n, uintptr_t p, struct BdlleCloud **out);

/**
 * Loads a cloud from a CSV file (same format the CLI emits).
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
int bdlle_cloud_load_csv(const char *path, struct BdlleCloud **out);

/**
 * Number of points in the cloud; 0 for a null handle.
 */
uintptr_t bdlle_cloud_len(const struct BdlleCloud *cloud);

/**
 * Ambient dimension of the cloud; 0 for a null handle.
 */
uintptr_t bdlle_cloud_dim(const struct BdlleCloud *cloud);

/**
 * Releases a cloud handle. Null is a no-op.
 */
void bdlle_cloud_free(struct BdlleCloud *cloud);

/**
 * Runs detection with an epsilon-ball neighborhood. `c <= 0` selects the
 * regularizer automatically from the intrinsic dimension `d` (ignored
 * otherwise); `threshold_frac` is the kept fraction of the maximum
 * indicator (0.5 reproduces the reference setting).
 *
 * # Safety
 * `cloud` and `out` must be valid pointers.
 */
int bdlle_detect_epsilon(const struct BdlleCloud *cloud,
                         double epsilon,
                         uintptr_t d,
                         double c,
                         double threshold_frac,
                         struct BdlleReport **out);

/**
 * Runs detection with a K-nearest-neighbor neighborhood (ties included).
 * Parameters behave as in [`bdlle_detect_epsilon`].
 *
 * # Safety
 * `cloud` and `out` must be valid pointers.
 */
int bdlle_detect_knn(const struct BdlleCloud *cloud,
                     uintptr_t k,
                     uintptr_t d,
                     double c,
                     double threshold_frac,
                     struct BdlleReport **out);

/**
 * Number of detected boundary points; 0 for a null handle.
 */
uintptr_t bdlle_report_len(const struct BdlleReport *report);

/**
 * Copies the detected indices into `buf` (capacity `cap`).
 *
 * # Safety
 * `buf` must point to at least `cap` writable `size_t` slots.
 */
int bdlle_report_indices(const struct BdlleReport *report, uintptr_t *buf, uintptr_t cap);

/**
 * Copies the per-point indicator values (length = cloud size) into `buf`.
 *
 * # Safety
 * `buf` must point to at least `cap` writable doubles.
 */
int bdlle_report_indicator(const struct BdlleReport *report, double *buf, uintptr_t cap);

/**
 * Detection threshold actually applied (fraction of the max indicator).
 */
double bdlle_report_threshold(const struct BdlleReport *report);

/**
 * Regularizer value actually used.
 */
double bdlle_report_regularizer(const struct BdlleReport *report);

/**
 * Releases a report handle. Null is a no-op.
 */
void bdlle_report_free(struct BdlleReport *report);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BDLLE_H */
