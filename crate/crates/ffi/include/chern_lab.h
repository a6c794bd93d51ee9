#ifndef CHERN_LAB_H
#define CHERN_LAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ClStatus {
  CL_STATUS_OK = 0,
  CL_STATUS_NULL_POINTER = 1,
  CL_STATUS_INVALID_ARGUMENT = 2,
  /**
   * Shapes, grids or degrees that do not fit together.
   */
  CL_STATUS_MISMATCH = 3,
  /**
   * A numerical precondition failed (spectral gap, transport drift).
   */
  CL_STATUS_NUMERICAL = 4,
  CL_STATUS_IO = 5,
  CL_STATUS_FORMAT = 6,
  CL_STATUS_PANIC = 7,
} ClStatus;

typedef enum ClFieldKind {
  CL_FIELD_KIND_UNITARY = 0,
  CL_FIELD_KIND_PROJECTION = 1,
  CL_FIELD_KIND_CONNECTION = 2,
  CL_FIELD_KIND_FORM = 3,
} ClFieldKind;

/**
 * A sampled field: unitary, projection, connection or plain form.
 */
typedef struct ClField ClField;

/**
 * The outcome of a verification suite.
 */
typedef struct ClReport ClReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or an empty string. The
 * pointer stays valid until the next failing call on the same thread.
 */
const char *cl_last_error(void);

/**
 * The winding field t ↦ e^{2πimt} on a periodic circle of `size` points.
 *
 * # Safety
 * `out` must be a valid pointer to write a handle into.
 */
enum ClStatus cl_field_winding(size_t size, int64_t m, struct ClField **out);

/**
 * The rank-1 Bloch projection of degree `degree` on a `size`² torus.
 *
 * # Safety
 * `out` must be a valid pointer to write a handle into.
 */
enum ClStatus cl_field_bloch(size_t size, int64_t degree, struct ClField **out);

/**
 * Reads a field file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum ClStatus cl_field_read(const char *path, struct ClField **out);

/**
 * Writes a field file.
 *
 * # Safety
 * `field` must be a live handle and `path` a NUL-terminated string.
 */
enum ClStatus cl_field_write(const struct ClField *field, const char *path);

/**
 * # Safety
 * `field` must be a live handle and `out` a valid pointer.
 */
enum ClStatus cl_field_kind(const struct ClField *field, enum ClFieldKind *out);

/**
 * Integral of the top-degree part of the Chern form over the whole grid.
 * For a winding or Bloch field this is the Chern number.
 *
 * # Safety
 * `field` must be a live handle; `re` and `im` valid pointers.
 */
enum ClStatus cl_field_chern_integral(const struct ClField *field, double *re, double *im);

/**
 * # Safety
 * `field` must be null or a handle not yet freed.
 */
void cl_field_free(struct ClField *field);

/**
 * Runs a verification suite by name ("stokes", "deta", ...) or "all".
 *
 * # Safety
 * `suite` must be a NUL-terminated string and `out` a valid pointer.
 */
enum ClStatus cl_suite_run(const char *suite, size_t size, uint64_t seed, struct ClReport **out);

/**
 * # Safety
 * `report` must be a live handle and `out` a valid pointer.
 */
enum ClStatus cl_report_pass(const struct ClReport *report, bool *out);

/**
 * The report as JSON. Release the string with [`cl_string_free`].
 *
 * # Safety
 * `report` must be a live handle and `out` a valid pointer.
 */
enum ClStatus cl_report_json(const struct ClReport *report, char **out);

/**
 * # Safety
 * `report` must be null or a handle not yet freed.
 */
void cl_report_free(struct ClReport *report);

/**
 * # Safety
 * `s` must be null or a string returned by this library and not yet freed.
 */
void cl_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CHERN_LAB_H */
