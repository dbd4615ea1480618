#ifndef QAUTH_H
#define QAUTH_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum QauthStatus {
  QAUTH_STATUS_OK = 0,
  QAUTH_STATUS_NULL_POINTER = 1,
  QAUTH_STATUS_INVALID_ARGUMENT = 2,
  QAUTH_STATUS_NOT_UNITARY = 3,
  QAUTH_STATUS_DIMENSION_MISMATCH = 4,
  QAUTH_STATUS_PARSE = 5,
  QAUTH_STATUS_INTERNAL = 6,
} QauthStatus;

/**
 * Opaque handle to a validated 4×4 tagging unitary.
 */
typedef struct QauthUnitary QauthUnitary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *qauth_version(void);

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next failing call on the same thread.
 */
const char *qauth_last_error_message(void);

/**
 * Parses matrix JSON (`{"rows":4,"cols":4,"data":[[re,im],...]}`) and
 * checks unitarity to `tolerance` (≤ 0 selects the default).
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum QauthStatus qauth_unitary_from_json(const char *json,
                                         double tolerance,
                                         struct QauthUnitary **out);

/**
 * Builds a unitary from 16 row-major real and imaginary parts.
 *
 * # Safety
 * `re` and `im` must each point to `len` doubles; `out` must be valid.
 */
enum QauthStatus qauth_unitary_from_parts(const double *re,
                                          const double *im,
                                          size_t len,
                                          double tolerance,
                                          struct QauthUnitary **out);

/**
 * The built-in worked-example unitary. Never null.
 */
struct QauthUnitary *qauth_unitary_worked_example(void);

/**
 * # Safety
 * `u` must be null or a handle from this library not yet freed.
 */
void qauth_unitary_free(struct QauthUnitary *u);

/**
 * Canonical matrix JSON of `u`; free with `qauth_string_free`.
 *
 * # Safety
 * `u` must be a valid handle and `out` a valid pointer.
 */
enum QauthStatus qauth_unitary_to_json(const struct QauthUnitary *u, char **out);

/**
 * Optimal no-message forgery probability.
 *
 * # Safety
 * `u` must be a valid handle and `out` a valid pointer.
 */
enum QauthStatus qauth_no_message_optimal(const struct QauthUnitary *u, double *out);

/**
 * Best message-substitution forgery probability found with `budget`
 * evaluations, equal priors.
 *
 * # Safety
 * `u` must be a valid handle and `out` a valid pointer.
 */
enum QauthStatus qauth_best_message_attack(const struct QauthUnitary *u,
                                           size_t budget,
                                           uint64_t seed,
                                           double *out);

/**
 * Runs the security checklist. `secure` receives 1 or 0; if `report` is
 * non-null it receives the full JSON report (free with
 * `qauth_string_free`). `budget` = 0 skips the advisory attack search.
 *
 * # Safety
 * `u` must be a valid handle, `secure` a valid pointer, `report` null or valid.
 */
enum QauthStatus qauth_validate(const struct QauthUnitary *u,
                                size_t budget,
                                uint64_t seed,
                                int32_t *secure,
                                char **report);

/**
 * Frees a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must be null or a string from this library not yet freed.
 */
void qauth_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QAUTH_H */
