#ifndef SPECTRAL_LIFT_H
#define SPECTRAL_LIFT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum SlStatus {
  SL_STATUS_OK = 0,
  SL_STATUS_NULL_POINTER = 1,
  SL_STATUS_INVALID_UTF8 = 2,
  SL_STATUS_INVALID_INPUT = 3,
  // The supplied φ violates at least one interpolation condition.
  SL_STATUS_CONDITIONS_FAILED = 4,
  // A quotient in the construction is not holomorphic; the message names
  // the obstructing condition.
  SL_STATUS_NOT_DIVISIBLE = 5,
  // Any other construction failure (singular data, unsupported base, …).
  SL_STATUS_CONSTRUCTION_FAILED = 6,
  // The certificate of a constructed map did not pass.
  SL_STATUS_VERIFICATION_FAILED = 7,
  // No feasible φ was found inside the domain.
  SL_STATUS_PHI_NOT_FOUND = 8,
  // A panic was caught at the boundary.
  SL_STATUS_INTERNAL = 9,
} SlStatus;

// Constructed lift ψ (opaque).
typedef struct SlMap SlMap;

// Polynomial φ (opaque).
typedef struct SlPhi SlPhi;

// Parsed problem (opaque).
typedef struct SlProblem SlProblem;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failure on this thread, or null. Valid until the next
// failing call on the same thread; do not free.
const char *sl_last_error(void);

// Library version, static.
const char *sl_version(void);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` must come from this library and not have been freed.
void sl_string_free(char *s);

// Parses a problem file (JSON).
//
// # Safety
// `json` must be a nul-terminated string; `out` a valid pointer.
enum SlStatus sl_problem_from_json(const char *json, struct SlProblem **out);

// # Safety
// `p` must come from [`sl_problem_from_json`] and not have been freed.
void sl_problem_free(struct SlProblem *p);

// Dimension `n` of the problem, or 0 for a null handle.
//
// # Safety
// `p` must be null or a live handle.
size_t sl_problem_n(const struct SlProblem *p);

// Case tag of the problem as an owned string.
//
// # Safety
// `p` must be a live handle; `out` a valid pointer.
enum SlStatus sl_problem_case(const struct SlProblem *p, char **out);

// The φ embedded in the problem file, if any.
//
// # Safety
// `p` must be a live handle; `out` a valid pointer.
enum SlStatus sl_problem_phi(const struct SlProblem *p, struct SlPhi **out);

// Parses φ from `{"components": [[re, im] arrays]}`.
//
// # Safety
// `json` must be a nul-terminated string; `out` a valid pointer.
enum SlStatus sl_phi_from_json(const char *json, struct SlPhi **out);

// Builds a feasible φ. A negative `degree` selects the default.
//
// # Safety
// `p` must be a live handle; `out` a valid pointer.
enum SlStatus sl_phi_build(const struct SlProblem *p,
                           int64_t degree,
                           uint64_t seed,
                           struct SlPhi **out);

// JSON encoding of φ.
//
// # Safety
// `phi` must be a live handle; `out` a valid pointer.
enum SlStatus sl_phi_to_json(const struct SlPhi *phi, char **out);

// # Safety
// `phi` must be null or a live handle.
void sl_phi_free(struct SlPhi *phi);

// Evaluates the interpolation conditions. Returns `Ok` when all pass and
// `ConditionsFailed` otherwise; the report is written to `report_json` when
// that pointer is non-null.
//
// # Safety
// Handles must be live; `report_json` null or valid.
enum SlStatus sl_check(const struct SlProblem *p,
                       const struct SlPhi *phi,
                       double tol,
                       char **report_json);

// Constructs the lift of φ.
//
// # Safety
// Handles must be live; `out` a valid pointer.
enum SlStatus sl_lift(const struct SlProblem *p,
                      const struct SlPhi *phi,
                      double tol,
                      struct SlMap **out);

// Certifies a constructed map on the default grid. Returns `Ok` when the
// certificate passes and `VerificationFailed` otherwise; the certificate is
// written to `cert_json` when that pointer is non-null.
//
// # Safety
// Handles must be live; `cert_json` null or valid.
enum SlStatus sl_verify(const struct SlProblem *p,
                        const struct SlMap *map,
                        const struct SlPhi *phi,
                        double tol,
                        char **cert_json);

// Writes `ψ(re + i·im)` row-major as interleaved `(re, im)` pairs into
// `out`, which must hold `2·n²` doubles; `len` is its length.
//
// # Safety
// `map` must be a live handle; `out` must point to `len` writable doubles.
enum SlStatus sl_map_eval(const struct SlMap *map, double re, double im, double *out, size_t len);

// JSON encoding of the map.
//
// # Safety
// `map` must be a live handle; `out` a valid pointer.
enum SlStatus sl_map_to_json(const struct SlMap *map, char **out);

// Parses a map previously produced by [`sl_map_to_json`].
//
// # Safety
// `json` must be a nul-terminated string; `out` a valid pointer.
enum SlStatus sl_map_from_json(const char *json, struct SlMap **out);

// # Safety
// `map` must be null or a live handle.
void sl_map_free(struct SlMap *map);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SPECTRAL_LIFT_H */
