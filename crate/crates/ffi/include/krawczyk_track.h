#ifndef KRAWCZYK_TRACK_H
#define KRAWCZYK_TRACK_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum KtMode {
  KT_MODE_ADAPTIVE = 0,
  KT_MODE_APRIORI = 1,
} KtMode;

typedef enum KtStatus {
  KT_STATUS_OK = 0,
  KT_STATUS_NULL_POINTER = 1,
  KT_STATUS_INVALID_UTF8 = 2,
  KT_STATUS_PARSE = 3,
  KT_STATUS_USAGE = 4,
  KT_STATUS_DOMAIN = 5,
  KT_STATUS_SINGULAR_JACOBIAN = 6,
  KT_STATUS_REFINEMENT_DIVERGED = 7,
  KT_STATUS_STEP_UNDERFLOW = 8,
  KT_STATUS_STEP_LIMIT = 9,
  KT_STATUS_IO = 10,
  KT_STATUS_PANIC = 11,
} KtStatus;

// A straight-line homotopy between a start and a target system.
typedef struct KtHomotopy KtHomotopy;

// A square polynomial system with point coefficients.
typedef struct KtSystem KtSystem;

// The record of one tracked path.
typedef struct KtTrace KtTrace;

// Outcome of a single Krawczyk test.
typedef struct KtVerdict {
  // Max-norm of the Krawczyk operator.
  double norm;
  // The test passes when `norm` is strictly below this.
  double threshold;
  bool passed;
} KtVerdict;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the most recent failure on this thread, or null.
//
// The pointer stays valid until the next failing call on the same thread.
const char *kt_last_error(void);

// Parses a system from `{"n": n, "polys": [[{"c": [re, im], "e": [...]}, ...], ...]}`.
//
// # Safety
// `json` must be a NUL-terminated string and `out` a valid pointer.
enum KtStatus kt_system_from_json(const char *json, struct KtSystem **out);

// Number of variables, or 0 for a null handle.
//
// # Safety
// `sys` must be null or a live handle.
size_t kt_system_dim(const struct KtSystem *sys);

// Evaluates the system at a point in floating point.
//
// # Safety
// `sys` must be a live handle; all four buffers must hold `n` doubles.
enum KtStatus kt_system_eval(const struct KtSystem *sys,
                             const double *re,
                             const double *im,
                             size_t n,
                             double *out_re,
                             double *out_im);

// # Safety
// `sys` must be null or a handle not yet freed.
void kt_system_free(struct KtSystem *sys);

// Runs the Krawczyk test on `x + radius B` with `Y = JF(x)^{-1}` at threshold `rho`.
//
// # Safety
// `sys` must be a live handle, `re` and `im` must hold `n` doubles, and
// `out` must be a valid pointer.
enum KtStatus kt_certify(const struct KtSystem *sys,
                         const double *re,
                         const double *im,
                         size_t n,
                         double radius,
                         double rho,
                         struct KtVerdict *out);

// Parses `{"start": system, "target": system, "gamma": [re, im] | "random", "seed": k}`.
//
// # Safety
// `json` must be a NUL-terminated string and `out` a valid pointer.
enum KtStatus kt_homotopy_from_json(const char *json, struct KtHomotopy **out);

// # Safety
// `h` must be null or a live handle.
size_t kt_homotopy_dim(const struct KtHomotopy *h);

// # Safety
// `h` must be null or a handle not yet freed.
void kt_homotopy_free(struct KtHomotopy *h);

// Tracks one start solution from `t = 0` to `t = 1`.
//
// # Safety
// `h` must be a live handle, `re` and `im` must hold `n` doubles, and `out`
// must be a valid pointer. On success `*out` owns a trace to be released
// with [`kt_trace_free`].
enum KtStatus kt_track(const struct KtHomotopy *h,
                       const double *re,
                       const double *im,
                       size_t n,
                       enum KtMode mode,
                       double rho,
                       double tau,
                       struct KtTrace **out);

// Number of accepted steps, or 0 for a null handle.
//
// # Safety
// `trace` must be null or a live handle.
size_t kt_trace_steps(const struct KtTrace *trace);

// Number of Krawczyk evaluations, or 0 for a null handle.
//
// # Safety
// `trace` must be null or a live handle.
size_t kt_trace_iterations(const struct KtTrace *trace);

// Certification radius at `t = 1`, or NaN for a null handle.
//
// # Safety
// `trace` must be null or a live handle.
double kt_trace_final_radius(const struct KtTrace *trace);

// Copies the certified endpoint at `t = 1`.
//
// # Safety
// `trace` must be a live handle and both buffers must hold `n` doubles.
enum KtStatus kt_trace_final_point(const struct KtTrace *trace,
                                   double *out_re,
                                   double *out_im,
                                   size_t n);

// The full trace as JSON, or null for a null handle. Release with [`kt_string_free`].
//
// # Safety
// `trace` must be null or a live handle.
char *kt_trace_to_json(const struct KtTrace *trace);

// # Safety
// `trace` must be null or a handle not yet freed.
void kt_trace_free(struct KtTrace *trace);

// # Safety
// `s` must be null or a string returned by this library and not yet freed.
void kt_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* KRAWCZYK_TRACK_H */
