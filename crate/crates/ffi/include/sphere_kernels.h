#ifndef SPHERE_KERNELS_H
#define SPHERE_KERNELS_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes; the numeric values match the command-line exit codes.
typedef enum SkStatus {
  SK_STATUS_OK = 0,
  SK_STATUS_NULL_POINTER = 1,
  SK_STATUS_INVALID_INPUT = 2,
  SK_STATUS_NUMERICAL = 3,
  SK_STATUS_MEMBERSHIP_FAIL = 4,
  SK_STATUS_PANIC = 5,
} SkStatus;

// A parsed and validated kernel spec with its group model.
typedef struct SkKernel SkKernel;

// Extracted coefficient functions on a grid of group elements.
typedef struct SkSequence SkSequence;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failure on this thread, or NULL. The pointer stays
// valid until the next failing call on the same thread.
const char *sk_last_error_message(void);

// Releases a string returned by this library.
//
// # Safety
// `s` must come from this library and not be freed twice.
void sk_string_free(char *s);

// Parses a kernel spec document (`{"group": ..., "kernel": ...}`).
//
// # Safety
// `json` must be a NUL-terminated string and `out` a valid pointer.
enum SkStatus sk_kernel_from_json(const char *json, struct SkKernel **out);

// # Safety
// `kernel` must come from [`sk_kernel_from_json`] and not be freed twice.
void sk_kernel_free(struct SkKernel *kernel);

// `f(x, u)`, with `u` given as JSON (`2`, `0.5`, `[1, 0]`).
//
// # Safety
// Pointers must be valid; `u_json` NUL-terminated.
enum SkStatus sk_kernel_eval(const struct SkKernel *kernel,
                             double x,
                             const char *u_json,
                             double *re,
                             double *im);

// Gegenbauer polynomial `C_n^lambda(x)`.
//
// # Safety
// `out` must be a valid pointer.
enum SkStatus sk_gegenbauer(double lambda, uintptr_t n, double x, double *out);

// Normalized ultraspherical polynomial `c_n(d, x)`, with `c_n(d, 1) = 1`.
//
// # Safety
// `out` must be a valid pointer.
enum SkStatus sk_ultraspherical(uintptr_t d, uintptr_t n, double x, double *out);

// Dimension `N_n(d)` of the degree-`n` spherical harmonics on `S^d`.
//
// # Safety
// `out` must be a valid pointer.
enum SkStatus sk_harmonic_dim(uintptr_t d, uintptr_t n, uint64_t *out);

// Surface area of `S^d`.
//
// # Safety
// `out` must be a valid pointer.
enum SkStatus sk_sphere_surface(uintptr_t d, double *out);

// Extracts `phi_{n,d}` for `n <= n_max` on a grid (`"real:-2:2:0.5"`,
// `"int:-3:3"`, `"cyclic"`, `"json:[...]"` or `"identity"`).
//
// # Safety
// Pointers must be valid; `grid` NUL-terminated.
enum SkStatus sk_extract(const struct SkKernel *kernel,
                         uintptr_t d,
                         uintptr_t n_max,
                         const char *grid,
                         struct SkSequence **out);

// # Safety
// `seq` must come from this library and not be freed twice.
void sk_sequence_free(struct SkSequence *seq);

// Number of retained degrees, `n_max + 1`.
//
// # Safety
// Pointers must be valid.
enum SkStatus sk_sequence_len(const struct SkSequence *seq, uintptr_t *out);

// `phi_{n,d}(e)`.
//
// # Safety
// Pointers must be valid.
enum SkStatus sk_sequence_identity_value(const struct SkSequence *seq,
                                         uintptr_t n,
                                         double *re,
                                         double *im);

// Truncated expansion at `(x, u)`; `u` must lie on the extraction grid.
//
// # Safety
// Pointers must be valid; `u_json` NUL-terminated.
enum SkStatus sk_sequence_synthesize(const struct SkSequence *seq,
                                     double x,
                                     const char *u_json,
                                     double *re,
                                     double *im);

// Coefficients at dimension `d + 2`. Returns `MembershipFail` (with the
// new handle still written) when a negative identity value certifies that
// the kernel is not positive definite on the higher sphere.
//
// # Safety
// Pointers must be valid.
enum SkStatus sk_sequence_step_up(const struct SkSequence *seq, struct SkSequence **out);

// The sequence as a CSV table; release with [`sk_string_free`].
//
// # Safety
// Pointers must be valid.
enum SkStatus sk_sequence_to_csv(const struct SkSequence *seq, char **out);

// Empirical positive definiteness test on `S^d x G`. Writes the report as
// JSON to `report_json` (release with [`sk_string_free`]) and returns
// `MembershipFail` when the verdict is fail.
//
// # Safety
// Pointers must be valid.
enum SkStatus sk_check(const struct SkKernel *kernel,
                       uintptr_t d,
                       uintptr_t trials,
                       uintptr_t n_points,
                       uint64_t seed,
                       char **report_json);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SPHERE_KERNELS_H */
