#ifndef CURVLAB_H
#define CURVLAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum CurvlabStatus {
  CURVLAB_STATUS_OK = 0,
  CURVLAB_STATUS_NULL_POINTER = 1,
  CURVLAB_STATUS_INVALID_ARGUMENT = 2,
  // `J`, `g` or a vector family does not have the required structure.
  CURVLAB_STATUS_INVALID_STRUCTURE = 3,
  // Coefficients violate a curvature-tensor symmetry.
  CURVLAB_STATUS_NOT_CURVATURE = 4,
  // Malformed tensor document.
  CURVLAB_STATUS_PARSE = 5,
  // A Rust panic was caught at the boundary.
  CURVLAB_STATUS_INTERNAL = 99,
} CurvlabStatus;

// Almost Hermitian structure `(g, J)`.
typedef struct CurvlabContext CurvlabContext;

// Algebraic curvature tensor bound to a context.
typedef struct CurvlabTensor CurvlabTensor;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or an empty string.
// Valid until the next call into the library from this thread.
const char *curvlab_last_error(void);

// Library version as a static string.
const char *curvlab_version(void);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` must come from this library and not have been freed.
void curvlab_string_free(char *s);

// Builds a context of real dimension `2m`. `j` and `g` are optional
// row-major `2m × 2m` matrices; null selects the canonical structure and the
// identity metric.
//
// # Safety
// Non-null `j` and `g` must point to `4m²` doubles.
enum CurvlabStatus curvlab_context_new(size_t m,
                                       const double *j,
                                       const double *g,
                                       struct CurvlabContext **out_ctx);

// # Safety
// `ctx` must come from [`curvlab_context_new`] and not have been freed. Null is ignored.
void curvlab_context_free(struct CurvlabContext *ctx);

// Real dimension `2m`, or 0 for a null handle.
//
// # Safety
// `ctx` must be null or a live context.
size_t curvlab_context_dim(const struct CurvlabContext *ctx);

// # Safety
// `t` must come from this library and not have been freed. Null is ignored.
void curvlab_tensor_free(struct CurvlabTensor *t);

// Real dimension of the tensor's context, or 0 for a null handle.
//
// # Safety
// `t` must be null or a live tensor.
size_t curvlab_tensor_dim(const struct CurvlabTensor *t);

// `R1(X,Y,Z,U) = g(X,U)g(Y,Z) − g(X,Z)g(Y,U)`.
//
// # Safety
// `ctx` must be a live context; `out_tensor` must be writable.
enum CurvlabStatus curvlab_tensor_r1(const struct CurvlabContext *ctx,
                                     struct CurvlabTensor **out_tensor);

// `R2` built from the fundamental 2-form.
//
// # Safety
// As [`curvlab_tensor_r1`].
enum CurvlabStatus curvlab_tensor_r2(const struct CurvlabContext *ctx,
                                     struct CurvlabTensor **out_tensor);

// `K·R1 + ((c − K)/3)·R2`.
//
// # Safety
// As [`curvlab_tensor_r1`].
enum CurvlabStatus curvlab_tensor_model(const struct CurvlabContext *ctx,
                                        double k,
                                        double c,
                                        struct CurvlabTensor **out_tensor);

// Tensor from `len = dim⁴` flat coefficients. With `project` non-zero the
// array is first projected onto curvature tensors; otherwise it must already
// satisfy the symmetries.
//
// # Safety
// `coeffs` must point to `len` doubles.
enum CurvlabStatus curvlab_tensor_from_coeffs(const struct CurvlabContext *ctx,
                                              const double *coeffs,
                                              size_t len,
                                              int project,
                                              struct CurvlabTensor **out_tensor);

// Copies the `dim⁴` coefficients into `buf`, which holds `len` doubles.
//
// # Safety
// `buf` must be writable for `len` doubles.
enum CurvlabStatus curvlab_tensor_coeffs(const struct CurvlabTensor *t, double *buf, size_t len);

// Generator over the canonical context. `kind` is one of `space-form`,
// `complex-space-form`, `model`, `random`, `random-rk`, `kernel-31`,
// `kernel-38`, `perturbed`; `k`, `c` and `eps` are null when absent.
//
// # Safety
// `kind` must be a NUL-terminated string; non-null parameters must be readable.
enum CurvlabStatus curvlab_tensor_generate(const char *kind,
                                           size_t m,
                                           const double *k,
                                           const double *c,
                                           uint64_t seed,
                                           const double *eps,
                                           struct CurvlabTensor **out_tensor);

// Parses a tensor document and validates context and symmetries.
//
// # Safety
// `json` must be a NUL-terminated string.
enum CurvlabStatus curvlab_tensor_from_json(const char *json, struct CurvlabTensor **out_tensor);

// Serializes to a tensor document (sparse records when `sparse` is non-zero).
//
// # Safety
// `t` must be a live tensor; free the result with [`curvlab_string_free`].
enum CurvlabStatus curvlab_tensor_to_json(const struct CurvlabTensor *t,
                                          int sparse,
                                          char **out_json);

// `R(X, Y, Z, U)` for vectors of length `dim`.
//
// # Safety
// Each vector must point to `dim` doubles.
enum CurvlabStatus curvlab_evaluate(const struct CurvlabTensor *t,
                                    const double *x,
                                    const double *y,
                                    const double *z,
                                    const double *u,
                                    double *out_value);

// Sectional curvature of the plane spanned by `x` and `y` (any basis).
//
// # Safety
// `x`, `y` must point to `dim` doubles.
enum CurvlabStatus curvlab_sectional_curvature(const struct CurvlabTensor *t,
                                               const double *x,
                                               const double *y,
                                               double *out_value);

// `H(X)` for nonzero `x` (normalized internally).
//
// # Safety
// `x` must point to `dim` doubles.
enum CurvlabStatus curvlab_holomorphic_sectional_curvature(const struct CurvlabTensor *t,
                                                           const double *x,
                                                           double *out_value);

// Largest `|R − R(J·,J·,J·,J·)|` entry.
//
// # Safety
// `t` must be a live tensor.
enum CurvlabStatus curvlab_rk_defect(const struct CurvlabTensor *t, double *out_value);

// Least-squares fit to `K·R1 + ((c − K)/3)·R2`.
//
// # Safety
// Out-pointers must be writable.
enum CurvlabStatus curvlab_fit_model(const struct CurvlabTensor *t,
                                     double *out_k,
                                     double *out_c,
                                     double *out_residual);

// Holomorphic (`kind = 0`) or antiholomorphic (`kind = 1`) sectional
// curvature statistics over a basis sweep plus `samples` random planes.
//
// # Safety
// Out-pointers must be writable.
enum CurvlabStatus curvlab_constancy(const struct CurvlabTensor *t,
                                     int kind,
                                     size_t samples,
                                     uint64_t seed,
                                     double *out_mean,
                                     double *out_max_deviation);

// Full analysis report as JSON (same schema as the command-line `analyze --json`).
//
// # Safety
// Free the result with [`curvlab_string_free`].
enum CurvlabStatus curvlab_analyze_json(const struct CurvlabTensor *t,
                                        double tol,
                                        size_t samples,
                                        uint64_t seed,
                                        char **out_json);

// Runs a verifier on the canonical context of half-dimension `m`. `lemma`
// is `"1"`, `"3"`, `"4"` or `"A"`. `out_holds` receives 1 or 0; a verdict
// that fails is not an error. `out_json` may be null; otherwise it receives
// the verdict as JSON.
//
// # Safety
// `lemma` must be a NUL-terminated string.
enum CurvlabStatus curvlab_verify(const char *lemma,
                                  size_t m,
                                  size_t trials,
                                  uint64_t seed,
                                  int *out_holds,
                                  char **out_json);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CURVLAB_H */
