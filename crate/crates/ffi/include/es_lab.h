#ifndef ES_LAB_H
#define ES_LAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Built-in Hessian families.
typedef enum EsHessianKind {
  ES_HESSIAN_KIND_DISCUS = 1,
  ES_HESSIAN_KIND_CIGAR = 2,
  ES_HESSIAN_KIND_ELLIPSE = 3,
  ES_HESSIAN_KIND_ROTATED_ELLIPSE = 4,
  ES_HESSIAN_KIND_HADAMARD_ELLIPSE = 5,
} EsHessianKind;

// Winner recorded per iteration; `parameter` is ℓ or μ and ignored for
// `Best`.
typedef enum EsSelection {
  ES_SELECTION_BEST = 0,
  ES_SELECTION_LTH_DEGREE = 1,
  ES_SELECTION_MU_AVERAGE = 2,
} EsSelection;

// Status codes returned by every fallible function.
typedef enum EsStatus {
  ES_STATUS_OK = 0,
  ES_STATUS_NULL_POINTER = 1,
  ES_STATUS_INVALID_PARAMETER = 2,
  ES_STATUS_DIMENSION = 3,
  ES_STATUS_DOMAIN = 4,
  ES_STATUS_SINGULAR = 5,
  ES_STATUS_NON_CONVERGENCE = 6,
  ES_STATUS_IO = 7,
  ES_STATUS_BUFFER_TOO_SMALL = 8,
  ES_STATUS_PANIC = 9,
} EsStatus;

// Opaque Hessian handle.
typedef struct EsHessian EsHessian;

// Opaque objective handle; owns a copy of its Hessian.
typedef struct EsObjective EsObjective;

// Error measures of H·C.
typedef struct EsMetrics {
  double e1;
  double e2;
  double commutator_frob;
  double alpha;
} EsMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null if none.
// The pointer stays valid until the next failing call on the same thread.
const char *es_last_error(void);

// Library version as a static NUL-terminated string.
const char *es_version(void);

// Builds a family Hessian of dimension `n` and condition number `c`.
// `kind` is an [`EsHessianKind`] value; others give `InvalidParameter`.
//
// # Safety
// `out` must be a valid pointer to writable storage for one handle.
enum EsStatus es_hessian_new(uint32_t kind, size_t n, double c, struct EsHessian **out);

// Wraps a caller-supplied symmetric positive-definite n×n matrix
// (row-major).
//
// # Safety
// `entries` must point to `n * n` readable doubles; `out` as in
// [`es_hessian_new`].
enum EsStatus es_hessian_custom(const double *entries, size_t n, struct EsHessian **out);

// Releases a Hessian handle. Null is ignored.
//
// # Safety
// `h` must come from `es_hessian_new`/`es_hessian_custom` and not be freed
// twice.
void es_hessian_free(struct EsHessian *h);

// Dimension of a Hessian, or 0 for a null handle.
//
// # Safety
// `h` must be null or a live handle.
size_t es_hessian_dim(const struct EsHessian *h);

// Copies the n×n entries (row-major) into `out`, which holds `len` doubles.
//
// # Safety
// `h` must be a live handle; `out` must hold `len` writable doubles.
enum EsStatus es_hessian_entries(const struct EsHessian *h, double *out, size_t len);

// Copies the ascending eigenvalues into `out`, which holds `len` doubles.
//
// # Safety
// As for [`es_hessian_entries`].
enum EsStatus es_hessian_spectrum(const struct EsHessian *h, double *out, size_t len);

// Objective zᵀHz + aᵀz with translation `a` of length n.
//
// # Safety
// `h` must be a live handle, `translation` must point to `len` doubles and
// `out` to storage for one handle.
enum EsStatus es_objective_new(const struct EsHessian *h,
                               const double *translation,
                               size_t len,
                               struct EsObjective **out);

// Releases an objective handle. Null is ignored.
//
// # Safety
// `obj` must come from `es_objective_new` and not be freed twice.
void es_objective_free(struct EsObjective *obj);

// Evaluates the objective at `z` (length `len`).
//
// # Safety
// `obj` must be live; `z` must point to `len` doubles; `value` writable.
enum EsStatus es_objective_eval(const struct EsObjective *obj,
                                const double *z,
                                size_t len,
                                double *value);

// Copies the minimizer −½H⁻¹a into `out`.
//
// # Safety
// `obj` must be live; `out` must hold `len` writable doubles.
enum EsStatus es_objective_minimizer(const struct EsObjective *obj, double *out, size_t len);

// Runs `iters` iterations of selection on `obj` (`selection` is an
// [`EsSelection`] value) and writes the winners'
// mean (n values), covariance (n×n, row-major, 1/N normalization) and mean
// distance to the minimizer. `workers` threads are used; the result does
// not depend on it.
//
// # Safety
// `obj` must be live; `mean` must hold `mean_len` doubles, `cov`
// `cov_len` doubles; `mean_distance` must be writable.
enum EsStatus es_sample(const struct EsObjective *obj,
                        size_t lambda,
                        uint32_t selection,
                        size_t parameter,
                        uint64_t iters,
                        uint64_t seed,
                        size_t workers,
                        double *mean,
                        size_t mean_len,
                        double *cov,
                        size_t cov_len,
                        double *mean_distance);

// Error measures of H against a covariance `cov` (n×n, row-major).
//
// # Safety
// `h` must be live; `cov` must point to `len` doubles; `out` writable.
enum EsStatus es_metrics(const struct EsHessian *h,
                         const double *cov,
                         size_t len,
                         struct EsMetrics *out);

// Gamma approximation (rate Υ, shape η) of zᵀHz for eigenvalues `spectrum`.
//
// # Safety
// `spectrum` must point to `len` doubles; outputs must be writable.
enum EsStatus es_gamma_params(const double *spectrum, size_t len, double *upsilon, double *eta);

// Exact CDF of Σ Δᵢ zᵢ² at `psi`.
//
// # Safety
// `spectrum` must point to `len` doubles; `out` writable.
enum EsStatus es_gen_chi2_cdf(double psi, const double *spectrum, size_t len, double *out);

// CDF of the ℓth smallest of λ gamma(Υ, η) values at `v`.
//
// # Safety
// `out` must be writable.
enum EsStatus es_order_stat_cdf(double v,
                                uint64_t ell,
                                uint64_t lambda,
                                double upsilon,
                                double eta,
                                double *out);

// Density of the ℓth smallest of λ gamma(Υ, η) values at `v`.
//
// # Safety
// `out` must be writable.
enum EsStatus es_order_stat_pdf(double v,
                                uint64_t ell,
                                uint64_t lambda,
                                double upsilon,
                                double eta,
                                double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ES_LAB_H */
