#ifndef HSMOMENTS_H
#define HSMOMENTS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum HsEnsemble {
  HS_ENSEMBLE_TWO_REBIT = 0,
  HS_ENSEMBLE_TWO_QUBIT = 1,
  HS_ENSEMBLE_REBIT_RETRIT = 2,
  HS_ENSEMBLE_QUBIT_QUTRIT = 3,
} HsEnsemble;

/**
 * Status codes of every fallible call.
 */
typedef enum HsStatus {
  HS_STATUS_OK = 0,
  HS_STATUS_NULL_POINTER = 1,
  HS_STATUS_INVALID_ARGUMENT = 2,
  HS_STATUS_BUDGET_EXCEEDED = 3,
  HS_STATUS_VERIFICATION_FAILURE = 4,
  HS_STATUS_RANGE_VIOLATION = 5,
  HS_STATUS_NUMERICAL = 6,
  HS_STATUS_INTERNAL = 7,
  HS_STATUS_PANIC = 8,
} HsStatus;

/**
 * An adjustment factor `F_κ(k)` in reduced form.
 */
typedef struct HsFactor HsFactor;

/**
 * Monte Carlo estimates of `⟨|ρ|^k |ρ^PT|^κ⟩` for `k, κ ≤ max_order`,
 * and of the separability probability.
 */
typedef struct HsMcResult HsMcResult;

/**
 * An exact rational number.
 */
typedef struct HsRational HsRational;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version, a static string.
 */
const char *hs_version(void);

/**
 * Message of the last failed call on this thread, or NULL. Valid until the
 * next failing call on the same thread.
 */
const char *hs_last_error_message(void);

/**
 * Releases a string returned by this library.
 *
 * # Safety
 * `s` must be NULL or a string returned by this library, not yet freed.
 */
void hs_string_free(char *s);

/**
 * Parses `two-rebit`, `two-qubit`, `rebit-retrit` or `qubit-qutrit`.
 *
 * # Safety
 * `name` must be a nul-terminated string; `out` must be writable.
 */
enum HsStatus hs_ensemble_from_name(const char *name, enum HsEnsemble *out);

/**
 * Exact `⟨|ρ|^k |ρ^PT|^κ⟩`.
 *
 * # Safety
 * `out` must be writable; the handle it receives is freed with
 * `hs_rational_free`.
 */
enum HsStatus hs_exact_moment(enum HsEnsemble ensemble,
                              uint32_t k,
                              uint32_t kappa,
                              struct HsRational **out);

/**
 * `num/den` text of a rational.
 *
 * # Safety
 * `r` must be NULL or a live handle.
 */
char *hs_rational_to_string(const struct HsRational *r);

/**
 * Nearest double, NaN for a NULL handle.
 *
 * # Safety
 * `r` must be NULL or a live handle.
 */
double hs_rational_to_double(const struct HsRational *r);

/**
 * # Safety
 * `r` must be NULL or a handle not yet freed.
 */
void hs_rational_free(struct HsRational *r);

/**
 * Adjustment factor `F_κ(k)` as a rational function of `k`. With
 * `max_terms == 0` the default resource budget applies and `κ` is limited
 * to the default range of the ensemble.
 *
 * # Safety
 * `out` must be writable; the handle it receives is freed with
 * `hs_factor_free`.
 */
enum HsStatus hs_symbolic_factor(enum HsEnsemble ensemble,
                                 uint32_t kappa,
                                 uint64_t max_terms,
                                 struct HsFactor **out);

/**
 * Number of numerator coefficients (degree + 1), 0 for a NULL handle.
 *
 * # Safety
 * `f` must be NULL or a live handle.
 */
size_t hs_factor_numerator_len(const struct HsFactor *f);

/**
 * Coefficient of `k^i` in the numerator as `num/den` text, or NULL when
 * out of range.
 *
 * # Safety
 * `f` must be NULL or a live handle.
 */
char *hs_factor_numerator_coeff(const struct HsFactor *f, size_t i);

/**
 * Denominator in product form, e.g. `32(k+3)(4k+11)(4k+13)`.
 *
 * # Safety
 * `f` must be NULL or a live handle.
 */
char *hs_factor_denominator_form(const struct HsFactor *f);

/**
 * `F_κ(k)` at integer `k`.
 *
 * # Safety
 * `f` must be a live handle and `out` writable.
 */
enum HsStatus hs_factor_eval(const struct HsFactor *f, int64_t k, struct HsRational **out);

/**
 * # Safety
 * `f` must be NULL or a handle not yet freed.
 */
void hs_factor_free(struct HsFactor *f);

/**
 * Monte Carlo pass over `samples` states with the given seed and working
 * precision in bits (0 selects 256).
 *
 * # Safety
 * `out` must be writable; the handle it receives is freed with
 * `hs_mc_free`.
 */
enum HsStatus hs_mc_run(enum HsEnsemble ensemble,
                        uint64_t samples,
                        uint64_t seed,
                        uint32_t precision_bits,
                        uint32_t max_order,
                        struct HsMcResult **out);

/**
 * Estimate and standard error of `⟨|ρ|^k |ρ^PT|^κ⟩`.
 *
 * # Safety
 * `r` must be a live handle; `estimate` and `stderr_out` writable.
 */
enum HsStatus hs_mc_moment(const struct HsMcResult *r,
                           uint32_t k,
                           uint32_t kappa,
                           double *estimate,
                           double *stderr_out);

/**
 * Estimate and standard error of the separability probability.
 *
 * # Safety
 * `r` must be a live handle; `estimate` and `stderr_out` writable.
 */
enum HsStatus hs_mc_separability(const struct HsMcResult *r, double *estimate, double *stderr_out);

/**
 * # Safety
 * `r` must be NULL or a handle not yet freed.
 */
void hs_mc_free(struct HsMcResult *r);

/**
 * Two-rebit density of `t = 2^8|ρ|` at `t ∈ [0, 1]`.
 *
 * # Safety
 * `out` must be writable.
 */
enum HsStatus hs_density_eval(double t, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HSMOMENTS_H */
