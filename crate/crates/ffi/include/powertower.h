#ifndef POWERTOWER_H
#define POWERTOWER_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum PtStatus {
  PT_OK = 0,
  PT_ERR_NULL_POINTER = 1,
  PT_ERR_DOMAIN = 2,
  PT_ERR_CONVERGENCE = 3,
  PT_ERR_INVALID_BOUNDS = 4,
  PT_ERR_UNSUPPORTED_DISTRIBUTION = 5,
  PT_ERR_PRECONDITION = 6,
  PT_ERR_INSUFFICIENT_SAMPLES = 7,
  PT_ERR_INFEASIBLE = 8,
  PT_ERR_DEGENERATE_CASE = 9,
  PT_ERR_INVALID_SPEC = 10,
  PT_ERR_INVALID_UTF8 = 11,
  PT_ERR_PANIC = 12,
} PtStatus;

typedef enum PtOutcome {
  PT_CONVERGES_AS = 0,
  PT_DIVERGES_TO_INFINITY_AS = 1,
  PT_DIVERGES_BY_OSCILLATION = 2,
  PT_INDETERMINATE = 3,
} PtOutcome;

// Opaque base distribution.
typedef struct PtDist PtDist;

// Opaque inverse tower distribution function.
typedef struct PtInvTower PtInvTower;

// Verdict of the classifier; `rule` is a static NUL-terminated identifier.
typedef struct PtVerdict {
  enum PtOutcome outcome;
  const char *rule;
} PtVerdict;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failure on this thread, or NULL. The pointer stays
// valid until the next failing call on the same thread.
const char *pt_last_error(void);

// Library version as a static string.
const char *pt_version(void);

// Principal branch of the Lambert W function.
//
// # Safety
// `out_value` must be valid for writes.
enum PtStatus pt_lambert_w0(double x, double *out_value);

// Infinite tower `C(x)` for `x` in `(0, 1]`.
//
// # Safety
// `out_value` must be valid for writes.
enum PtStatus pt_tower_limit_c(double x, double *out_value);

// Boundary function `G(x)` for `x` in `(0, 1]`.
//
// # Safety
// `out_value` must be valid for writes.
enum PtStatus pt_g_boundary(double x, double *out_value);

// Bisection oracle for `G(x)`.
//
// # Safety
// `out_value` must be valid for writes.
enum PtStatus pt_h_oracle(double x, double *out_value);

// `log★` of a double; 0 for `x <= 1`.
//
// # Safety
// `out_value` must be valid for writes.
enum PtStatus pt_log_star(double x, uint64_t *out_value);

// Even and odd limits of the alternating tower `x^(y^(x^…))`.
//
// # Safety
// `out_even` and `out_odd` must be valid for writes.
enum PtStatus pt_at_limits(double x, double y, double tol, double *out_even, double *out_odd);

// Classifies from support bounds alone (tail unknown).
//
// # Safety
// `out_verdict` must be valid for writes.
enum PtStatus pt_classify_bounds(double a, double b, struct PtVerdict *out_verdict);

// Parses a distribution from `{"family": ..., "params": {...}}`.
//
// # Safety
// `json` must be a NUL-terminated string; `out_dist` must be valid for writes.
enum PtStatus pt_dist_from_json(const char *json, struct PtDist **out_dist);

// Releases a distribution; NULL is ignored.
//
// # Safety
// `dist` must come from [`pt_dist_from_json`] and not be used afterwards.
void pt_dist_free(struct PtDist *dist);

// Support bounds `(a, b)` of a distribution.
//
// # Safety
// `dist` must be a live handle; the out-pointers must be valid for writes.
enum PtStatus pt_dist_support(const struct PtDist *dist, double *out_a, double *out_b);

// Classifies a distribution, using its analytic tail when `a = 1`.
//
// # Safety
// `dist` must be a live handle; `out_verdict` must be valid for writes.
enum PtStatus pt_dist_classify(const struct PtDist *dist, struct PtVerdict *out_verdict);

// `paths` draws of `T_depth` written to `out_values[0..paths]` (`+inf` for
// values beyond double range). `backward` selects the linear-time chain.
//
// # Safety
// `dist` must be a live handle; `out_values` must hold `paths` doubles.
enum PtStatus pt_dist_sample_towers(const struct PtDist *dist,
                                    uintptr_t depth,
                                    uintptr_t paths,
                                    uint64_t seed,
                                    bool backward,
                                    double *out_values);

// Mean even and odd tower values and their difference at height `depth`.
//
// # Safety
// `dist` must be a live handle; the out-pointers must be valid for writes.
enum PtStatus pt_dist_oscillation_gap(const struct PtDist *dist,
                                      uintptr_t depth,
                                      uintptr_t paths,
                                      uint64_t seed,
                                      double *out_even,
                                      double *out_odd,
                                      double *out_median_gap);

// Monte Carlo `E[min(N, n_cap)]` with its standard error and censored fraction.
//
// # Safety
// `dist` must be a live handle; the out-pointers must be valid for writes.
enum PtStatus pt_dist_stopping_time(const struct PtDist *dist,
                                    uintptr_t n_cap,
                                    uintptr_t paths,
                                    uint64_t seed,
                                    double *out_mean,
                                    double *out_std_error,
                                    double *out_censored_fraction);

// Whether `U^r`, `U ~ Unif[alpha, beta]`, has a tower distribution.
//
// # Safety
// `out_feasible` must be valid for writes.
enum PtStatus pt_invtower_feasible(double alpha, double beta, double r, bool *out_feasible);

// Builds the inverse tower CDF; fails with `PtErrInfeasible` when no tower
// distribution exists.
//
// # Safety
// `out_handle` must be valid for writes.
enum PtStatus pt_invtower_new(double alpha, double beta, double r, struct PtInvTower **out_handle);

// Releases an inverse tower handle; NULL is ignored.
//
// # Safety
// `h` must come from [`pt_invtower_new`] and not be used afterwards.
void pt_invtower_free(struct PtInvTower *h);

// `F(x)`.
//
// # Safety
// `h` must be a live handle; `out_value` must be valid for writes.
enum PtStatus pt_invtower_cdf(const struct PtInvTower *h, double x, double *out_value);

// Generalized inverse `inf{x : F(x) >= u}`.
//
// # Safety
// `h` must be a live handle; `out_value` must be valid for writes.
enum PtStatus pt_invtower_quantile(const struct PtInvTower *h, double u, double *out_value);

// One-sample Kolmogorov-Smirnov test of `samples` against the continuous
// CDF `cdf(x, ctx)`.
//
// # Safety
// `samples` must hold `n` doubles; the out-pointers must be valid for writes.
enum PtStatus pt_ks_one_sample(const double *samples,
                               uintptr_t n,
                               double (*cdf)(double x, void *ctx),
                               void *ctx,
                               double *out_statistic,
                               double *out_p_value);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* POWERTOWER_H */
