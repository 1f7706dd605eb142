#ifndef CPSCAN_H
#define CPSCAN_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CpsHForm {
  // H_α(λ)
  CPS_H_FORM_OF_LAMBDA = 0,
  // (H_α(λ) − H_α(λ/2))/(λ/2)
  CPS_H_FORM_RATE = 1,
} CpsHForm;

typedef enum CpsStatKind {
  CPS_STAT_KIND_Z1 = 1,
  CPS_STAT_KIND_Z2 = 2,
  CPS_STAT_KIND_Z3 = 3,
  CPS_STAT_KIND_Z4 = 4,
} CpsStatKind;

typedef enum CpsStatus {
  CPS_STATUS_OK = 0,
  CPS_STATUS_INPUT = 2,
  CPS_STATUS_PARAMETER = 3,
  CPS_STATUS_RESOURCE = 4,
  CPS_STATUS_DOMAIN = 5,
  CPS_STATUS_NULL_POINTER = 6,
  CPS_STATUS_INTERNAL = 7,
} CpsStatus;

// Closed-form approximations and simulated fields.
typedef enum CpsTailKind {
  CPS_TAIL_KIND_P1 = 1,
  CPS_TAIL_KIND_P2 = 2,
  CPS_TAIL_KIND_P3 = 3,
  CPS_TAIL_KIND_P4 = 4,
  CPS_TAIL_KIND_FREE2 = 5,
  CPS_TAIL_KIND_FREE3 = 6,
} CpsTailKind;

typedef enum CpsTrend {
  CPS_TREND_LINEAR = 0,
  CPS_TREND_QUADRATIC = 1,
} CpsTrend;

// Opaque table of limit constants.
typedef struct CpsConstantTable CpsConstantTable;

// Opaque observation series.
typedef struct CpsSeries CpsSeries;

typedef struct CpsStatReport {
  double value;
  size_t i_star;
  size_t j_star;
} CpsStatReport;

typedef struct CpsTailApprox {
  double value;
  double log_value;
  double constant;
  double exponent_power;
  bool pre_asymptotic;
} CpsTailApprox;

typedef struct CpsAsymptoticParams {
  double s1;
  double s2;
  double a;
  double b;
  double alpha;
  double beta;
  double c;
  enum CpsTrend trend;
} CpsAsymptoticParams;

typedef struct CpsConstantEstimate {
  double value;
  double std_error;
  size_t n_replicates;
  double step;
  double horizon;
  size_t n_points;
} CpsConstantEstimate;

typedef struct CpsTailEstimate {
  double p_hat;
  double ci_low;
  double ci_high;
  uint64_t exceedances;
  size_t n_rep;
  size_t grid_m;
  double threshold;
} CpsTailEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread. Valid until the next
// call into the library from the same thread.
const char *cps_last_error_message(void);

// Library version, a static NUL-terminated string.
const char *cps_version(void);

// Copy `len` values into a new series (`len ≥ 2`, all finite).
//
// # Safety
// `values` must point to `len` readable doubles; `out` must be writable.
enum CpsStatus cps_series_new(const double *values, size_t len, struct CpsSeries **out);

// # Safety
// `series` must come from [`cps_series_new`] and not be used afterwards. Null is ignored.
void cps_series_free(struct CpsSeries *series);

// Number of observations, or 0 for a null handle.
//
// # Safety
// `series` must be null or a live handle.
size_t cps_series_len(const struct CpsSeries *series);

// Compute a scan statistic. `mu0` and `delta` may be NaN when not needed.
//
// # Safety
// `series` must be a live handle; `out` must be writable.
enum CpsStatus cps_statistic(const struct CpsSeries *series,
                             enum CpsStatKind kind,
                             double mu0,
                             double delta,
                             struct CpsStatReport *out);

// Approximate p-value of an observed statistic for `m` observations.
// `delta` is required for Z1–Z3 and ignored for Z4.
//
// # Safety
// `out` must be writable.
enum CpsStatus cps_pvalue(enum CpsStatKind kind,
                          size_t m,
                          double delta,
                          double level,
                          struct CpsTailApprox *out);

// Closed-form tail approximation. `x` is `u` for all kinds except P4, where it is `d`.
// Unused parameters may be NaN.
//
// # Safety
// `out` must be writable.
enum CpsStatus cps_tail_formula(enum CpsTailKind kind,
                                double c,
                                double d,
                                double x,
                                struct CpsTailApprox *out);

// A table holding the closed-form constants H₁ = 1 and H₂ = 1/√π.
struct CpsConstantTable *cps_constant_table_new(void);

// # Safety
// `table` must come from [`cps_constant_table_new`] and not be used afterwards. Null is ignored.
void cps_constant_table_free(struct CpsConstantTable *table);

// Register a user-supplied Pickands constant `H_α`.
//
// # Safety
// `table` must be a live handle.
enum CpsStatus cps_constant_table_set_pickands(struct CpsConstantTable *table,
                                               double alpha,
                                               double value);

// Register a user-supplied constant `P_α^f` for the penalty `(b_over_a, c_over_sqrt_a)`.
//
// # Safety
// `table` must be a live handle.
enum CpsStatus cps_constant_table_set_piterbarg(struct CpsConstantTable *table,
                                                double alpha,
                                                double b_over_a,
                                                double c_over_sqrt_a,
                                                double value);

// General field tail approximation at level `u`. A null `table` uses the built-in constants.
//
// # Safety
// `params` must be readable, `table` null or live, `out` writable.
enum CpsStatus cps_field_tail(const struct CpsAsymptoticParams *params,
                              double u,
                              const struct CpsConstantTable *table,
                              struct CpsTailApprox *out);

// Ψ(x) = P{N(0,1) > x}.
double cps_norm_survival(double x);

// ln Ψ(x), finite for every finite x.
double cps_log_norm_survival(double x);

// Monte Carlo estimate of `H_α(λ)` or its increment form (tilted estimator).
//
// # Safety
// `out` must be writable.
enum CpsStatus cps_estimate_h(double alpha,
                              double lambda,
                              enum CpsHForm form,
                              double step,
                              size_t n_rep,
                              uint64_t seed,
                              struct CpsConstantEstimate *out);

// Monte Carlo estimate of `P_α^f(λ, λ1)` (tilted estimator).
//
// # Safety
// `out` must be writable.
enum CpsStatus cps_estimate_p(double alpha,
                              double b_over_a,
                              double c_over_sqrt_a,
                              double lambda,
                              double lambda1,
                              double step,
                              size_t n_rep,
                              uint64_t seed,
                              struct CpsConstantEstimate *out);

// Monte Carlo estimate of `Q_α(λ, λ1)` (tilted estimator).
//
// # Safety
// `out` must be writable.
enum CpsStatus cps_estimate_q(double alpha,
                              double lambda,
                              double lambda1,
                              double step,
                              size_t n_rep,
                              uint64_t seed,
                              struct CpsConstantEstimate *out);

// Exceedance frequency of a simulated field on `grid_m` intervals. `level`
// is `u`, or `d` for P4. Unused parameters may be NaN.
//
// # Safety
// `out` must be writable.
enum CpsStatus cps_simulate_sup(enum CpsTailKind kind,
                                double c,
                                double d,
                                double level,
                                size_t grid_m,
                                size_t n_rep,
                                uint64_t seed,
                                struct CpsTailEstimate *out);

// `Σ_{k≤terms} (4k²u² − 1)e^{−2k²u²}`, the tail of the Brownian-bridge range.
//
// # Safety
// `out` must be writable.
enum CpsStatus cps_kuiper_half_tail(double u, size_t terms, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CPSCAN_H */
