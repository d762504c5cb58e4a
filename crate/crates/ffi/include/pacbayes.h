#ifndef PACBAYES_H
#define PACBAYES_H

/* Generated with cbindgen:0.29.4 */

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

// Hinge loss `max(0, 1 - y s)`.
#define PB_LOSS_HINGE 0

// Logistic loss `log(1 + exp(-y s))`.
#define PB_LOSS_LOGISTIC 1

// Zero-one loss; not accepted where a surrogate is required.
#define PB_LOSS_ZERO_ONE 2

// Gamma hyperprior (shape, rate) on the factor scales.
#define PB_GAMMA 0

// Inverse-gamma hyperprior (shape, scale) on the factor scales.
#define PB_INVERSE_GAMMA 1

// Features uniform on `{-1, +1}^d`.
#define PB_FEATURES_RADEMACHER 0

// Features uniform on the unit sphere.
#define PB_FEATURES_UNIT_SPHERE 1

typedef enum PbStatus {
  PB_STATUS_OK = 0,
  // A required pointer argument was null.
  PB_STATUS_NULL_POINTER = 1,
  // A string argument was not valid UTF-8.
  PB_STATUS_INVALID_UTF8 = 2,
  // An argument lies outside the domain of the operation, or an enum
  // code is unknown.
  PB_STATUS_DOMAIN = 3,
  // A parameter lies outside the support of its prior.
  PB_STATUS_SUPPORT = 4,
  PB_STATUS_DIMENSION_MISMATCH = 5,
  // A configuration failed validation or could not be parsed.
  PB_STATUS_CONFIG = 6,
  // A sampler exceeded its rejection budget or failed its acceptance
  // diagnostics.
  PB_STATUS_SAMPLING = 7,
  // The variational objective increased.
  PB_STATUS_OPTIMIZATION = 8,
  PB_STATUS_IO = 9,
  // An output buffer is smaller than the data to copy.
  PB_STATUS_BUFFER_TOO_SMALL = 10,
  // Some experiment cells failed; the others were written.
  PB_STATUS_PARTIAL_FAILURE = 11,
  PB_STATUS_PANIC = 12,
  PB_STATUS_OTHER = 13,
} PbStatus;

// Dataset handle.
typedef struct PbDataset PbDataset;

// Parsed experiment configuration.
typedef struct PbExperiment PbExperiment;

// Prior handle.
typedef struct PbPrior PbPrior;

// Posterior draws from a chain.
typedef struct PbSamples PbSamples;

// Loss and margin constants of the bounds; `psi` multiplies the bound.
typedef struct PbBoundConstants {
  double b_loss;
  double l_lip;
  double k_bernstein;
  double c_margin;
  double psi;
} PbBoundConstants;

// Random-walk Metropolis settings.
typedef struct PbChainConfig {
  double lambda;
  size_t n_steps;
  size_t burn_in;
  size_t thin;
  double proposal_scale;
  uint64_t seed;
  // Sweep single-coordinate moves instead of joint moves (vector priors).
  bool coordinatewise;
  // Tune proposal scales during burn-in.
  bool adapt;
  double jump_prob;
  double jump_scale;
} PbChainConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *pb_version(void);

// Message of the last failure on this thread, or NULL if none. The pointer
// stays valid until the next failing call or [`pb_clear_error`] on the same
// thread.
const char *pb_last_error_message(void);

void pb_clear_error(void);

// Dense dataset from a row-major `n x d` feature matrix and `n` labels in
// `{-1, +1}`. `cond_prob` (length `n`, `P(y = 1 | x)`) may be NULL.
//
// # Safety
// `x` must point to `n * d` readable doubles, `labels` to `n`, and
// `cond_prob` to `n` when not NULL. `out` must be writable.
enum PbStatus pb_dataset_new_dense(const double *x,
                                   size_t n,
                                   size_t d,
                                   const double *labels,
                                   const double *cond_prob,
                                   struct PbDataset **out);

// Entry-observation dataset for a `rows x cols` matrix: observation `t` is
// entry `(row_idx[t], col_idx[t])` with label `labels[t]`. `cond_prob` may
// be NULL.
//
// # Safety
// `row_idx`, `col_idx` and `labels` must point to `n` readable values, and
// `cond_prob` to `n` when not NULL. `out` must be writable.
enum PbStatus pb_dataset_new_entries(size_t rows,
                                     size_t cols,
                                     const size_t *row_idx,
                                     const size_t *col_idx,
                                     const double *labels,
                                     size_t n,
                                     const double *cond_prob,
                                     struct PbDataset **out);

// Draws `n` observations from the sparse linear model. When `theta_star`
// is not NULL the Bayes direction (length `d`) is written there.
//
// # Safety
// `out` must be writable; `theta_star`, when not NULL, must hold `d`
// writable doubles.
enum PbStatus pb_dataset_generate_sparse(size_t d,
                                         size_t s_star,
                                         double signal,
                                         double h,
                                         uint32_t feature_law,
                                         size_t n,
                                         uint64_t seed,
                                         struct PbDataset **out,
                                         double *theta_star);

// Number of observations; 0 for NULL.
//
// # Safety
// `data` must be NULL or a live handle.
size_t pb_dataset_len(const struct PbDataset *data);

// # Safety
// `data` must be NULL or a handle not yet freed.
void pb_dataset_free(struct PbDataset *data);

// Isotropic Gaussian `N(0, sigma^2 I_d)`.
//
// # Safety
// `out` must be writable.
enum PbStatus pb_prior_gaussian(double sigma, size_t d, struct PbPrior **out);

// Product of scaled Student-t(3) densities restricted to the L1 ball of
// radius `c1`.
//
// # Safety
// `out` must be writable.
enum PbStatus pb_prior_student(double tau, double c1, size_t d, struct PbPrior **out);

// Hierarchical low-rank prior on `d1 x k` and `d2 x k` factors with a
// [`PB_GAMMA`] or [`PB_INVERSE_GAMMA`] hyperprior `(a, b)` on the column
// scales.
//
// # Safety
// `out` must be writable.
enum PbStatus pb_prior_low_rank(size_t d1,
                                size_t d2,
                                size_t k_rank,
                                double a,
                                double b,
                                uint32_t gamma_kind,
                                struct PbPrior **out);

// # Safety
// `prior` must be NULL or a handle not yet freed.
void pb_prior_free(struct PbPrior *prior);

// Loss at label `y` and score `score`.
//
// # Safety
// `out` must be writable.
enum PbStatus pb_loss(uint32_t loss, double y, double score, double *out);

// Empirical risk of the linear predictor `theta` (length `d`) on a dense
// dataset.
//
// # Safety
// `data` must be a live handle, `theta` must point to `d` readable
// doubles and `out` must be writable.
enum PbStatus pb_empirical_risk(const struct PbDataset *data,
                                uint32_t loss,
                                const double *theta,
                                size_t d,
                                double *out);

// Normalised Gibbs weights `w_m ∝ prior_m exp(-lambda risk_m)` over `m`
// candidates.
//
// # Safety
// `risks` and `prior_weights` must point to `m` readable doubles and
// `out_weights` to `m` writable doubles.
enum PbStatus pb_gibbs_weights(const double *risks,
                               const double *prior_weights,
                               size_t m,
                               double lambda,
                               double *out_weights);

// `E max(0, 1 - Z)` for `Z ~ N(mu, s^2)`.
//
// # Safety
// `out` must be writable.
enum PbStatus pb_expected_hinge_gaussian(double mu, double s, double *out);

// `KL(N(m, s^2 I) || N(0, sigma^2 I))` for a mean of length `d`.
//
// # Safety
// `m` must point to `d` readable doubles and `out` must be writable.
enum PbStatus pb_kl_gaussian_isotropic(const double *m,
                                       size_t d,
                                       double s,
                                       double sigma,
                                       double *out);

// Bound right-hand side for sparse linear classification under the
// scaled Student prior.
//
// # Safety
// `c` must point to readable constants and `out_total` must be writable.
enum PbStatus pb_bound_rhs_sparse(const struct PbBoundConstants *c,
                                  size_t d,
                                  size_t s_star,
                                  double c1,
                                  double c_x,
                                  size_t n,
                                  double tau,
                                  double *out_total);

// Bound right-hand side for one-bit matrix completion with the
// hierarchical prior.
//
// # Safety
// `c` must point to readable constants and `out_total` must be writable.
enum PbStatus pb_bound_rhs_matcomp(const struct PbBoundConstants *c,
                                   size_t r,
                                   size_t d1,
                                   size_t d2,
                                   size_t n,
                                   double a,
                                   double b_inf,
                                   double *out_total);

// Runs a Gibbs-posterior chain. Vector priors use the linear chain on a
// dense dataset; the low-rank prior uses the block factor chain on an
// entry dataset (hinge loss only).
//
// # Safety
// `data`, `prior` and `config` must be live, readable pointers and `out`
// must be writable.
enum PbStatus pb_run_chain(const struct PbDataset *data,
                           const struct PbPrior *prior,
                           uint32_t loss,
                           const struct PbChainConfig *config,
                           struct PbSamples **out);

// Number of retained draws; 0 for NULL.
//
// # Safety
// `s` must be NULL or a live handle.
size_t pb_samples_count(const struct PbSamples *s);

// Length of one flattened draw (factors: `L`, `R`, then the scales, each
// row-major); 0 for NULL.
//
// # Safety
// `s` must be NULL or a live handle.
size_t pb_samples_width(const struct PbSamples *s);

// Acceptance rate of the chain; NaN for NULL.
//
// # Safety
// `s` must be NULL or a live handle.
double pb_samples_acceptance_rate(const struct PbSamples *s);

// Copies all draws, row-major (`count x width`), into `out`.
//
// # Safety
// `s` must be a live handle and `out` must hold `len` writable doubles.
enum PbStatus pb_samples_copy(const struct PbSamples *s, double *out, size_t len);

// Writes the posterior-mean predictor: the mean vector for linear chains,
// the mean of `L R^T` (row-major `d1 x d2`) for factor chains. The length
// written is stored in `out_written` when not NULL.
//
// # Safety
// `s` must be a live handle, `out` must hold `len` writable doubles and
// `out_written` must be NULL or writable.
enum PbStatus pb_samples_mean(const struct PbSamples *s,
                              double *out,
                              size_t len,
                              size_t *out_written);

// # Safety
// `s` must be NULL or a handle not yet freed.
void pb_samples_free(struct PbSamples *s);

// Parses and validates an experiment configuration (the JSON accepted by
// `pacbayes --config`).
//
// # Safety
// `json` must be a NUL-terminated string and `out` must be writable.
enum PbStatus pb_experiment_from_json(const char *json, struct PbExperiment **out);

// Runs every cell and writes the report files into `out_dir`. The fitted
// slope of the randomized-classifier column (NaN when unavailable) goes to
// `out_slope` when not NULL. Returns [`PbStatus::PartialFailure`] when some
// cells failed; the reports and failure manifest are still written.
//
// # Safety
// `exp` must be a live handle, `out_dir` a NUL-terminated string and
// `out_slope` NULL or writable.
enum PbStatus pb_experiment_run(const struct PbExperiment *exp,
                                const char *out_dir,
                                double *out_slope);

// # Safety
// `exp` must be NULL or a handle not yet freed.
void pb_experiment_free(struct PbExperiment *exp);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PACBAYES_H */
