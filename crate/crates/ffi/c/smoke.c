/* Exercises the C ABI end to end: data generation, a chain, bounds and
 * error reporting. Exits non-zero on the first unexpected result. */
#include <math.h>
#include <stdio.h>
#include <stdlib.h>

#include "pacbayes.h"

#define CHECK(call)                                                            \
  do {                                                                         \
    enum PbStatus status_ = (call);                                            \
    if (status_ != PB_STATUS_OK) {                                             \
      fprintf(stderr, "%s failed with %d: %s\n", #call, (int)status_,          \
              pb_last_error_message());                                        \
      return 1;                                                                \
    }                                                                          \
  } while (0)

int main(void) {
  printf("pacbayes %s\n", pb_version());

  PbDataset *data = NULL;
  double theta_star[5];
  CHECK(pb_dataset_generate_sparse(5, 2, 1.0, 0.4, PB_FEATURES_UNIT_SPHERE,
                                   200, 42, &data, theta_star));
  if (pb_dataset_len(data) != 200) {
    return 1;
  }

  PbPrior *prior = NULL;
  CHECK(pb_prior_gaussian(1.0, 5, &prior));
  PbChainConfig cfg = {.lambda = 200.0, .n_steps = 4000, .burn_in = 1000,
                       .thin = 5, .proposal_scale = 0.2, .seed = 7,
                       .coordinatewise = false, .adapt = true,
                       .jump_prob = 0.0, .jump_scale = 1.0};
  PbSamples *samples = NULL;
  CHECK(pb_run_chain(data, prior, PB_LOSS_HINGE, &cfg, &samples));
  double mean[5];
  size_t written = 0;
  CHECK(pb_samples_mean(samples, mean, 5, &written));
  double risk = 0.0;
  CHECK(pb_empirical_risk(data, PB_LOSS_ZERO_ONE, mean, 5, &risk));
  printf("draws %zu, acceptance %.3f, training 0-1 risk %.3f\n",
         pb_samples_count(samples), pb_samples_acceptance_rate(samples), risk);
  if (written != 5 || risk > 0.45) {
    return 1;
  }

  PbBoundConstants k = {.b_loss = 51.0, .l_lip = 1.0, .k_bernstein = 1.0,
                        .c_margin = 1.0, .psi = 1.0};
  double total = 0.0;
  CHECK(pb_bound_rhs_matcomp(&k, 2, 30, 30, 180, 1.0, 1.0, &total));
  printf("matrix-completion bound %.6f\n", total);

  double kl = 0.0;
  double m[1] = {1.0};
  CHECK(pb_kl_gaussian_isotropic(m, 1, 1.0, 1.0, &kl));
  if (fabs(kl - 0.5) > 1e-15) {
    return 1;
  }

  /* A negative scale must be rejected with a message. */
  PbPrior *bad = NULL;
  if (pb_prior_gaussian(-1.0, 3, &bad) != PB_STATUS_DOMAIN ||
      pb_last_error_message() == NULL) {
    return 1;
  }
  printf("expected error: %s\n", pb_last_error_message());

  pb_samples_free(samples);
  pb_prior_free(prior);
  pb_dataset_free(data);
  return 0;
}
