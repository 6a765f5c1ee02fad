/* The public header must compile as plain C and link against the shared library. */
#include <stdio.h>

#include "aoimec/aoimec.h"

int main(void) {
  aoim_eval e;
  aoim_policy* policy = NULL;
  aoim_params params = aoim_params_default();
  int failures = 0;

  if (aoim_mec_only(0.0, &e) != AOIM_OK || e.delta != 1.5 || e.p_bar != 1.0) {
    fprintf(stderr, "mec_only: %s\n", aoim_last_error());
    ++failures;
  }
  if (aoim_policy_service_threshold(1, params.a_max, &policy) != AOIM_OK) {
    fprintf(stderr, "policy: %s\n", aoim_last_error());
    return 1;
  }
  if (aoim_evaluate_exact(policy, &params, &e) != AOIM_OK || e.delta < 1.833 || e.delta > 1.834) {
    fprintf(stderr, "evaluate_exact: %s\n", aoim_last_error());
    ++failures;
  }
  aoim_policy_destroy(policy);
  if (aoim_local_only(0.0, &e) != AOIM_ERR_INVALID_ARGUMENT) ++failures;
  printf("aoimec %s: %s\n", aoim_version(), failures ? "FAIL" : "ok");
  return failures ? 1 : 0;
}
