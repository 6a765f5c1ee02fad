/*
 * aoimec: age-of-information optimal offloading between a geometric local server
 * and a one-slot mobile edge cloud (MEC).
 *
 * C interface. All objects are opaque handles created by aoim_*_create-style calls and
 * released by the matching aoim_*_destroy. Every fallible call returns an aoim_status;
 * on failure aoim_last_error() describes the problem (per thread, valid until the next
 * failing call on that thread). Output pointers are left untouched on failure unless
 * noted otherwise.
 */
#ifndef AOIMEC_AOIMEC_H
#define AOIMEC_AOIMEC_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(AOIMEC_BUILDING)
#    define AOIM_API __declspec(dllexport)
#  else
#    define AOIM_API __declspec(dllimport)
#  endif
#else
#  define AOIM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum aoim_status {
  AOIM_OK = 0,
  AOIM_ERR_INVALID_ARGUMENT = 1,
  AOIM_ERR_NOT_CONVERGED = 2,
  AOIM_ERR_TOO_LARGE = 3,
  AOIM_ERR_IO = 4,
  AOIM_ERR_INTERNAL = 5
} aoim_status;

AOIM_API const char* aoim_status_string(aoim_status status);
AOIM_API const char* aoim_last_error(void);
AOIM_API const char* aoim_version(void);

/* mu in (0,1], lambda >= 0, beta in (0,1), a_max >= 2. */
typedef struct aoim_params {
  double mu;
  double lambda;
  double beta;
  int32_t a_max;
} aoim_params;

/* mu = 0.5, lambda = 0, beta = 0.99, a_max = 50 */
AOIM_API aoim_params aoim_params_default(void);
/* 50 for mu >= 0.1, 400 below */
AOIM_API int32_t aoim_default_a_max(double mu);

typedef struct aoim_eval {
  double delta; /* average age */
  double p_bar; /* fraction of slots that use the MEC */
  double g;     /* delta + lambda * p_bar */
} aoim_eval;

typedef struct aoim_moments {
  double e_s;
  double e_s2;
  double e_y;
} aoim_moments;

/* ---- closed forms ---- */

AOIM_API aoim_status aoim_local_only(double mu, aoim_eval* out);
AOIM_API aoim_status aoim_mec_only(double lambda, aoim_eval* out);
AOIM_API aoim_status aoim_service_moments(double mu, int64_t z_star, aoim_moments* out);
AOIM_API aoim_status aoim_service_threshold(double mu, int64_t z_star, double lambda, aoim_eval* out);

/* ---- policies ---- */

typedef struct aoim_policy aoim_policy;

AOIM_API aoim_status aoim_policy_age_threshold(int32_t a_star, int32_t a_max, aoim_policy** out);
AOIM_API aoim_status aoim_policy_service_threshold(int32_t z_star, int32_t a_max, aoim_policy** out);
AOIM_API aoim_status aoim_policy_local_only(int32_t a_max, aoim_policy** out);
AOIM_API aoim_status aoim_policy_mec_only(int32_t a_max, aoim_policy** out);
/* thresholds[z] is the smallest age that offloads in column z; later columns always offload. */
AOIM_API aoim_status aoim_policy_from_thresholds(const int32_t* thresholds, size_t count, int32_t a_max,
                                                 aoim_policy** out);
/* *action = 1 for MEC, 0 for local. */
AOIM_API aoim_status aoim_policy_action(const aoim_policy* policy, int32_t a, int32_t z, int* action);
AOIM_API int32_t aoim_policy_a_max(const aoim_policy* policy);
AOIM_API void aoim_policy_destroy(aoim_policy* policy);

/* Exact stationary evaluation; uses params->mu and params->lambda, truncation from the policy. */
AOIM_API aoim_status aoim_evaluate_exact(const aoim_policy* policy, const aoim_params* params, aoim_eval* out);

/* ---- optimal policy ---- */

typedef struct aoim_solution aoim_solution;

/* Relative value iteration. On AOIM_ERR_NOT_CONVERGED *out is still set and describes the
 * last iterate. */
AOIM_API aoim_status aoim_rvi_solve(const aoim_params* params, aoim_solution** out);
/* Exhaustive search over monotone threshold tables with entries in [1, search_bound].
 * AOIM_ERR_TOO_LARGE when the table count exceeds the search limit. */
AOIM_API aoim_status aoim_brute_force(const aoim_params* params, int32_t search_bound, aoim_solution** out);
AOIM_API double aoim_solution_gain(const aoim_solution* solution);
AOIM_API int64_t aoim_solution_iterations(const aoim_solution* solution);
AOIM_API double aoim_solution_span_residual(const aoim_solution* solution);
AOIM_API int aoim_solution_converged(const aoim_solution* solution);
/* Thresholds on the service columns reachable from (1,0): z = 0 .. count-1. */
AOIM_API size_t aoim_solution_threshold_count(const aoim_solution* solution);
AOIM_API int32_t aoim_solution_threshold(const aoim_solution* solution, size_t z);
/* Borrowed; lives as long as the solution. */
AOIM_API const aoim_policy* aoim_solution_policy(const aoim_solution* solution);
AOIM_API void aoim_solution_destroy(aoim_solution* solution);

/* ---- simulation ---- */

typedef struct aoim_sim_config {
  uint64_t horizon;
  uint64_t seed;
  uint64_t warmup;
  uint32_t batches;
} aoim_sim_config;

typedef struct aoim_sim_result {
  double delta_hat;
  double p_bar_hat;
  double stderr_delta;
  double stderr_p;
  uint64_t slots;
  double ref_fraction; /* fraction of slots in state (1,0) */
  double stderr_ref;
  uint64_t completions;
} aoim_sim_result;

/* warmup = horizon / 100, 100 batches */
AOIM_API aoim_sim_config aoim_sim_config_default(uint64_t horizon, uint64_t seed);
AOIM_API aoim_status aoim_simulate(const aoim_policy* policy, const aoim_params* params, const aoim_sim_config* config,
                                   aoim_sim_result* out);

/* ---- verification suite ---- */

typedef struct aoim_verify_options {
  aoim_params params;
  int32_t vi_iterations;
  uint64_t sim_horizon;
  uint64_t seed;
  int32_t z_star_max;
  int corrupt_value_table;
} aoim_verify_options;

typedef struct aoim_report aoim_report;

AOIM_API aoim_verify_options aoim_verify_options_default(void);
AOIM_API aoim_status aoim_verify(const aoim_verify_options* options, aoim_report** out);
AOIM_API int aoim_report_passed(const aoim_report* report);
/* Borrowed JSON text; lives as long as the report. */
AOIM_API const char* aoim_report_json(const aoim_report* report);
AOIM_API void aoim_report_destroy(aoim_report* report);

/* ---- frontier sweep ---- */

typedef enum aoim_family {
  AOIM_FAMILY_LOCAL_ONLY = 0,
  AOIM_FAMILY_MEC_ONLY = 1,
  AOIM_FAMILY_AGE_THRESHOLD = 2,
  AOIM_FAMILY_SERVICE_THRESHOLD = 3,
  AOIM_FAMILY_OPTIMAL = 4
} aoim_family;

typedef enum aoim_method {
  AOIM_METHOD_CLOSED_FORM = 0,
  AOIM_METHOD_CHAIN = 1,
  AOIM_METHOD_RVI = 2,
  AOIM_METHOD_SIM = 3
} aoim_method;

typedef enum aoim_format { AOIM_FORMAT_CSV = 0, AOIM_FORMAT_JSON = 1 } aoim_format;

AOIM_API const char* aoim_family_name(aoim_family family);
AOIM_API const char* aoim_method_name(aoim_method method);
AOIM_API aoim_status aoim_family_parse(const char* name, aoim_family* out);
AOIM_API aoim_status aoim_method_parse(const char* name, aoim_method* out);

typedef struct aoim_point {
  aoim_family family;
  double param;
  double mu;
  double p_bar;
  double delta;
  aoim_method method;
} aoim_point;

typedef struct aoim_frontier_config {
  double mu;
  int32_t a_star_min;
  int32_t a_star_max;
  int32_t z_star_min;
  int32_t z_star_max;
  const double* lambdas; /* NULL: 25 log-spaced prices in (0.01, 50] */
  size_t lambda_count;
  int32_t a_max;
  uint32_t threads; /* 0: hardware concurrency */
} aoim_frontier_config;

typedef struct aoim_frontier aoim_frontier;

/* mu = 0.01, a* in 1..15, z* in 0..9, default prices, a_max = 400 */
AOIM_API aoim_frontier_config aoim_frontier_config_default(void);
AOIM_API aoim_status aoim_frontier_run(const aoim_frontier_config* config, aoim_frontier** out);
AOIM_API size_t aoim_frontier_size(const aoim_frontier* frontier);
AOIM_API aoim_status aoim_frontier_point(const aoim_frontier* frontier, size_t index, aoim_point* out);
/* Writes CSV (family,param,mu,p_bar,delta,method) or a JSON array. AOIM_ERR_IO when the
 * path cannot be written. */
AOIM_API aoim_status aoim_frontier_write(const aoim_frontier* frontier, const char* path, aoim_format format);
/* Same text as aoim_frontier_write into a caller buffer. Returns the full length (excluding
 * the terminator) and writes at most buffer_size - 1 characters; call with NULL to size. */
AOIM_API size_t aoim_frontier_render(const aoim_frontier* frontier, aoim_format format, char* buffer,
                                     size_t buffer_size);
AOIM_API void aoim_frontier_destroy(aoim_frontier* frontier);

/* %.12g rendering used by the CSV writer; returns the number of characters written
 * (excluding the terminator), truncating to buffer_size - 1. */
AOIM_API size_t aoim_format_number(double value, char* buffer, size_t buffer_size);

#ifdef __cplusplus
}
#endif

#endif /* AOIMEC_AOIMEC_H */
