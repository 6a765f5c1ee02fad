#include "aoimec/aoimec.h"

#include <cstring>
#include <algorithm>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>

#include "chain.hpp"
#include "frontier.hpp"
#include "heuristics.hpp"
#include "mdp.hpp"
#include "sim.hpp"
#include "verify.hpp"

struct aoim_policy {
  aoimec::Policy policy;
};

struct aoim_solution {
  aoimec::SolveReport report;
  aoim_policy policy;
};

struct aoim_report {
  bool passed;
  std::string json;
};

struct aoim_frontier {
  std::vector<aoimec::FrontierPoint> points;
};

namespace {

thread_local std::string last_error;

aoim_status fail(aoim_status status, const std::string& message) {
  last_error = message;
  return status;
}

// Runs `body`, mapping exceptions onto status codes.
template <class Body>
aoim_status guarded(Body&& body) {
  try {
    return body();
  } catch (const aoimec::ConvergenceError& e) {
    return fail(AOIM_ERR_NOT_CONVERGED, e.what());
  } catch (const std::length_error& e) {
    return fail(AOIM_ERR_TOO_LARGE, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(AOIM_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::out_of_range& e) {
    return fail(AOIM_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::exception& e) {
    return fail(AOIM_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(AOIM_ERR_INTERNAL, "unknown error");
  }
}

aoimec::ModelParams to_model(const aoim_params& p) {
  aoimec::ModelParams m;
  m.mu = p.mu;
  m.lambda = p.lambda;
  m.beta = p.beta;
  m.a_max = p.a_max;
  return m;
}

aoim_eval to_eval(const aoimec::EvalResult& r) { return {r.delta, r.p_bar, r.g}; }

#define AOIM_REQUIRE(ptr) \
  if (!(ptr)) return fail(AOIM_ERR_INVALID_ARGUMENT, #ptr " must not be null")

size_t copy_out(const std::string& s, char* buffer, size_t buffer_size) {
  if (buffer && buffer_size > 0) {
    const size_t n = std::min(s.size(), buffer_size - 1);
    std::memcpy(buffer, s.data(), n);
    buffer[n] = '\0';
  }
  return s.size();
}

aoim_status make_policy(aoimec::Policy policy, aoim_policy** out) {
  *out = new aoim_policy{std::move(policy)};
  return AOIM_OK;
}

}  // namespace

extern "C" {

const char* aoim_status_string(aoim_status status) {
  switch (status) {
    case AOIM_OK: return "ok";
    case AOIM_ERR_INVALID_ARGUMENT: return "invalid argument";
    case AOIM_ERR_NOT_CONVERGED: return "not converged";
    case AOIM_ERR_TOO_LARGE: return "problem too large";
    case AOIM_ERR_IO: return "i/o error";
    case AOIM_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* aoim_last_error(void) { return last_error.c_str(); }

const char* aoim_version(void) { return "1.0.0"; }

aoim_params aoim_params_default(void) { return {0.5, 0.0, 0.99, 50}; }

int32_t aoim_default_a_max(double mu) { return aoimec::default_a_max(mu); }

aoim_status aoim_local_only(double mu, aoim_eval* out) {
  AOIM_REQUIRE(out);
  return guarded([&] {
    *out = to_eval(aoimec::local_only(mu));
    return AOIM_OK;
  });
}

aoim_status aoim_mec_only(double lambda, aoim_eval* out) {
  AOIM_REQUIRE(out);
  if (!(lambda >= 0.0)) return fail(AOIM_ERR_INVALID_ARGUMENT, "lambda must be non-negative");
  *out = to_eval(aoimec::mec_only(lambda));
  return AOIM_OK;
}

aoim_status aoim_service_moments(double mu, int64_t z_star, aoim_moments* out) {
  AOIM_REQUIRE(out);
  return guarded([&] {
    const auto m = aoimec::service_moments(mu, z_star);
    *out = {m.e_s, m.e_s2, m.e_y};
    return AOIM_OK;
  });
}

aoim_status aoim_service_threshold(double mu, int64_t z_star, double lambda, aoim_eval* out) {
  AOIM_REQUIRE(out);
  if (!(lambda >= 0.0)) return fail(AOIM_ERR_INVALID_ARGUMENT, "lambda must be non-negative");
  return guarded([&] {
    *out = to_eval(aoimec::service_threshold_eval(mu, z_star, lambda));
    return AOIM_OK;
  });
}

aoim_status aoim_policy_age_threshold(int32_t a_star, int32_t a_max, aoim_policy** out) {
  AOIM_REQUIRE(out);
  return guarded([&] { return make_policy(aoimec::age_threshold_policy(a_star, a_max), out); });
}

aoim_status aoim_policy_service_threshold(int32_t z_star, int32_t a_max, aoim_policy** out) {
  AOIM_REQUIRE(out);
  return guarded([&] { return make_policy(aoimec::service_threshold_policy(z_star, a_max), out); });
}

aoim_status aoim_policy_local_only(int32_t a_max, aoim_policy** out) {
  AOIM_REQUIRE(out);
  return guarded([&] { return make_policy(aoimec::local_only_policy(a_max), out); });
}

aoim_status aoim_policy_mec_only(int32_t a_max, aoim_policy** out) {
  AOIM_REQUIRE(out);
  return guarded([&] { return make_policy(aoimec::mec_only_policy(a_max), out); });
}

aoim_status aoim_policy_from_thresholds(const int32_t* thresholds, size_t count, int32_t a_max, aoim_policy** out) {
  AOIM_REQUIRE(out);
  if (count > 0 && !thresholds) return fail(AOIM_ERR_INVALID_ARGUMENT, "thresholds must not be null");
  return guarded([&] {
    std::vector<int> table(thresholds, thresholds + count);
    return make_policy(aoimec::Policy::from_thresholds(table, a_max), out);
  });
}

aoim_status aoim_policy_action(const aoim_policy* policy, int32_t a, int32_t z, int* action) {
  AOIM_REQUIRE(policy);
  AOIM_REQUIRE(action);
  return guarded([&] {
    *action = aoimec::to_int(policy->policy.action({a, z}));
    return AOIM_OK;
  });
}

int32_t aoim_policy_a_max(const aoim_policy* policy) { return policy ? policy->policy.a_max() : 0; }

void aoim_policy_destroy(aoim_policy* policy) { delete policy; }

aoim_status aoim_evaluate_exact(const aoim_policy* policy, const aoim_params* params, aoim_eval* out) {
  AOIM_REQUIRE(policy);
  AOIM_REQUIRE(params);
  AOIM_REQUIRE(out);
  return guarded([&] {
    *out = to_eval(aoimec::evaluate_exact(policy->policy, to_model(*params)));
    return AOIM_OK;
  });
}

aoim_status aoim_rvi_solve(const aoim_params* params, aoim_solution** out) {
  AOIM_REQUIRE(params);
  AOIM_REQUIRE(out);
  return guarded([&] {
    auto report = aoimec::rvi_solve(to_model(*params));
    const bool converged = report.converged;
    aoimec::Policy policy = report.policy;
    *out = new aoim_solution{std::move(report), aoim_policy{std::move(policy)}};
    if (!converged) return fail(AOIM_ERR_NOT_CONVERGED, "relative value iteration hit its iteration budget");
    return AOIM_OK;
  });
}

aoim_status aoim_brute_force(const aoim_params* params, int32_t search_bound, aoim_solution** out) {
  AOIM_REQUIRE(params);
  AOIM_REQUIRE(out);
  return guarded([&] {
    auto report = aoimec::brute_force_best_threshold(to_model(*params), search_bound);
    aoimec::Policy policy = report.policy;
    *out = new aoim_solution{std::move(report), aoim_policy{std::move(policy)}};
    return AOIM_OK;
  });
}

double aoim_solution_gain(const aoim_solution* s) { return s ? s->report.g : 0.0; }
int64_t aoim_solution_iterations(const aoim_solution* s) { return s ? s->report.iterations : 0; }
double aoim_solution_span_residual(const aoim_solution* s) { return s ? s->report.span_residual : 0.0; }
int aoim_solution_converged(const aoim_solution* s) { return s && s->report.converged ? 1 : 0; }
size_t aoim_solution_threshold_count(const aoim_solution* s) { return s ? s->report.thresholds.size() : 0; }

int32_t aoim_solution_threshold(const aoim_solution* s, size_t z) {
  if (!s || z >= s->report.thresholds.size()) return -1;
  return s->report.thresholds[z];
}

const aoim_policy* aoim_solution_policy(const aoim_solution* s) { return s ? &s->policy : nullptr; }

void aoim_solution_destroy(aoim_solution* s) { delete s; }

aoim_sim_config aoim_sim_config_default(uint64_t horizon, uint64_t seed) {
  const auto c = aoimec::SimConfig::with_horizon(horizon, seed);
  return {c.horizon, c.seed, c.warmup, c.batches};
}

aoim_status aoim_simulate(const aoim_policy* policy, const aoim_params* params, const aoim_sim_config* config,
                          aoim_sim_result* out) {
  AOIM_REQUIRE(policy);
  AOIM_REQUIRE(params);
  AOIM_REQUIRE(config);
  AOIM_REQUIRE(out);
  return guarded([&] {
    aoimec::SimConfig c;
    c.horizon = config->horizon;
    c.seed = config->seed;
    c.warmup = config->warmup;
    c.batches = config->batches;
    const auto r = aoimec::simulate(policy->policy, to_model(*params), c);
    *out = {r.delta_hat, r.p_bar_hat, r.stderr_delta, r.stderr_p, r.slots, r.ref_fraction, r.stderr_ref, r.completions};
    return AOIM_OK;
  });
}

aoim_verify_options aoim_verify_options_default(void) {
  const aoimec::VerifyOptions d;
  return {aoim_params_default(), d.vi_iterations, d.sim_horizon, d.seed, d.z_star_max, 0};
}

aoim_status aoim_verify(const aoim_verify_options* options, aoim_report** out) {
  AOIM_REQUIRE(options);
  AOIM_REQUIRE(out);
  return guarded([&] {
    aoimec::VerifyOptions o;
    o.params = to_model(options->params);
    o.vi_iterations = options->vi_iterations;
    o.sim_horizon = options->sim_horizon;
    o.seed = options->seed;
    o.z_star_max = options->z_star_max;
    o.corrupt_value_table = options->corrupt_value_table != 0;
    if (o.vi_iterations < 1) throw std::invalid_argument("vi_iterations must be positive");
    if (o.z_star_max < 0) throw std::invalid_argument("z_star_max must be non-negative");
    auto outcome = aoimec::run_verify(o);
    *out = new aoim_report{outcome.passed, outcome.report.dump(2)};
    return AOIM_OK;
  });
}

int aoim_report_passed(const aoim_report* r) { return r && r->passed ? 1 : 0; }
const char* aoim_report_json(const aoim_report* r) { return r ? r->json.c_str() : ""; }
void aoim_report_destroy(aoim_report* r) { delete r; }

const char* aoim_family_name(aoim_family family) {
  return aoimec::to_string(static_cast<aoimec::Family>(family)).data();
}

const char* aoim_method_name(aoim_method method) {
  return aoimec::to_string(static_cast<aoimec::Method>(method)).data();
}

aoim_status aoim_family_parse(const char* name, aoim_family* out) {
  AOIM_REQUIRE(name);
  AOIM_REQUIRE(out);
  const auto f = aoimec::parse_family(name);
  if (!f) return fail(AOIM_ERR_INVALID_ARGUMENT, std::string("unknown policy family '") + name + "'");
  *out = static_cast<aoim_family>(*f);
  return AOIM_OK;
}

aoim_status aoim_method_parse(const char* name, aoim_method* out) {
  AOIM_REQUIRE(name);
  AOIM_REQUIRE(out);
  const auto m = aoimec::parse_method(name);
  if (!m) return fail(AOIM_ERR_INVALID_ARGUMENT, std::string("unknown method '") + name + "'");
  *out = static_cast<aoim_method>(*m);
  return AOIM_OK;
}

aoim_frontier_config aoim_frontier_config_default(void) {
  const aoimec::FrontierConfig d;
  return {d.mu, d.a_star_min, d.a_star_max, d.z_star_min, d.z_star_max, nullptr, 0, d.a_max, d.threads};
}

aoim_status aoim_frontier_run(const aoim_frontier_config* config, aoim_frontier** out) {
  AOIM_REQUIRE(config);
  AOIM_REQUIRE(out);
  if (config->lambda_count > 0 && !config->lambdas) return fail(AOIM_ERR_INVALID_ARGUMENT, "lambdas must not be null");
  return guarded([&] {
    aoimec::FrontierConfig c;
    c.mu = config->mu;
    c.a_star_min = config->a_star_min;
    c.a_star_max = config->a_star_max;
    c.z_star_min = config->z_star_min;
    c.z_star_max = config->z_star_max;
    if (config->lambdas) c.lambdas.assign(config->lambdas, config->lambdas + config->lambda_count);
    c.a_max = config->a_max;
    c.threads = config->threads;
    *out = new aoim_frontier{aoimec::run_frontier(c)};
    return AOIM_OK;
  });
}

size_t aoim_frontier_size(const aoim_frontier* f) { return f ? f->points.size() : 0; }

aoim_status aoim_frontier_point(const aoim_frontier* f, size_t index, aoim_point* out) {
  AOIM_REQUIRE(f);
  AOIM_REQUIRE(out);
  if (index >= f->points.size()) return fail(AOIM_ERR_INVALID_ARGUMENT, "frontier index out of range");
  const auto& p = f->points[index];
  *out = {static_cast<aoim_family>(p.family), p.param, p.mu, p.p_bar, p.delta, static_cast<aoim_method>(p.method)};
  return AOIM_OK;
}

aoim_status aoim_frontier_write(const aoim_frontier* f, const char* path, aoim_format format) {
  AOIM_REQUIRE(f);
  AOIM_REQUIRE(path);
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) return fail(AOIM_ERR_IO, std::string("cannot open '") + path + "' for writing");
  if (format == AOIM_FORMAT_JSON)
    aoimec::write_json(file, f->points);
  else
    aoimec::write_csv(file, f->points);
  file.flush();
  if (!file) return fail(AOIM_ERR_IO, std::string("failed writing '") + path + "'");
  return AOIM_OK;
}

size_t aoim_frontier_render(const aoim_frontier* f, aoim_format format, char* buffer, size_t buffer_size) {
  if (!f) return 0;
  std::ostringstream text;
  if (format == AOIM_FORMAT_JSON)
    aoimec::write_json(text, f->points);
  else
    aoimec::write_csv(text, f->points);
  return copy_out(text.str(), buffer, buffer_size);
}

void aoim_frontier_destroy(aoim_frontier* f) { delete f; }

size_t aoim_format_number(double value, char* buffer, size_t buffer_size) {
  return copy_out(aoimec::format_number(value), buffer, buffer_size);
}

}  // extern "C"
