// aoimec command line: single evaluations, RVI, simulation, verification and frontier sweeps.
// Talks to the library only through the C interface.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "aoimec/aoimec.h"

namespace {

using json = nlohmann::ordered_json;

enum Exit { kOk = 0, kCheckFailed = 1, kBadFlags = 2, kIoError = 3 };

// Carries an exit code out of a command.
struct CommandError {
  int code;
  std::string message;
};

int exit_code_for(aoim_status s) {
  switch (s) {
    case AOIM_OK: return kOk;
    case AOIM_ERR_INVALID_ARGUMENT:
    case AOIM_ERR_TOO_LARGE: return kBadFlags;
    case AOIM_ERR_IO: return kIoError;
    default: return kCheckFailed;
  }
}

void check(aoim_status s) {
  if (s != AOIM_OK) throw CommandError{exit_code_for(s), aoim_last_error()};
}

struct PolicyDeleter {
  void operator()(aoim_policy* p) const { aoim_policy_destroy(p); }
};
struct SolutionDeleter {
  void operator()(aoim_solution* p) const { aoim_solution_destroy(p); }
};
struct ReportDeleter {
  void operator()(aoim_report* p) const { aoim_report_destroy(p); }
};
struct FrontierDeleter {
  void operator()(aoim_frontier* p) const { aoim_frontier_destroy(p); }
};
using PolicyPtr = std::unique_ptr<aoim_policy, PolicyDeleter>;
using SolutionPtr = std::unique_ptr<aoim_solution, SolutionDeleter>;
using ReportPtr = std::unique_ptr<aoim_report, ReportDeleter>;
using FrontierPtr = std::unique_ptr<aoim_frontier, FrontierDeleter>;

std::string num(double v) {
  char buf[64];
  aoim_format_number(v, buf, sizeof buf);
  return buf;
}

// Flags shared by every subcommand; unset values fall back to per-command defaults.
struct Shared {
  std::optional<double> mu;
  std::optional<double> lambda;
  std::optional<double> beta;
  std::optional<int> a_max;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> horizon;
  std::string out;
  std::optional<std::string> format;

  aoim_params params(double default_mu) const {
    aoim_params p = aoim_params_default();
    p.mu = mu.value_or(default_mu);
    p.lambda = lambda.value_or(0.0);
    p.beta = beta.value_or(p.beta);
    p.a_max = a_max.value_or(aoim_default_a_max(p.mu));
    return p;
  }
  aoim_format fmt(aoim_format fallback) const {
    if (!format) return fallback;
    return *format == "csv" ? AOIM_FORMAT_CSV : AOIM_FORMAT_JSON;
  }
};

void emit(const Shared& shared, const std::string& text) {
  if (shared.out.empty() || shared.out == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream file(shared.out, std::ios::binary | std::ios::trunc);
  if (!file) throw CommandError{kIoError, "cannot open '" + shared.out + "' for writing"};
  file << text;
  file.flush();
  if (!file) throw CommandError{kIoError, "failed writing '" + shared.out + "'"};
}

std::string csv_row(const std::string& family, double param, double mu, double p_bar, double delta,
                    const std::string& method) {
  return family + "," + num(param) + "," + num(mu) + "," + num(p_bar) + "," + num(delta) + "," + method + "\n";
}

const char* kCsvHeader = "family,param,mu,p_bar,delta,method\n";

// ---- policy selection shared by eval and simulate ----

struct PolicyFlags {
  std::string family = "mec_only";
  std::optional<int> a_star;
  std::optional<int> z_star;
};

aoim_family parse_family(const std::string& name) {
  aoim_family f;
  check(aoim_family_parse(name.c_str(), &f));
  return f;
}

int require(const std::optional<int>& v, const char* flag, const std::string& family) {
  if (!v) throw CommandError{kBadFlags, family + " requires " + flag};
  return *v;
}

double family_param(aoim_family family, const PolicyFlags& flags, const aoim_params& params) {
  switch (family) {
    case AOIM_FAMILY_AGE_THRESHOLD: return require(flags.a_star, "--astar", flags.family);
    case AOIM_FAMILY_SERVICE_THRESHOLD: return require(flags.z_star, "--zstar", flags.family);
    case AOIM_FAMILY_OPTIMAL: return params.lambda;
    default: return 0.0;
  }
}

// Builds the state policy for a family. The optimal family solves RVI first.
PolicyPtr make_policy(aoim_family family, const PolicyFlags& flags, const aoim_params& params, SolutionPtr& solution) {
  aoim_policy* raw = nullptr;
  switch (family) {
    case AOIM_FAMILY_LOCAL_ONLY: check(aoim_policy_local_only(params.a_max, &raw)); break;
    case AOIM_FAMILY_MEC_ONLY: check(aoim_policy_mec_only(params.a_max, &raw)); break;
    case AOIM_FAMILY_AGE_THRESHOLD:
      check(aoim_policy_age_threshold(require(flags.a_star, "--astar", flags.family), params.a_max, &raw));
      break;
    case AOIM_FAMILY_SERVICE_THRESHOLD:
      check(aoim_policy_service_threshold(require(flags.z_star, "--zstar", flags.family), params.a_max, &raw));
      break;
    case AOIM_FAMILY_OPTIMAL: {
      aoim_solution* s = nullptr;
      const aoim_status st = aoim_rvi_solve(&params, &s);
      solution.reset(s);
      check(st);
      return nullptr;  // borrowed from the solution
    }
  }
  return PolicyPtr(raw);
}

// ---- commands ----

struct EvalFlags {
  PolicyFlags policy;
  std::string method;
};

int run_eval(const Shared& shared, const EvalFlags& flags) {
  const aoim_params params = shared.params(0.5);
  const aoim_family family = parse_family(flags.policy.family);
  const double param = family_param(family, flags.policy, params);

  aoim_method method;
  if (flags.method.empty()) {
    method = family == AOIM_FAMILY_AGE_THRESHOLD ? AOIM_METHOD_CHAIN
             : family == AOIM_FAMILY_OPTIMAL     ? AOIM_METHOD_RVI
                                                 : AOIM_METHOD_CLOSED_FORM;
  } else {
    check(aoim_method_parse(flags.method.c_str(), &method));
  }

  aoim_eval result{};
  json extra = json::object();
  if (method == AOIM_METHOD_CLOSED_FORM) {
    switch (family) {
      case AOIM_FAMILY_LOCAL_ONLY: check(aoim_local_only(params.mu, &result)); break;
      case AOIM_FAMILY_MEC_ONLY: check(aoim_mec_only(params.lambda, &result)); break;
      case AOIM_FAMILY_SERVICE_THRESHOLD:
        check(aoim_service_threshold(params.mu, static_cast<int64_t>(param), params.lambda, &result));
        break;
      default:
        throw CommandError{kBadFlags, "no closed form for " + flags.policy.family + "; use --method chain, rvi or sim"};
    }
    result.g = result.delta + params.lambda * result.p_bar;
  } else if (method == AOIM_METHOD_RVI && family != AOIM_FAMILY_OPTIMAL) {
    throw CommandError{kBadFlags, "--method rvi applies to --family optimal only"};
  } else {
    SolutionPtr solution;
    PolicyPtr owned = make_policy(family, flags.policy, params, solution);
    const aoim_policy* policy = owned ? owned.get() : aoim_solution_policy(solution.get());
    if (method == AOIM_METHOD_SIM) {
      const aoim_sim_config config = aoim_sim_config_default(shared.horizon.value_or(1'000'000), shared.seed.value_or(1));
      aoim_sim_result sim{};
      check(aoim_simulate(policy, &params, &config, &sim));
      result = {sim.delta_hat, sim.p_bar_hat, sim.delta_hat + params.lambda * sim.p_bar_hat};
      extra["stderr_delta"] = sim.stderr_delta;
      extra["stderr_p_bar"] = sim.stderr_p;
      extra["slots"] = sim.slots;
      extra["seed"] = config.seed;
    } else {
      check(aoim_evaluate_exact(policy, &params, &result));
      if (solution) extra["rvi_g"] = aoim_solution_gain(solution.get());
    }
  }

  if (shared.fmt(AOIM_FORMAT_JSON) == AOIM_FORMAT_CSV) {
    emit(shared, std::string(kCsvHeader) + csv_row(flags.policy.family, param, params.mu, result.p_bar, result.delta,
                                                   aoim_method_name(method)));
    return kOk;
  }
  json out = {{"family", flags.policy.family},
              {"param", param},
              {"mu", params.mu},
              {"p_bar", result.p_bar},
              {"delta", result.delta},
              {"method", aoim_method_name(method)},
              {"lambda", params.lambda},
              {"g", result.g}};
  for (auto& [k, v] : extra.items()) out[k] = v;
  emit(shared, out.dump(2) + "\n");
  return kOk;
}

struct SimulateFlags {
  PolicyFlags policy;
  std::optional<std::uint64_t> warmup;
  std::uint32_t batches = 100;
};

int run_simulate(const Shared& shared, const SimulateFlags& flags) {
  const aoim_params params = shared.params(0.5);
  const aoim_family family = parse_family(flags.policy.family);
  const double param = family_param(family, flags.policy, params);
  SolutionPtr solution;
  PolicyPtr owned = make_policy(family, flags.policy, params, solution);
  const aoim_policy* policy = owned ? owned.get() : aoim_solution_policy(solution.get());

  aoim_sim_config config = aoim_sim_config_default(shared.horizon.value_or(1'000'000), shared.seed.value_or(1));
  if (flags.warmup) config.warmup = *flags.warmup;
  config.batches = flags.batches;
  aoim_sim_result r{};
  check(aoim_simulate(policy, &params, &config, &r));

  if (shared.fmt(AOIM_FORMAT_JSON) == AOIM_FORMAT_CSV) {
    emit(shared, std::string(kCsvHeader) + csv_row(flags.policy.family, param, params.mu, r.p_bar_hat, r.delta_hat, "sim"));
    return kOk;
  }
  const json out = {{"family", flags.policy.family},
                    {"param", param},
                    {"mu", params.mu},
                    {"lambda", params.lambda},
                    {"a_max", params.a_max},
                    {"horizon", config.horizon},
                    {"warmup", config.warmup},
                    {"batches", config.batches},
                    {"seed", config.seed},
                    {"slots", r.slots},
                    {"delta", r.delta_hat},
                    {"stderr_delta", r.stderr_delta},
                    {"p_bar", r.p_bar_hat},
                    {"stderr_p_bar", r.stderr_p},
                    {"g", r.delta_hat + params.lambda * r.p_bar_hat},
                    {"ref_state_fraction", r.ref_fraction},
                    {"stderr_ref_state_fraction", r.stderr_ref},
                    {"local_completions", r.completions}};
  emit(shared, out.dump(2) + "\n");
  return kOk;
}

struct RviFlags {
  std::optional<int> brute_bound;
};

int run_rvi(const Shared& shared, const RviFlags& flags) {
  const aoim_params params = shared.params(0.5);
  aoim_solution* raw = nullptr;
  const aoim_status st = flags.brute_bound ? aoim_brute_force(&params, *flags.brute_bound, &raw)
                                           : aoim_rvi_solve(&params, &raw);
  SolutionPtr solution(raw);
  if (st != AOIM_OK && !(st == AOIM_ERR_NOT_CONVERGED && solution)) check(st);

  aoim_eval exact{};
  check(aoim_evaluate_exact(aoim_solution_policy(solution.get()), &params, &exact));
  const bool converged = aoim_solution_converged(solution.get()) != 0;
  const char* method = flags.brute_bound ? "brute_force" : "rvi";

  if (shared.fmt(AOIM_FORMAT_JSON) == AOIM_FORMAT_CSV) {
    std::string text = "z,threshold\n";
    for (size_t z = 0; z < aoim_solution_threshold_count(solution.get()); ++z)
      text += std::to_string(z) + "," + std::to_string(aoim_solution_threshold(solution.get(), z)) + "\n";
    emit(shared, text);
  } else {
    json thresholds = json::object();
    for (size_t z = 0; z < aoim_solution_threshold_count(solution.get()); ++z)
      thresholds[std::to_string(z)] = aoim_solution_threshold(solution.get(), z);
    const json out = {{"method", method},
                      {"mu", params.mu},
                      {"lambda", params.lambda},
                      {"a_max", params.a_max},
                      {"g", aoim_solution_gain(solution.get())},
                      {"delta", exact.delta},
                      {"p_bar", exact.p_bar},
                      {"thresholds", thresholds},
                      {"iterations", aoim_solution_iterations(solution.get())},
                      {"span_residual", aoim_solution_span_residual(solution.get())},
                      {"converged", converged}};
    emit(shared, out.dump(2) + "\n");
  }
  if (!converged) {
    std::cerr << "error: " << aoim_last_error() << "\n";
    return kCheckFailed;
  }
  return kOk;
}

struct VerifyFlags {
  int vi_iterations = 1000;
  int z_star_max = 9;
  bool corrupt = false;
};

int run_verify(const Shared& shared, const VerifyFlags& flags) {
  aoim_verify_options options = aoim_verify_options_default();
  options.params = shared.params(0.5);
  if (!shared.lambda) options.params.lambda = 3.0;
  options.vi_iterations = flags.vi_iterations;
  options.sim_horizon = shared.horizon.value_or(options.sim_horizon);
  options.seed = shared.seed.value_or(options.seed);
  options.z_star_max = flags.z_star_max;
  options.corrupt_value_table = flags.corrupt ? 1 : 0;
  aoim_report* raw = nullptr;
  check(aoim_verify(&options, &raw));
  ReportPtr report(raw);
  emit(shared, std::string(aoim_report_json(report.get())) + "\n");
  if (!aoim_report_passed(report.get())) {
    std::cerr << "verification failed\n";
    return kCheckFailed;
  }
  return kOk;
}

struct FrontierFlags {
  std::optional<int> a_star_min, a_star_max, z_star_min, z_star_max;
  std::vector<double> lambdas;
  unsigned threads = 0;
};

int run_frontier(const Shared& shared, const FrontierFlags& flags) {
  aoim_frontier_config config = aoim_frontier_config_default();
  config.mu = shared.mu.value_or(config.mu);
  config.a_max = shared.a_max.value_or(config.a_max);
  config.a_star_min = flags.a_star_min.value_or(config.a_star_min);
  config.a_star_max = flags.a_star_max.value_or(config.a_star_max);
  config.z_star_min = flags.z_star_min.value_or(config.z_star_min);
  config.z_star_max = flags.z_star_max.value_or(config.z_star_max);
  if (!flags.lambdas.empty()) {
    config.lambdas = flags.lambdas.data();
    config.lambda_count = flags.lambdas.size();
  }
  config.threads = flags.threads;
  aoim_frontier* raw = nullptr;
  check(aoim_frontier_run(&config, &raw));
  FrontierPtr frontier(raw);

  const aoim_format format = shared.fmt(AOIM_FORMAT_CSV);
  std::string text(aoim_frontier_render(frontier.get(), format, nullptr, 0), '\0');
  aoim_frontier_render(frontier.get(), format, text.data(), text.size() + 1);
  emit(shared, text);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Age-of-information offloading between a geometric local server and a one-slot MEC"};
  app.set_version_flag("--version", std::string(aoim_version()));
  app.set_config("--config", "", "TOML or INI file with option values; command-line flags take precedence");
  app.require_subcommand(1);
  app.fallthrough();

  Shared shared;
  auto positive = CLI::PositiveNumber;
  const CLI::Validator probability(
      [](std::string& s) -> std::string {
        const double v = std::stod(s);
        return v > 0.0 && v <= 1.0 ? "" : "must lie in (0,1]";
      },
      "(0,1]");
  const CLI::Validator open_unit(
      [](std::string& s) -> std::string {
        const double v = std::stod(s);
        return v > 0.0 && v < 1.0 ? "" : "must lie in (0,1)";
      },
      "(0,1)");
  app.add_option("--mu", shared.mu, "Local per-slot completion probability in (0,1]")
      ->check(CLI::Number)
      ->check(probability);
  app.add_option("--lambda", shared.lambda, "Price of one MEC use")->check(CLI::NonNegativeNumber);
  app.add_option("--beta", shared.beta, "Discount factor for value iteration checks")->check(CLI::Number)
      ->check(open_unit);
  app.add_option("--amax", shared.a_max, "Age truncation level (default 50, or 400 when mu < 0.1)")
      ->check(CLI::Range(2, 100000));
  app.add_option("--seed", shared.seed, "Simulation seed");
  app.add_option("--horizon", shared.horizon, "Simulated slots")->check(positive);
  app.add_option("--out", shared.out, "Output file (default: standard output)");
  app.add_option("--format", shared.format, "csv or json (default: csv for frontier, json otherwise)")
      ->check(CLI::IsMember({"csv", "json"}));

  const std::string families = "local_only|mec_only|age_threshold|service_threshold|optimal";

  EvalFlags eval;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate one policy and print it as a frontier point");
  eval_cmd->add_option("--family", eval.policy.family, families)->capture_default_str();
  eval_cmd->add_option("--astar", eval.policy.a_star, "Age threshold a* (age_threshold)");
  eval_cmd->add_option("--zstar", eval.policy.z_star, "Service threshold z* (service_threshold)");
  eval_cmd->add_option("--method", eval.method, "closed_form|chain|rvi|sim (default depends on the family)");

  FrontierFlags frontier;
  auto* frontier_cmd = app.add_subcommand("frontier", "Sweep every policy family and write the age / MEC-use frontier");
  frontier_cmd->add_option("--astar-min", frontier.a_star_min, "Smallest a* (default 1)");
  frontier_cmd->add_option("--astar-max", frontier.a_star_max, "Largest a* (default 15)");
  frontier_cmd->add_option("--zstar-min", frontier.z_star_min, "Smallest z* (default 0)");
  frontier_cmd->add_option("--zstar-max", frontier.z_star_max, "Largest z* (default 9)");
  frontier_cmd->add_option("--lambdas", frontier.lambdas, "Prices for the optimal family (default: 25 log-spaced in (0.01,50])")
      ->delimiter(',');
  frontier_cmd->add_option("--threads", frontier.threads, "Worker threads (0: all cores)");

  VerifyFlags verify;
  auto* verify_cmd = app.add_subcommand("verify", "Run structural and agreement checks; exit 1 on any failure");
  verify_cmd->add_option("--vi-iterations", verify.vi_iterations, "Discounted value iterates to check")
      ->capture_default_str()
      ->check(CLI::Range(1, 1000000));
  verify_cmd->add_option("--zstar-max", verify.z_star_max, "Largest z* in the agreement sweep")
      ->capture_default_str()
      ->check(CLI::Range(0, 1000));
  verify_cmd->add_flag("--corrupt-value-table", verify.corrupt, "Inject a monotonicity violation (negative test)");

  SimulateFlags simulate;
  auto* simulate_cmd = app.add_subcommand("simulate", "Monte Carlo estimate of delta and p_bar for one policy");
  simulate_cmd->add_option("--family", simulate.policy.family, families)->capture_default_str();
  simulate_cmd->add_option("--astar", simulate.policy.a_star, "Age threshold a* (age_threshold)");
  simulate_cmd->add_option("--zstar", simulate.policy.z_star, "Service threshold z* (service_threshold)");
  simulate_cmd->add_option("--warmup", simulate.warmup, "Discarded slots (default 1% of the horizon)");
  simulate_cmd->add_option("--batches", simulate.batches, "Batch count for standard errors")
      ->capture_default_str()
      ->check(CLI::Range(10, 1000000));

  RviFlags rvi;
  auto* rvi_cmd = app.add_subcommand("rvi", "Solve for the optimal policy and print its thresholds");
  rvi_cmd->add_option("--brute-force", rvi.brute_bound,
                      "Search all monotone threshold tables with entries up to this bound instead");

  try {
    app.parse(argc, argv);
  } catch (const CLI::FileError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIoError;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kBadFlags;
  }

  try {
    if (eval_cmd->parsed()) return run_eval(shared, eval);
    if (frontier_cmd->parsed()) return run_frontier(shared, frontier);
    if (verify_cmd->parsed()) return run_verify(shared, verify);
    if (simulate_cmd->parsed()) return run_simulate(shared, simulate);
    if (rvi_cmd->parsed()) return run_rvi(shared, rvi);
  } catch (const CommandError& e) {
    std::cerr << "error: " << e.message << "\n";
    return e.code;
  }
  return kBadFlags;
}
