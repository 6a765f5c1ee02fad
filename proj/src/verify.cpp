#include "verify.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "chain.hpp"
#include "heuristics.hpp"
#include "mdp.hpp"
#include "sim.hpp"

namespace aoimec {
namespace {

using json = nlohmann::ordered_json;

constexpr double kClosedVsChainRel = 1e-8;
constexpr double kSimSigmas = 3.0;
constexpr double kGainTolerance = 1e-6;

bool within_sigmas(double estimate, double truth, double stderr_) {
  return std::abs(estimate - truth) <= kSimSigmas * stderr_;
}

double rel_diff(double x, double y) { return std::abs(x - y) / std::max(1.0, std::abs(y)); }

}  // namespace

VerifyOutcome run_verify(const VerifyOptions& options) {
  const ModelParams& params = options.params;
  params.validate();
  VerifyOutcome out;
  json& report = out.report;
  bool passed = true;

  report["params"] = {{"mu", params.mu}, {"lambda", params.lambda}, {"beta", params.beta}, {"a_max", params.a_max}};

  // Optimal policy.
  const SolveReport solve = rvi_solve(params);
  const EvalResult greedy = evaluate_exact(solve.policy, params);
  const double fixed_point = optimality_residual(params, solve.g, solve.h);
  json thresholds = json::object();
  for (std::size_t z = 0; z < solve.thresholds.size(); ++z) thresholds[std::to_string(z)] = solve.thresholds[z];
  const bool rvi_ok = solve.converged && std::abs(greedy.g - solve.g) <= kGainTolerance && fixed_point <= kGainTolerance;
  passed = passed && rvi_ok;
  report["rvi"] = {{"g", solve.g},
                   {"iterations", solve.iterations},
                   {"span_residual", solve.span_residual},
                   {"converged", solve.converged},
                   {"thresholds", thresholds},
                   {"greedy_policy_g", greedy.g},
                   {"optimality_residual", fixed_point},
                   {"delta", greedy.delta},
                   {"p_bar", greedy.p_bar},
                   {"passed", rvi_ok}};

  // Structure of the value iterates and of the RVI policy.
  std::vector<ValueTable> iterates = discounted_vi(params, options.vi_iterations);
  if (options.corrupt_value_table) {
    ValueTable& last = iterates.back();
    const int a = std::max(1, params.a_max / 2);
    last.at({a + 1, 0}) = last.at({a, 0}) - 1.0;
  }
  const StructureReport structure = verify_structure(iterates, solve.policy, params.mu);
  json checks = json::array();
  for (const auto& c : structure.checks) {
    json entry = {{"name", c.name}, {"passed", c.passed}};
    if (c.witness) entry["witness"] = {c.witness->a, c.witness->z};
    if (c.iterate >= 0) entry["iterate"] = c.iterate;
    if (!c.detail.empty()) entry["detail"] = c.detail;
    checks.push_back(std::move(entry));
  }
  passed = passed && structure.passed();
  report["structure"] = {{"vi_iterations", options.vi_iterations}, {"checks", checks}, {"passed", structure.passed()}};

  // Three-way agreement on the service-threshold family. The chain is exact once the
  // truncation sits above every age the policy can reach (2 z*).
  json agreement = json::array();
  bool agree_all = true;
  const int chain_a_max = std::max(params.a_max, 2 * options.z_star_max + 2);
  for (int z_star = 0; z_star <= options.z_star_max; ++z_star) {
    const EvalResult closed = service_threshold_eval(params.mu, z_star, params.lambda);
    ModelParams chain_params = params;
    chain_params.a_max = chain_a_max;
    const Policy policy = service_threshold_policy(z_star, chain_a_max);
    const EvalResult exact = evaluate_exact(policy, chain_params);
    const SimResult sim = simulate(policy, chain_params,
                                   SimConfig::with_horizon(options.sim_horizon, options.seed + static_cast<std::uint64_t>(z_star)));
    const bool chain_ok = rel_diff(exact.delta, closed.delta) <= kClosedVsChainRel &&
                          rel_diff(exact.p_bar, closed.p_bar) <= kClosedVsChainRel;
    const bool sim_ok = within_sigmas(sim.delta_hat, closed.delta, sim.stderr_delta) &&
                        within_sigmas(sim.p_bar_hat, closed.p_bar, sim.stderr_p);
    agree_all = agree_all && chain_ok && sim_ok;
    agreement.push_back({{"z_star", z_star},
                         {"closed_form", {{"delta", closed.delta}, {"p_bar", closed.p_bar}}},
                         {"chain", {{"delta", exact.delta}, {"p_bar", exact.p_bar}}},
                         {"sim",
                          {{"delta", sim.delta_hat},
                           {"p_bar", sim.p_bar_hat},
                           {"stderr_delta", sim.stderr_delta},
                           {"stderr_p", sim.stderr_p}}},
                         {"passed", chain_ok && sim_ok}});
  }
  passed = passed && agree_all;
  report["agreement"] = {{"family", "service_threshold"}, {"points", agreement}, {"passed", agree_all}};

  report["passed"] = passed;
  out.passed = passed;
  return out;
}

}  // namespace aoimec
