#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "core.hpp"
#include "heuristics.hpp"

namespace aoimec {

// Stationary deterministic policy over the truncated space. Ages at or beyond a_max
// always offload: the scheduler pulls a fresh update instead of letting the age grow.
class Policy {
 public:
  // `actions` is indexed by StateSpace(a_max); entries are 0 or 1.
  Policy(int a_max, std::vector<std::uint8_t> actions, std::optional<std::vector<int>> thresholds = std::nullopt);

  // thresholds[z] is the smallest age that offloads in column z. Columns past the end
  // of the table offload everywhere.
  static Policy from_thresholds(std::span<const int> thresholds, int a_max);

  int a_max() const { return a_max_; }
  Action action(State s) const;
  bool offloads(State s) const { return action(s) == Action::mec; }

  // Threshold form, when the policy was built from one.
  const std::optional<std::vector<int>>& thresholds() const { return thresholds_; }

  // min{a : u(a, z) = 1} for every column z in [0, a_max), taken over the truncated space.
  std::vector<int> extract_thresholds() const;

  const std::vector<std::uint8_t>& table() const { return actions_; }
  std::vector<std::uint8_t>& mutable_table() { return actions_; }

 private:
  int a_max_;
  std::vector<std::uint8_t> actions_;
  std::optional<std::vector<int>> thresholds_;
};

// u = 1 exactly when a >= a*.
Policy age_threshold_policy(int a_star, int a_max);
// u = 1 exactly when z >= z* (aborts the in-flight update after z* slots of service).
Policy service_threshold_policy(int z_star, int a_max);
// Never offloads below the truncation boundary.
Policy local_only_policy(int a_max);
Policy mec_only_policy(int a_max);

// Row-stochastic CSR matrix over the states reachable from (1,0). states[0] is (1,0).
struct SparseChain {
  std::vector<State> states;
  std::vector<std::uint8_t> actions;
  std::vector<std::size_t> row_start;  // size states.size() + 1
  std::vector<std::uint32_t> col;
  std::vector<double> prob;

  std::size_t size() const { return states.size(); }
};

SparseChain build_chain(const Policy& policy, double mu);

enum class StationaryMethod { automatic, power, direct };

struct StationaryDistribution {
  std::vector<State> states;
  std::vector<double> pi;
  double residual = 0.0;  // max-norm of pi P - pi
  long iterations = 0;
  StationaryMethod method = StationaryMethod::automatic;

  double prob(State s) const;
};

class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double residual) : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

struct StationaryOptions {
  StationaryMethod method = StationaryMethod::automatic;
  double tolerance = 1e-12;
  long max_iterations = 1'000'000;
  std::size_t direct_limit = 5000;
  // `automatic` solves chains up to this size directly: power iteration stops on the
  // change between iterates, which leaves an error of order tolerance / (1 - rho) on
  // slowly mixing chains.
  std::size_t prefer_direct = 300;
};

// Power iteration on successive iterates, or a dense direct solve. `automatic` goes direct
// for small chains and falls back to it when power iteration stalls on a chain under
// direct_limit.
StationaryDistribution stationary(const SparseChain& chain, const StationaryOptions& options = {});

double balance_residual(const SparseChain& chain, std::span<const double> pi);

EvalResult evaluate_exact(const Policy& policy, const ModelParams& params, const StationaryOptions& options = {});

// Same quantities by renewal-reward on the embedded chain of service starts. Between two
// states of the form (a, 0) the path runs along (a+k, k) until a completion or an
// offload, so the embedded chain has at most a_max states. Exact for any policy and much
// cheaper than evaluate_exact; used by the threshold search.
EvalResult evaluate_renewal(const Policy& policy, const ModelParams& params);

// Columns z that appear among the states reachable from (1,0).
int max_reachable_column(const SparseChain& chain);

}  // namespace aoimec
