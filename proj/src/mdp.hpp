#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "chain.hpp"
#include "core.hpp"

namespace aoimec {

// Values over StateSpace(a_max).
struct ValueTable {
  int a_max = 0;
  std::vector<double> v;

  double at(State s) const { return v[StateSpace::index_of(s.a, s.z)]; }
  double& at(State s) { return v[StateSpace::index_of(s.a, s.z)]; }
};

struct SolveReport {
  Policy policy;
  double g = 0.0;
  // One entry per column z reachable from (1,0) under `policy`.
  std::vector<int> thresholds;
  long iterations = 0;
  double span_residual = 0.0;
  bool converged = true;
  // Differential cost, h(1,0) = 0. Empty for the brute-force oracle.
  ValueTable h;
};

struct RviOptions {
  double tolerance = 1e-10;
  long max_iterations = 100'000;
};

// Relative value iteration on the truncated MDP. Ages at a_max always offload, and exact
// ties prefer local service. A run that hits the iteration budget returns converged = false.
SolveReport rvi_solve(const ModelParams& params, const RviOptions& options = {});

// Greedy policy with respect to h, with forced offloading at a_max.
Policy greedy_policy(const ModelParams& params, const ValueTable& h);

// max_s |g + h(s) - min_u [C(s,u) + sum P h]|
double optimality_residual(const ModelParams& params, double g, const ValueTable& h);

// Thresholds of `policy` on the columns reachable from (1,0).
std::vector<int> reachable_thresholds(const Policy& policy, double mu);

// Thresholds seen along the chain: for each reachable column z, the smallest reachable age
// that offloads, or one past the largest reachable age when none does. Two policies that
// act alike on their reachable states get the same table.
std::vector<int> on_path_thresholds(const Policy& policy, double mu);

// Discounted value iterates V_0 = 0, V_1, ..., V_n (n + 1 tables).
std::vector<ValueTable> discounted_vi(const ModelParams& params, int n_iters);

struct StructureCheck {
  std::string name;
  bool passed = true;
  std::optional<State> witness;
  long iterate = -1;  // value iterate index for value-table checks
  std::string detail;
};

struct StructureReport {
  std::vector<StructureCheck> checks;
  bool passed() const;
};

// Monotonicity of the value iterates in a, z and n, non-negativity of V - V(1,0), threshold
// form of `policy` in a and z, and non-increasing reachable thresholds.
StructureReport verify_structure(std::span<const ValueTable> iterates, const Policy& policy, double mu);

// Number of distinct monotone threshold tables with entries in [1, search_bound].
std::uint64_t threshold_table_count(int search_bound);

inline constexpr std::uint64_t kMaxBruteForceCandidates = std::uint64_t{1} << 20;

// Exhaustive search over monotone non-increasing threshold tables with entries in
// [1, search_bound], each evaluated exactly by its stationary distribution.
SolveReport brute_force_best_threshold(const ModelParams& params, int search_bound);

}  // namespace aoimec
