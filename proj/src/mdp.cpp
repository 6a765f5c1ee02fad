#include "mdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace aoimec {
namespace {

constexpr double kTieTolerance = 1e-12;

struct ActionValues {
  double local;
  double mec;
};

// One-step lookahead at (a, z) for a < a_max; `scale` multiplies the continuation values.
inline ActionValues lookahead(const ModelParams& p, const std::vector<double>& v, int a, int z, double scale) {
  const double base = static_cast<double>(a) + 0.5;
  const double mec = base + p.lambda + scale * v[0];
  const double local = base + scale * (p.mu * v[StateSpace::index_of(z + 1, 0)] +
                                       (1.0 - p.mu) * v[StateSpace::index_of(a + 1, z + 1)]);
  return {local, mec};
}

inline bool prefers_mec(const ActionValues& q) { return q.mec < q.local - kTieTolerance * std::max(1.0, std::abs(q.local)); }

// out = T v with discount `scale` (1 for the average-cost operator).
void bellman(const ModelParams& p, const std::vector<double>& v, std::vector<double>& out, double scale) {
  const int a_max = p.a_max;
  for (int a = 1; a <= a_max; ++a) {
    const std::size_t row = StateSpace::index_of(a, 0);
    if (a == a_max) {
      const double forced = static_cast<double>(a) + 0.5 + p.lambda + scale * v[0];
      std::fill(out.begin() + static_cast<std::ptrdiff_t>(row), out.begin() + static_cast<std::ptrdiff_t>(row + a),
                forced);
      continue;
    }
    for (int z = 0; z < a; ++z) {
      const ActionValues q = lookahead(p, v, a, z, scale);
      out[row + static_cast<std::size_t>(z)] = std::min(q.local, q.mec);
    }
  }
}

bool value_ok(double lhs, double rhs) {
  // lhs >= rhs up to rounding
  return lhs >= rhs - 1e-12 * std::max({1.0, std::abs(lhs), std::abs(rhs)});
}

}  // namespace

Policy greedy_policy(const ModelParams& params, const ValueTable& h) {
  const StateSpace space(params.a_max);
  std::vector<std::uint8_t> actions(space.size(), 1);
  for (int a = 1; a < params.a_max; ++a)
    for (int z = 0; z < a; ++z)
      actions[StateSpace::index_of(a, z)] = prefers_mec(lookahead(params, h.v, a, z, 1.0)) ? 1 : 0;
  return Policy(params.a_max, std::move(actions));
}

std::vector<int> reachable_thresholds(const Policy& policy, double mu) {
  const SparseChain chain = build_chain(policy, mu);
  const int z_max = max_reachable_column(chain);
  std::vector<int> all = policy.extract_thresholds();
  all.resize(static_cast<std::size_t>(z_max) + 1);
  return all;
}

std::vector<int> on_path_thresholds(const Policy& policy, double mu) {
  const SparseChain chain = build_chain(policy, mu);
  const auto columns = static_cast<std::size_t>(max_reachable_column(chain)) + 1;
  std::vector<int> first_mec(columns, std::numeric_limits<int>::max());
  std::vector<int> oldest(columns, 0);
  for (std::size_t i = 0; i < chain.size(); ++i) {
    const State s = chain.states[i];
    const auto z = static_cast<std::size_t>(s.z);
    oldest[z] = std::max(oldest[z], s.a);
    if (chain.actions[i]) first_mec[z] = std::min(first_mec[z], s.a);
  }
  for (std::size_t z = 0; z < columns; ++z)
    if (first_mec[z] == std::numeric_limits<int>::max()) first_mec[z] = oldest[z] + 1;
  return first_mec;
}

SolveReport rvi_solve(const ModelParams& params, const RviOptions& options) {
  params.validate();
  const StateSpace space(params.a_max);
  std::vector<double> h(space.size(), 0.0);
  std::vector<double> next(space.size());

  long it = 0;
  double span = std::numeric_limits<double>::infinity();
  double g = 0.0;
  bool converged = false;
  while (it < options.max_iterations) {
    ++it;
    bellman(params, h, next, 1.0);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t i = 0; i < h.size(); ++i) {
      const double d = next[i] - h[i];
      lo = std::min(lo, d);
      hi = std::max(hi, d);
    }
    span = hi - lo;
    g = 0.5 * (lo + hi);
    const double ref = next[0];
    for (std::size_t i = 0; i < h.size(); ++i) h[i] = next[i] - ref;
    if (span <= options.tolerance) {
      converged = true;
      break;
    }
  }

  ValueTable table{params.a_max, std::move(h)};
  Policy policy = greedy_policy(params, table);
  SolveReport report{std::move(policy), g, {}, it, span, converged, std::move(table)};
  report.thresholds = reachable_thresholds(report.policy, params.mu);
  return report;
}

double optimality_residual(const ModelParams& params, double g, const ValueTable& h) {
  const StateSpace space(params.a_max);
  std::vector<double> next(space.size());
  bellman(params, h.v, next, 1.0);
  double r = 0.0;
  for (std::size_t i = 0; i < next.size(); ++i) r = std::max(r, std::abs(g + h.v[i] - next[i]));
  return r;
}

std::vector<ValueTable> discounted_vi(const ModelParams& params, int n_iters) {
  params.validate();
  if (n_iters < 0) throw std::invalid_argument("iteration count must be non-negative");
  const StateSpace space(params.a_max);
  std::vector<ValueTable> out;
  out.reserve(static_cast<std::size_t>(n_iters) + 1);
  out.push_back({params.a_max, std::vector<double>(space.size(), 0.0)});
  for (int n = 1; n <= n_iters; ++n) {
    ValueTable next{params.a_max, std::vector<double>(space.size())};
    bellman(params, out.back().v, next.v, params.beta);
    out.push_back(std::move(next));
  }
  return out;
}

bool StructureReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const StructureCheck& c) { return c.passed; });
}

StructureReport verify_structure(std::span<const ValueTable> iterates, const Policy& policy, double mu) {
  StructureReport report;
  auto named_check = [](std::string name) {
    StructureCheck c;
    c.name = std::move(name);
    return c;
  };
  auto fail = [](StructureCheck& c, State s, long n, std::string detail) {
    if (!c.passed) return;
    c.passed = false;
    c.witness = s;
    c.iterate = n;
    c.detail = std::move(detail);
  };

  StructureCheck finite = named_check("values_finite");
  StructureCheck in_n = named_check("values_nondecreasing_in_n");
  StructureCheck in_a = named_check("values_nondecreasing_in_age");
  StructureCheck in_z = named_check("values_nondecreasing_in_service");
  StructureCheck relative = named_check("relative_values_nonnegative");

  for (std::size_t n = 0; n < iterates.size(); ++n) {
    const ValueTable& t = iterates[n];
    const long idx = static_cast<long>(n);
    const double ref = t.at({1, 0});
    for (int a = 1; a <= t.a_max; ++a) {
      for (int z = 0; z < a; ++z) {
        const State s{a, z};
        const double v = t.at(s);
        if (!std::isfinite(v)) fail(finite, s, idx, "non-finite value");
        if (n + 1 < iterates.size() && !value_ok(iterates[n + 1].at(s), v))
          fail(in_n, s, idx, "V_{n+1}(s) < V_n(s)");
        if (a < t.a_max && !value_ok(t.at({a + 1, z}), v)) fail(in_a, s, idx, "V(a+1,z) < V(a,z)");
        if (z + 1 < a && !value_ok(t.at({a, z + 1}), v)) fail(in_z, s, idx, "V(a,z+1) < V(a,z)");
        if (!value_ok(v, ref)) fail(relative, s, idx, "V(a,z) - V(1,0) < 0");
      }
    }
  }

  StructureCheck age_form = named_check("threshold_in_age");
  StructureCheck service_form = named_check("threshold_in_service");
  const int a_max = policy.a_max();
  for (int a = 1; a <= a_max; ++a) {
    for (int z = 0; z < a; ++z) {
      if (!policy.offloads({a, z})) continue;
      if (a < a_max && !policy.offloads({a + 1, z})) fail(age_form, {a, z}, -1, "u(a,z)=1 but u(a+1,z)=0");
      if (z + 1 < a && !policy.offloads({a, z + 1})) fail(service_form, {a, z}, -1, "u(a,z)=1 but u(a,z+1)=0");
    }
  }

  StructureCheck monotone = named_check("thresholds_nonincreasing");
  const std::vector<int> thresholds = reachable_thresholds(policy, mu);
  for (std::size_t z = 1; z < thresholds.size(); ++z)
    if (thresholds[z] > thresholds[z - 1])
      fail(monotone, {thresholds[z], static_cast<int>(z)}, -1,
           "threshold for z=" + std::to_string(z) + " exceeds threshold for z=" + std::to_string(z - 1));

  report.checks = {finite, in_n, in_a, in_z, relative, age_form, service_form, monotone};
  return report;
}

std::uint64_t threshold_table_count(int search_bound) {
  if (search_bound < 1) return 0;
  if (search_bound > 64) return std::numeric_limits<std::uint64_t>::max();
  return std::uint64_t{1} << (search_bound - 1);
}

namespace {

struct Search {
  const ModelParams& params;
  int bound;
  std::vector<int> table;
  double best_g = std::numeric_limits<double>::infinity();
  std::vector<int> best;
  long evaluated = 0;

  // Entry z ranges over [z+1, prev]; anything below z+1 offloads the whole column and is
  // the same policy as z+1, which also ends the table since later columns are unreachable.
  void descend(int z, int prev) {
    for (int t = z + 1; t <= prev; ++t) {
      table.push_back(t);
      if (t == z + 1)
        evaluate();
      else
        descend(z + 1, t);
      table.pop_back();
    }
  }

  void evaluate() {
    ++evaluated;
    const Policy policy = Policy::from_thresholds(table, params.a_max);
    const EvalResult r = evaluate_renewal(policy, params);
    if (best.empty() || r.g < best_g - 1e-12 * std::max(1.0, std::abs(best_g))) {
      best_g = r.g;
      best = table;
    }
  }
};

}  // namespace

SolveReport brute_force_best_threshold(const ModelParams& params, int search_bound) {
  params.validate();
  if (search_bound < 1 || search_bound > params.a_max)
    throw std::invalid_argument("search bound must lie in [1, a_max], got " + std::to_string(search_bound));
  const std::uint64_t count = threshold_table_count(search_bound);
  if (count > kMaxBruteForceCandidates)
    throw std::length_error("search bound " + std::to_string(search_bound) + " needs " + std::to_string(count) +
                            " candidate threshold tables, above the limit of " +
                            std::to_string(kMaxBruteForceCandidates));

  Search search{params, search_bound, {}, std::numeric_limits<double>::infinity(), {}, 0};
  search.descend(0, search_bound);

  Policy policy = Policy::from_thresholds(search.best, params.a_max);
  SolveReport report{std::move(policy), search.best_g, {}, search.evaluated, 0.0, true, {}};
  report.thresholds = reachable_thresholds(report.policy, params.mu);
  return report;
}

}  // namespace aoimec
