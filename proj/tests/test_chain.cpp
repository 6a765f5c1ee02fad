#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "chain.hpp"
#include "heuristics.hpp"
#include "sim.hpp"

using namespace aoimec;

namespace {

using Row = std::map<std::pair<int, int>, double>;

Row row_of(const SparseChain& chain, State s) {
  Row row;
  for (std::size_t i = 0; i < chain.size(); ++i) {
    if (!(chain.states[i] == s)) continue;
    for (std::size_t k = chain.row_start[i]; k < chain.row_start[i + 1]; ++k) {
      const State t = chain.states[chain.col[k]];
      row[{t.a, t.z}] += chain.prob[k];
    }
  }
  return row;
}

std::set<std::pair<int, int>> state_set(const SparseChain& chain) {
  std::set<std::pair<int, int>> out;
  for (const auto& s : chain.states) out.insert({s.a, s.z});
  return out;
}

// Dense oracle: reachable set by brute-force closure, then pi from the Cesaro average of
// P^k applied to the point mass at (1,0) (robust for any unichain, periodic or not).
struct DenseOracle {
  std::vector<State> states;
  std::vector<double> pi;
};

DenseOracle dense_oracle(const Policy& policy, double mu, int steps) {
  DenseOracle o;
  std::map<std::pair<int, int>, std::size_t> id{{{1, 0}, 0}};
  o.states.push_back({1, 0});
  for (bool grew = true; grew;) {
    grew = false;
    for (std::size_t i = 0; i < o.states.size(); ++i) {
      for (const auto& t : transitions(o.states[i], policy.action(o.states[i]), mu)) {
        if (t.prob > 0.0 && id.emplace(std::pair{t.next.a, t.next.z}, o.states.size()).second) {
          o.states.push_back(t.next);
          grew = true;
        }
      }
    }
  }
  const std::size_t n = o.states.size();
  std::vector<std::vector<double>> P(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (const auto& t : transitions(o.states[i], policy.action(o.states[i]), mu))
      P[i][id.at({t.next.a, t.next.z})] += t.prob;
  std::vector<double> x(n, 0.0), acc(n, 0.0);
  x[0] = 1.0;
  for (int k = 0; k < steps; ++k) {
    std::vector<double> y(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) y[j] += x[i] * P[i][j];
    x.swap(y);
    if (k >= steps / 2)
      for (std::size_t i = 0; i < n; ++i) acc[i] += x[i];
  }
  const double total = std::accumulate(acc.begin(), acc.end(), 0.0);
  for (double& v : acc) v /= total;
  o.pi = acc;
  return o;
}

}  // namespace

TEST_CASE("age-threshold policy is total on the truncated space") {
  const Policy p = age_threshold_policy(3, 10);
  for (int a = 1; a <= 10; ++a)
    for (int z = 0; z < a; ++z) CHECK(p.offloads({a, z}) == (a >= 3));
  CHECK(p.offloads({25, 4}));  // beyond the truncation
  CHECK_THROWS_AS(p.action({3, 3}), std::invalid_argument);
  CHECK_THROWS_AS(age_threshold_policy(11, 10), std::invalid_argument);
  CHECK_THROWS_AS(age_threshold_policy(0, 10), std::invalid_argument);
  const Policy all = age_threshold_policy(1, 10);
  for (int a = 1; a <= 10; ++a)
    for (int z = 0; z < a; ++z) CHECK(all.offloads({a, z}));
}

TEST_CASE("threshold tables round-trip") {
  const std::vector<int> table{6, 4, 4, 3};
  const Policy p = Policy::from_thresholds(table, 12);
  CHECK(p.thresholds().value() == table);
  const std::vector<int> extracted = p.extract_thresholds();
  CHECK(extracted[0] == 6);
  CHECK(extracted[1] == 4);
  CHECK(extracted[2] == 4);
  CHECK(extracted[3] == 4);  // column 3 starts at a = 4
  CHECK(extracted[4] == 5);  // past the table everything offloads
  CHECK(local_only_policy(12).extract_thresholds() == std::vector<int>(12, 12));
}

TEST_CASE("service-threshold policy as a state policy") {
  const Policy p = service_threshold_policy(2, 20);
  for (int a = 1; a <= 20; ++a)
    for (int z = 0; z < a; ++z) CHECK(p.offloads({a, z}) == (z >= 2 || a == 20));
  CHECK_THROWS_AS(service_threshold_policy(-1, 20), std::invalid_argument);
}

TEST_CASE("chain for a* = 2 at mu = 0.5") {
  const SparseChain chain = build_chain(age_threshold_policy(2, 50), 0.5);
  CHECK(state_set(chain) == std::set<std::pair<int, int>>{{1, 0}, {2, 1}});
  CHECK(row_of(chain, {1, 0}) == Row{{{1, 0}, 0.5}, {{2, 1}, 0.5}});
  CHECK(row_of(chain, {2, 1}) == Row{{{1, 0}, 1.0}});

  const StationaryDistribution pi = stationary(chain);
  CHECK(pi.prob({1, 0}) == doctest::Approx(2.0 / 3.0).epsilon(1e-11));
  CHECK(pi.prob({2, 1}) == doctest::Approx(1.0 / 3.0).epsilon(1e-11));

  const EvalResult r = evaluate_exact(age_threshold_policy(2, 50), {0.5, 0.0, 0.99, 50});
  CHECK(r.delta == doctest::Approx(11.0 / 6.0).epsilon(1e-11));
  CHECK(r.p_bar == doctest::Approx(1.0 / 3.0).epsilon(1e-11));
}

TEST_CASE("always-MEC chain is a single self-loop") {
  for (double mu : {0.01, 0.5, 1.0}) {
    const SparseChain chain = build_chain(mec_only_policy(30), mu);
    REQUIRE(chain.size() == 1);
    CHECK(row_of(chain, {1, 0}) == Row{{{1, 0}, 1.0}});
    const StationaryDistribution pi = stationary(chain);
    CHECK(pi.pi[0] == 1.0);
    const EvalResult r = evaluate_exact(mec_only_policy(30), {mu, 2.0, 0.99, 30});
    CHECK(r.delta == 1.5);
    CHECK(r.p_bar == 1.0);
    CHECK(r.g == 3.5);
  }
}

TEST_CASE("never-MEC chain has a_max - 1 local levels and resets at a_max") {
  const int a_max = 9;
  const Policy policy = local_only_policy(a_max);
  const SparseChain chain = build_chain(policy, 0.5);
  const DenseOracle oracle = dense_oracle(policy, 0.5, 2);
  std::set<std::pair<int, int>> expected;
  for (const auto& s : oracle.states) expected.insert({s.a, s.z});
  CHECK(state_set(chain) == expected);
  // Every age below a_max is local; column 0 cannot reach a_max (that needs z = a_max - 1
  // to complete, and (a_max, a_max - 1) offloads).
  for (int a = 1; a < a_max; ++a)
    for (int z = 0; z < a; ++z) CHECK(expected.count({a, z}) == 1);
  CHECK(expected.count({a_max, 0}) == 0);
  for (int z = 1; z < a_max; ++z) CHECK(expected.count({a_max, z}) == 1);
  for (std::size_t i = 0; i < chain.size(); ++i) {
    const State s = chain.states[i];
    CHECK(static_cast<bool>(chain.actions[i]) == (s.a == a_max));
    if (s.a == a_max) CHECK(row_of(chain, s) == Row{{{1, 0}, 1.0}});
  }
}

TEST_CASE("a* = 3 chain") {
  const Policy policy = age_threshold_policy(3, 50);
  const SparseChain chain = build_chain(policy, 0.4);
  CHECK(state_set(chain) == std::set<std::pair<int, int>>{{1, 0}, {2, 0}, {2, 1}, {3, 1}, {3, 2}});
  CHECK(row_of(chain, {2, 0}) == Row{{{1, 0}, 0.4}, {{3, 1}, 0.6}});
  CHECK(row_of(chain, {2, 1}) == Row{{{2, 0}, 0.4}, {{3, 2}, 0.6}});
  CHECK(row_of(chain, {3, 1}) == Row{{{1, 0}, 1.0}});
  const StationaryDistribution pi = stationary(chain);
  CHECK(pi.residual <= 1e-10);
  double p_bar = 0.0;
  for (std::size_t i = 0; i < chain.size(); ++i)
    if (chain.states[i].a == 3) p_bar += pi.pi[i];
  CHECK(evaluate_exact(policy, {0.4, 0.0, 0.99, 50}).p_bar == doctest::Approx(p_bar).epsilon(1e-14));
}

TEST_CASE("rows are stochastic") {
  for (double mu : {0.05, 0.3, 0.77, 1.0}) {
    for (const Policy& p : {age_threshold_policy(6, 25), service_threshold_policy(4, 25), local_only_policy(25),
                            Policy::from_thresholds(std::vector<int>{9, 7, 7, 5, 5}, 25)}) {
      const SparseChain chain = build_chain(p, mu);
      CHECK(chain.states.front() == State{1, 0});
      for (std::size_t i = 0; i < chain.size(); ++i) {
        double sum = 0.0;
        for (std::size_t k = chain.row_start[i]; k < chain.row_start[i + 1]; ++k) {
          CHECK(chain.prob[k] > 0.0);
          sum += chain.prob[k];
        }
        CHECK(std::abs(sum - 1.0) <= 1e-15);
      }
    }
  }
}

TEST_CASE("power iteration and direct solve agree") {
  for (double mu : {0.1, 0.5, 0.9}) {
    for (const Policy& p : {age_threshold_policy(7, 30), service_threshold_policy(3, 30), local_only_policy(30),
                            Policy::from_thresholds(std::vector<int>{12, 8, 6, 6, 4}, 30)}) {
      const SparseChain chain = build_chain(p, mu);
      StationaryOptions power;
      power.method = StationaryMethod::power;
      StationaryOptions direct;
      direct.method = StationaryMethod::direct;
      const StationaryDistribution a = stationary(chain, power);
      const StationaryDistribution b = stationary(chain, direct);
      CHECK(a.method == StationaryMethod::power);
      CHECK(b.method == StationaryMethod::direct);
      CHECK(a.residual <= 1e-10);
      CHECK(b.residual <= 1e-12);
      double diff = 0.0, sum_a = 0.0, sum_b = 0.0;
      for (std::size_t i = 0; i < chain.size(); ++i) {
        diff = std::max(diff, std::abs(a.pi[i] - b.pi[i]));
        sum_a += a.pi[i];
        sum_b += b.pi[i];
        CHECK(a.pi[i] >= 0.0);
        CHECK(b.pi[i] >= 0.0);
      }
      CHECK(diff <= 1e-9);
      CHECK(std::abs(sum_a - 1.0) <= 1e-10);
      CHECK(std::abs(sum_b - 1.0) <= 1e-10);
      CHECK(a.prob({1, 0}) > 0.0);
    }
  }
}

TEST_CASE("stationary matches the dense oracle") {
  for (double mu : {0.2, 0.6}) {
    for (const Policy& p : {age_threshold_policy(4, 12), Policy::from_thresholds(std::vector<int>{7, 5, 3}, 12)}) {
      const SparseChain chain = build_chain(p, mu);
      const StationaryDistribution pi = stationary(chain);
      const DenseOracle oracle = dense_oracle(p, mu, 20000);
      REQUIRE(oracle.states.size() == chain.size());
      for (std::size_t i = 0; i < oracle.states.size(); ++i)
        CHECK(pi.prob(oracle.states[i]) == doctest::Approx(oracle.pi[i]).epsilon(1e-8));
    }
  }
}

TEST_CASE("power iteration reports non-convergence") {
  const SparseChain chain = build_chain(local_only_policy(40), 0.05);
  StationaryOptions options;
  options.method = StationaryMethod::power;
  options.max_iterations = 3;
  CHECK_THROWS_AS(stationary(chain, options), ConvergenceError);
  try {
    stationary(chain, options);
  } catch (const ConvergenceError& e) {
    CHECK(e.residual() > 0.0);
  }
  // Automatic mode falls back to the direct solve on small chains.
  options.method = StationaryMethod::automatic;
  const StationaryDistribution pi = stationary(chain, options);
  CHECK(pi.method == StationaryMethod::direct);
  CHECK(pi.residual <= 1e-12);
  options.direct_limit = 10;
  CHECK_THROWS_AS(stationary(chain, options), ConvergenceError);
}

TEST_CASE("service-threshold chain matches the closed form") {
  const EvalResult r = evaluate_exact(service_threshold_policy(1, 50), {0.5, 0.0, 0.99, 50});
  CHECK(std::abs(r.delta - 11.0 / 6.0) <= 1e-9);
  CHECK(std::abs(r.p_bar - 1.0 / 3.0) <= 1e-9);
  for (double mu : {0.1, 0.3, 0.5, 0.7, 0.9}) {
    for (int z = 0; z <= 12; ++z) {
      const EvalResult exact = evaluate_exact(service_threshold_policy(z, 2 * z + 2), {mu, 0.0, 0.99, 2 * z + 2});
      const EvalResult closed = service_threshold_eval(mu, z);
      CAPTURE(mu);
      CAPTURE(z);
      CHECK(std::abs(exact.delta - closed.delta) / closed.delta <= 1e-8);
      CHECK(std::abs(exact.p_bar - closed.p_bar) / std::max(closed.p_bar, 1e-300) <= 1e-8);
    }
  }
}

TEST_CASE("exact evaluation bounds") {
  for (double mu : {0.05, 0.5, 1.0}) {
    for (int a_star = 1; a_star <= 20; ++a_star) {
      const EvalResult r = evaluate_exact(age_threshold_policy(a_star, 20), {mu, 1.0, 0.99, 20});
      CHECK(r.delta >= 1.5 - 1e-12);
      CHECK(r.p_bar >= 0.0);
      CHECK(r.p_bar <= 1.0 + 1e-12);
      CHECK(r.g == doctest::Approx(r.delta + r.p_bar));
    }
  }
  // Deterministic local service never reaches the boundary.
  const EvalResult r = evaluate_exact(local_only_policy(20), {1.0, 0.0, 0.99, 20});
  CHECK(r.delta == 1.5);
  CHECK(r.p_bar == 0.0);
}

TEST_CASE("largest reachable column") {
  CHECK(max_reachable_column(build_chain(mec_only_policy(10), 0.5)) == 0);
  CHECK(max_reachable_column(build_chain(service_threshold_policy(3, 10), 0.5)) == 3);
  CHECK(max_reachable_column(build_chain(local_only_policy(10), 0.5)) == 9);
}

TEST_CASE("renewal evaluation matches the stationary chain") {
  ModelParams p;
  p.lambda = 2.5;
  std::vector<Policy> policies;
  for (int a_max : {2, 7, 20}) {
    policies.push_back(local_only_policy(a_max));
    policies.push_back(mec_only_policy(a_max));
    policies.push_back(age_threshold_policy(std::min(3, a_max), a_max));
    policies.push_back(service_threshold_policy(1, a_max));
  }
  policies.push_back(Policy::from_thresholds(std::vector<int>{9, 6, 6, 4}, 20));
  policies.push_back(Policy::from_thresholds(std::vector<int>{5, 3, 3}, 50));
  // Arbitrary non-threshold tables.
  Rng rng(31);
  for (int rep = 0; rep < 5; ++rep) {
    Policy q = local_only_policy(15);
    for (auto& u : q.mutable_table()) u = rng.uniform() < 0.3 ? 1 : 0;
    policies.push_back(q);
  }
  for (double mu : {0.05, 0.3, 0.5, 0.9, 1.0}) {
    p.mu = mu;
    for (const Policy& policy : policies) {
      StationaryOptions direct;
      direct.method = StationaryMethod::direct;
      const EvalResult exact = evaluate_exact(policy, p, direct);
      const EvalResult renewal = evaluate_renewal(policy, p);
      CAPTURE(mu);
      CAPTURE(policy.a_max());
      CHECK(renewal.delta == doctest::Approx(exact.delta).epsilon(1e-10));
      CHECK(std::abs(renewal.p_bar - exact.p_bar) <= 1e-10);
      CHECK(renewal.g == doctest::Approx(exact.g).epsilon(1e-10));
    }
  }
  CHECK(evaluate_renewal(service_threshold_policy(1, 50), [] {
          ModelParams q;
          q.mu = 0.5;
          return q;
        }()).delta == doctest::Approx(11.0 / 6.0).epsilon(1e-13));
}
