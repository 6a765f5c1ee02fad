#include "chain.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

namespace aoimec {

Policy::Policy(int a_max, std::vector<std::uint8_t> actions, std::optional<std::vector<int>> thresholds)
    : a_max_(a_max), actions_(std::move(actions)), thresholds_(std::move(thresholds)) {
  if (a_max < 2) throw std::invalid_argument("a_max must be at least 2");
  if (actions_.size() != StateSpace(a_max).size())
    throw std::invalid_argument("action table size does not match the truncated state space");
  for (auto u : actions_)
    if (u > 1) throw std::invalid_argument("actions must be 0 or 1");
}

Policy Policy::from_thresholds(std::span<const int> thresholds, int a_max) {
  const StateSpace space(a_max);
  std::vector<std::uint8_t> actions(space.size(), 1);
  for (int a = 1; a <= a_max; ++a) {
    for (int z = 0; z < a; ++z) {
      const auto zi = static_cast<std::size_t>(z);
      const bool mec = zi >= thresholds.size() || a >= thresholds[zi];
      actions[StateSpace::index_of(a, z)] = mec ? 1 : 0;
    }
  }
  return Policy(a_max, std::move(actions), std::vector<int>(thresholds.begin(), thresholds.end()));
}

Action Policy::action(State s) const {
  check_state(s);
  if (s.a >= a_max_) return Action::mec;
  if (s.z >= s.a) throw std::invalid_argument("state " + to_string(s) + " is not reachable (z >= a)");
  return actions_[StateSpace::index_of(s.a, s.z)] ? Action::mec : Action::local;
}

std::vector<int> Policy::extract_thresholds() const {
  std::vector<int> out(static_cast<std::size_t>(a_max_), a_max_);
  for (int z = 0; z < a_max_; ++z) {
    for (int a = z + 1; a <= a_max_; ++a) {
      if (action({a, z}) == Action::mec) {
        out[static_cast<std::size_t>(z)] = a;
        break;
      }
    }
  }
  return out;
}

Policy age_threshold_policy(int a_star, int a_max) {
  if (a_star < 1 || a_star > a_max)
    throw std::invalid_argument("age threshold a* must lie in [1, a_max], got " + std::to_string(a_star));
  std::vector<int> thresholds(static_cast<std::size_t>(a_max), a_star);
  return Policy::from_thresholds(thresholds, a_max);
}

Policy service_threshold_policy(int z_star, int a_max) {
  if (z_star < 0) throw std::invalid_argument("service threshold z* must be non-negative");
  const StateSpace space(a_max);
  std::vector<std::uint8_t> actions(space.size(), 0);
  for (int a = 1; a <= a_max; ++a)
    for (int z = 0; z < a; ++z) actions[StateSpace::index_of(a, z)] = (z >= z_star || a >= a_max) ? 1 : 0;
  std::vector<int> thresholds;
  for (int z = 0; z < std::min(z_star, a_max); ++z) thresholds.push_back(a_max);
  return Policy(a_max, std::move(actions), std::move(thresholds));
}

Policy local_only_policy(int a_max) {
  std::vector<int> thresholds(static_cast<std::size_t>(a_max), a_max);
  return Policy::from_thresholds(thresholds, a_max);
}

Policy mec_only_policy(int a_max) { return age_threshold_policy(1, a_max); }

SparseChain build_chain(const Policy& policy, double mu) {
  check_mu(mu);
  const StateSpace space(policy.a_max());
  std::vector<std::int32_t> slot(space.size(), -1);

  SparseChain chain;
  auto visit = [&](State s) -> std::uint32_t {
    auto& id = slot[space.index(s)];
    if (id < 0) {
      id = static_cast<std::int32_t>(chain.states.size());
      chain.states.push_back(s);
    }
    return static_cast<std::uint32_t>(id);
  };

  visit({1, 0});
  chain.row_start.push_back(0);
  // Breadth-first: states are appended while rows are emitted in discovery order.
  for (std::size_t i = 0; i < chain.states.size(); ++i) {
    const State s = chain.states[i];
    const Action u = policy.action(s);
    chain.actions.push_back(static_cast<std::uint8_t>(u));
    const Transitions next = transitions(s, u, mu);
    if (next.size == 2 && next.items[0].next == next.items[1].next) {
      chain.col.push_back(visit(next.items[0].next));
      chain.prob.push_back(1.0);
    } else {
      for (const auto& t : next) {
        if (t.prob <= 0.0) continue;
        chain.col.push_back(visit(t.next));
        chain.prob.push_back(t.prob);
      }
    }
    chain.row_start.push_back(chain.col.size());
  }
  return chain;
}

int max_reachable_column(const SparseChain& chain) {
  int z = 0;
  for (const auto& s : chain.states) z = std::max(z, s.z);
  return z;
}

double StationaryDistribution::prob(State s) const {
  for (std::size_t i = 0; i < states.size(); ++i)
    if (states[i] == s) return pi[i];
  return 0.0;
}

namespace {

void multiply(const SparseChain& chain, std::span<const double> pi, std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t i = 0; i < chain.size(); ++i) {
    const double mass = pi[i];
    if (mass == 0.0) continue;
    for (std::size_t k = chain.row_start[i]; k < chain.row_start[i + 1]; ++k) out[chain.col[k]] += mass * chain.prob[k];
  }
}

bool power_iteration(const SparseChain& chain, const StationaryOptions& options, StationaryDistribution& out) {
  const std::size_t n = chain.size();
  std::vector<double> pi(n, 1.0 / static_cast<double>(n));
  std::vector<double> next(n);
  for (long it = 1; it <= options.max_iterations; ++it) {
    multiply(chain, pi, next);
    double sum = 0.0;
    for (double v : next) sum += v;
    double change = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      next[i] /= sum;
      change = std::max(change, std::abs(next[i] - pi[i]));
    }
    pi.swap(next);
    if (change <= options.tolerance) {
      out.pi = std::move(pi);
      out.iterations = it;
      out.method = StationaryMethod::power;
      return true;
    }
  }
  out.pi = std::move(pi);
  out.iterations = options.max_iterations;
  return false;
}

void direct_solve(const SparseChain& chain, StationaryDistribution& out) {
  const auto n = static_cast<Eigen::Index>(chain.size());
  Eigen::MatrixXd system = -Eigen::MatrixXd::Identity(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto row = static_cast<std::size_t>(i);
    for (std::size_t k = chain.row_start[row]; k < chain.row_start[row + 1]; ++k)
      system(static_cast<Eigen::Index>(chain.col[k]), i) += chain.prob[k];
  }
  // One balance equation is redundant; replace it by the normalization.
  system.row(0).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs(0) = 1.0;
  const Eigen::VectorXd solution = system.partialPivLu().solve(rhs);

  out.pi.assign(solution.data(), solution.data() + n);
  double sum = 0.0;
  for (double& v : out.pi) {
    if (v < 0.0 && v > -1e-13) v = 0.0;
    sum += v;
  }
  for (double& v : out.pi) v /= sum;
  out.iterations = 0;
  out.method = StationaryMethod::direct;
}

}  // namespace

double balance_residual(const SparseChain& chain, std::span<const double> pi) {
  std::vector<double> next(chain.size());
  multiply(chain, pi, next);
  double r = 0.0;
  for (std::size_t i = 0; i < next.size(); ++i) r = std::max(r, std::abs(next[i] - pi[i]));
  return r;
}

StationaryDistribution stationary(const SparseChain& chain, const StationaryOptions& options) {
  if (chain.size() == 0) throw std::invalid_argument("empty chain");
  StationaryDistribution out;
  out.states = chain.states;

  const bool go_direct = options.method == StationaryMethod::direct ||
                         (options.method == StationaryMethod::automatic && chain.size() <= options.prefer_direct);
  if (go_direct) {
    if (chain.size() > options.direct_limit)
      throw std::invalid_argument("chain has " + std::to_string(chain.size()) + " states, above the direct-solve limit");
    direct_solve(chain, out);
  } else if (!power_iteration(chain, options, out)) {
    const double residual = balance_residual(chain, out.pi);
    if (options.method == StationaryMethod::power || chain.size() > options.direct_limit)
      throw ConvergenceError("stationary distribution did not converge in " + std::to_string(options.max_iterations) +
                                 " iterations (residual " + std::to_string(residual) + ")",
                             residual);
    direct_solve(chain, out);
  }
  out.residual = balance_residual(chain, out.pi);
  return out;
}

EvalResult evaluate_exact(const Policy& policy, const ModelParams& params, const StationaryOptions& options) {
  check_mu(params.mu);
  if (!(params.lambda >= 0.0)) throw std::invalid_argument("lambda must be non-negative");
  const SparseChain chain = build_chain(policy, params.mu);
  const StationaryDistribution dist = stationary(chain, options);

  double mean_age = 0.0;
  double p_bar = 0.0;
  for (std::size_t i = 0; i < chain.size(); ++i) {
    mean_age += static_cast<double>(chain.states[i].a) * dist.pi[i];
    if (chain.actions[i]) p_bar += dist.pi[i];
  }
  EvalResult r;
  r.delta = mean_age + 0.5;
  r.p_bar = p_bar;
  r.g = r.delta + params.lambda * p_bar;
  return r;
}

EvalResult evaluate_renewal(const Policy& policy, const ModelParams& params) {
  check_mu(params.mu);
  if (!(params.lambda >= 0.0)) throw std::invalid_argument("lambda must be non-negative");
  const double mu = params.mu;
  const int n = policy.a_max();

  // Per start age a0 (index a0 - 1): expected slots, age area, MEC slots and the law of
  // the next start age.
  std::vector<double> slots(n, 0.0), area(n, 0.0), mec(n, 0.0);
  Eigen::MatrixXd next = Eigen::MatrixXd::Zero(n, n);
  for (int a0 = 1; a0 <= n; ++a0) {
    const int i = a0 - 1;
    double alive = 1.0;
    for (int k = 0; alive > 0.0; ++k) {
      const State s{a0 + k, k};
      slots[i] += alive;
      area[i] += alive * (s.a + 0.5);
      if (policy.offloads(s)) {
        mec[i] += alive;
        next(i, 0) += alive;
        break;
      }
      next(i, k) += alive * mu;  // completion: next start age k + 1
      alive *= 1.0 - mu;
    }
  }

  // Start ages reachable from 1. Age 1 is reachable from each of them, so they form a
  // single recurrent class.
  std::vector<int> reach{0};
  std::vector<char> seen(n, 0);
  seen[0] = 1;
  for (std::size_t q = 0; q < reach.size(); ++q)
    for (int j = 0; j < n; ++j)
      if (next(reach[q], j) > 0.0 && !seen[j]) {
        seen[j] = 1;
        reach.push_back(j);
      }
  const auto m = static_cast<Eigen::Index>(reach.size());
  Eigen::MatrixXd system(m, m);
  for (Eigen::Index r = 0; r < m; ++r)
    for (Eigen::Index c = 0; c < m; ++c) system(r, c) = next(reach[c], reach[r]) - (r == c ? 1.0 : 0.0);
  system.row(m - 1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
  rhs(m - 1) = 1.0;
  const Eigen::VectorXd nu = system.partialPivLu().solve(rhs);

  double total = 0.0, total_area = 0.0, total_mec = 0.0;
  for (Eigen::Index r = 0; r < m; ++r) {
    total += nu(r) * slots[reach[r]];
    total_area += nu(r) * area[reach[r]];
    total_mec += nu(r) * mec[reach[r]];
  }
  EvalResult out;
  out.delta = total_area / total;
  out.p_bar = total_mec / total;
  out.g = out.delta + params.lambda * out.p_bar;
  return out;
}

}  // namespace aoimec
