#include "frontier.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "chain.hpp"
#include "mdp.hpp"

namespace aoimec {

std::string_view to_string(Family f) {
  switch (f) {
    case Family::local_only: return "local_only";
    case Family::mec_only: return "mec_only";
    case Family::age_threshold: return "age_threshold";
    case Family::service_threshold: return "service_threshold";
    case Family::optimal: return "optimal";
  }
  return "unknown";
}

std::string_view to_string(Method m) {
  switch (m) {
    case Method::closed_form: return "closed_form";
    case Method::chain: return "chain";
    case Method::rvi: return "rvi";
    case Method::sim: return "sim";
  }
  return "unknown";
}

std::optional<Family> parse_family(std::string_view s) {
  for (auto f : {Family::local_only, Family::mec_only, Family::age_threshold, Family::service_threshold, Family::optimal})
    if (to_string(f) == s) return f;
  return std::nullopt;
}

std::optional<Method> parse_method(std::string_view s) {
  for (auto m : {Method::closed_form, Method::chain, Method::rvi, Method::sim})
    if (to_string(m) == s) return m;
  return std::nullopt;
}

std::vector<double> default_lambda_grid() {
  std::vector<double> grid;
  for (int k = 1; k <= 25; ++k) grid.push_back(0.01 * std::pow(5000.0, k / 25.0));
  grid.back() = 50.0;
  return grid;
}

void FrontierConfig::validate() const {
  check_mu(mu);
  if (a_star_min < 1 || a_star_max < a_star_min) throw std::invalid_argument("a* range must be non-empty and start at 1 or above");
  if (z_star_min < 0 || z_star_max < z_star_min) throw std::invalid_argument("z* range must be non-empty and non-negative");
  if (lambdas.empty()) throw std::invalid_argument("lambda grid must not be empty");
  for (double l : lambdas)
    if (!(l >= 0.0) || !std::isfinite(l)) throw std::invalid_argument("lambda values must be finite and non-negative");
  if (a_max < 2) throw std::invalid_argument("a_max must be at least 2");
  if (a_star_max > a_max) throw std::invalid_argument("a* range exceeds a_max");
}

std::vector<FrontierPoint> run_frontier(const FrontierConfig& config) {
  config.validate();
  const double mu = config.mu;
  std::vector<std::function<FrontierPoint()>> tasks;

  tasks.emplace_back([mu] {
    const EvalResult r = local_only(mu);
    return FrontierPoint{Family::local_only, 0.0, mu, r.p_bar, r.delta, Method::closed_form};
  });
  tasks.emplace_back([mu] {
    const EvalResult r = mec_only();
    return FrontierPoint{Family::mec_only, 0.0, mu, r.p_bar, r.delta, Method::closed_form};
  });
  for (int a_star = config.a_star_min; a_star <= config.a_star_max; ++a_star) {
    tasks.emplace_back([mu, a_star, a_max = config.a_max] {
      ModelParams p;
      p.mu = mu;
      p.a_max = a_max;
      const EvalResult r = evaluate_exact(age_threshold_policy(a_star, a_max), p);
      return FrontierPoint{Family::age_threshold, static_cast<double>(a_star), mu, r.p_bar, r.delta, Method::chain};
    });
  }
  for (int z_star = config.z_star_min; z_star <= config.z_star_max; ++z_star) {
    tasks.emplace_back([mu, z_star] {
      const EvalResult r = service_threshold_eval(mu, z_star);
      return FrontierPoint{Family::service_threshold, static_cast<double>(z_star), mu, r.p_bar, r.delta,
                           Method::closed_form};
    });
  }
  for (double lambda : config.lambdas) {
    tasks.emplace_back([mu, lambda, a_max = config.a_max] {
      ModelParams p;
      p.mu = mu;
      p.lambda = lambda;
      p.a_max = a_max;
      const SolveReport s = rvi_solve(p);
      if (!s.converged) throw std::runtime_error("RVI did not converge for lambda = " + format_number(lambda));
      const EvalResult r = evaluate_exact(s.policy, p);
      return FrontierPoint{Family::optimal, lambda, mu, r.p_bar, r.delta, Method::rvi};
    });
  }

  std::vector<FrontierPoint> points(tasks.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      try {
        points[i] = tasks[i]();
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  unsigned n_threads = config.threads ? config.threads : std::max(1u, std::thread::hardware_concurrency());
  n_threads = std::min<unsigned>(n_threads, static_cast<unsigned>(tasks.size()));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);

  std::stable_sort(points.begin(), points.end(), [](const FrontierPoint& l, const FrontierPoint& r) {
    if (l.family != r.family) return l.family < r.family;
    return l.param < r.param;
  });
  return points;
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

void write_csv(std::ostream& out, std::span<const FrontierPoint> points) {
  out << "family,param,mu,p_bar,delta,method\n";
  for (const auto& p : points) {
    out << to_string(p.family) << ',' << format_number(p.param) << ',' << format_number(p.mu) << ','
        << format_number(p.p_bar) << ',' << format_number(p.delta) << ',' << to_string(p.method) << '\n';
  }
}

void write_json(std::ostream& out, std::span<const FrontierPoint> points) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& p : points) {
    rows.push_back({{"family", std::string(to_string(p.family))},
                    {"param", p.param},
                    {"mu", p.mu},
                    {"p_bar", p.p_bar},
                    {"delta", p.delta},
                    {"method", std::string(to_string(p.method))}});
  }
  out << rows.dump(2) << '\n';
}

}  // namespace aoimec
