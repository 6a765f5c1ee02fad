#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "heuristics.hpp"

namespace aoimec {

enum class Family { local_only, mec_only, age_threshold, service_threshold, optimal };
enum class Method { closed_form, chain, rvi, sim };

std::string_view to_string(Family f);
std::string_view to_string(Method m);
std::optional<Family> parse_family(std::string_view s);
std::optional<Method> parse_method(std::string_view s);

// One (p_bar, delta) sample of the age / MEC-frequency tradeoff. `param` is a* or z*
// for the threshold families, lambda for the optimal family, 0 otherwise.
struct FrontierPoint {
  Family family = Family::local_only;
  double param = 0.0;
  double mu = 0.0;
  double p_bar = 0.0;
  double delta = 0.0;
  Method method = Method::closed_form;
};

// 25 log-spaced prices lambda_k = 0.01 * 5000^(k/25), k = 1..25, covering (0.01, 50].
std::vector<double> default_lambda_grid();

struct FrontierConfig {
  double mu = 0.01;
  int a_star_min = 1;
  int a_star_max = 15;
  int z_star_min = 0;
  int z_star_max = 9;
  std::vector<double> lambdas = default_lambda_grid();
  int a_max = 400;
  unsigned threads = 0;  // 0: hardware concurrency

  void validate() const;
};

// Age-threshold rows come from the exact chain, service-threshold and the two single
// policies from closed forms, optimal rows from RVI (delta and p_bar from the chain of
// the solved policy). Rows are sorted by (family, param).
std::vector<FrontierPoint> run_frontier(const FrontierConfig& config);

// Header `family,param,mu,p_bar,delta,method`, numbers with 12 significant digits.
void write_csv(std::ostream& out, std::span<const FrontierPoint> points);
void write_json(std::ostream& out, std::span<const FrontierPoint> points);

std::string format_number(double v);

}  // namespace aoimec
