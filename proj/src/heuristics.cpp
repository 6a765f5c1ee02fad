#include "heuristics.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "core.hpp"

namespace aoimec {
namespace {

void check_z_star(std::int64_t z_star) {
  if (z_star < 0 || z_star > kMaxServiceThreshold)
    throw std::invalid_argument("z* must lie in [0, " + std::to_string(kMaxServiceThreshold) + "], got " +
                                std::to_string(z_star));
}

// mubar^k
double mubar_pow(double mu, std::int64_t k) { return std::pow(1.0 - mu, static_cast<double>(k)); }

// 1 - mubar^k without cancellation when mu is small.
double one_minus_mubar_pow(double mu, std::int64_t k) {
  if (mu >= 1.0) return k == 0 ? 0.0 : 1.0;
  return -std::expm1(static_cast<double>(k) * std::log1p(-mu));
}

// The second-moment closed form loses about eps/mu^2 to cancellation. Below this value of
// mu (z*+1) the moments are summed directly instead (fewer than 0.5/mu terms).
constexpr double kSmallServiceMass = 0.5;

}  // namespace

EvalResult local_only(double mu, double /*lambda*/) {
  check_mu(mu);
  const double delta = (4.0 - mu) / (2.0 * mu);
  return {delta, 0.0, delta};
}

EvalResult mec_only(double lambda) { return {1.5, 1.0, 1.5 + lambda}; }

ServiceMoments service_moments(double mu, std::int64_t z_star) {
  check_mu(mu);
  check_z_star(z_star);
  const double mubar = 1.0 - mu;
  const auto z = static_cast<double>(z_star);
  const double p_z = mubar_pow(mu, z_star);  // P(Z > z*)

  ServiceMoments m;
  if (mu * (z + 1.0) < kSmallServiceMass) {
    // The closed forms subtract nearly equal terms here; sum the z*+1 atoms instead.
    double tail = 1.0;  // mubar^(k-1)
    for (std::int64_t k = 1; k <= z_star; ++k) {
      const double pk = tail * mu;
      const auto kd = static_cast<double>(k);
      m.e_s += pk * kd;
      m.e_s2 += pk * kd * kd;
      tail *= mubar;
    }
    m.e_y = m.e_s + tail;
    m.e_s += tail * (z + 1.0);
    m.e_s2 += tail * (z + 1.0) * (z + 1.0);
    return m;
  }
  m.e_s = one_minus_mubar_pow(mu, z_star + 1) / mu;
  m.e_y = (1.0 - p_z * (mu * z + mubar)) / mu;
  m.e_s2 = (2.0 * mubar - p_z * mubar * (2.0 + z * mu)) / (mu * mu) + (1.0 - p_z * z - p_z) / mu + p_z * z + p_z;
  return m;
}

EvalResult service_threshold_eval(double mu, std::int64_t z_star, double lambda) {
  const ServiceMoments m = service_moments(mu, z_star);
  EvalResult r;
  r.delta = m.e_y + m.e_s2 / (2.0 * m.e_s);
  r.p_bar = mu * mubar_pow(mu, z_star) / one_minus_mubar_pow(mu, z_star + 1);
  r.g = r.delta + lambda * r.p_bar;
  return r;
}

double service_threshold_age_expanded(double mu, std::int64_t z_star) {
  check_mu(mu);
  check_z_star(z_star);
  const double mubar = 1.0 - mu;
  const auto z = static_cast<double>(z_star);
  const double p = mubar_pow(mu, z_star);
  const double p1 = p * mubar;
  const double denom = 2.0 * mu * one_minus_mubar_pow(mu, z_star + 1);

  const double first = 2.0 * (1.0 - p * (mu * z + mubar) - p1 + p * p1 * (mu * z + mubar));
  // The z*mubar^z* term is scaled by mu; without it the sum falls short by z*mubar^(z*+1)/denom.
  const double second = mu * mu * p * (z + 1.0) + mu - mu * p * z - mu * p;
  const double third = 2.0 * mubar - p1 * (2.0 + z * mu);
  return (first + second + third) / denom;
}

double service_threshold_age_from_area(double mu, std::int64_t z_star) {
  const ServiceMoments m = service_moments(mu, z_star);
  const double e_ys = m.e_y * m.e_s;
  return (e_ys + 0.5 * m.e_s2) / m.e_s;
}

}  // namespace aoimec
