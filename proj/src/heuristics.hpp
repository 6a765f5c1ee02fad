#pragma once

#include <cstdint>

namespace aoimec {

// Long-run average age, MEC frequency and Lagrangian cost delta + lambda * p_bar.
struct EvalResult {
  double delta = 0.0;
  double p_bar = 0.0;
  double g = 0.0;
};

// Effective service time S (local time, capped at z*+1 by an MEC takeover) and
// Y, the age left at the monitor when the previous update finishes.
struct ServiceMoments {
  double e_s = 0.0;
  double e_s2 = 0.0;
  double e_y = 0.0;
};

inline constexpr std::int64_t kMaxServiceThreshold = 1'000'000;

// Zero-wait geometric server, no MEC. Rejects mu outside (0, 1].
EvalResult local_only(double mu, double lambda = 0.0);

// Every update goes to the MEC.
EvalResult mec_only(double lambda = 0.0);

ServiceMoments service_moments(double mu, std::int64_t z_star);

// Abort local service and offload once the in-flight update has z* slots of service.
// Uses delta = E[Y] + E[S^2] / (2 E[S]).
EvalResult service_threshold_eval(double mu, std::int64_t z_star, double lambda = 0.0);

// The same average age written as a single three-term fraction over 2 mu (1 - mubar^(z*+1)).
double service_threshold_age_expanded(double mu, std::int64_t z_star);

// Age from the renewal-reward area form (E[Y S] + E[S^2] / 2) / E[S], with E[Y S] = E[Y] E[S].
double service_threshold_age_from_area(double mu, std::int64_t z_star);

}  // namespace aoimec
