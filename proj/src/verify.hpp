#pragma once

#include <cstdint>

#include <json.hpp>

#include "core.hpp"

namespace aoimec {

struct VerifyOptions {
  ModelParams params;
  int vi_iterations = 1000;
  std::uint64_t sim_horizon = 1'000'000;
  std::uint64_t seed = 1;
  int z_star_max = 9;
  // Breaks age monotonicity in the last discounted iterate; the suite must then fail.
  bool corrupt_value_table = false;
};

struct VerifyOutcome {
  bool passed = false;
  nlohmann::ordered_json report;
};

// Structural checks on discounted value iterates and the RVI policy, RVI fixed-point and
// greedy-evaluation consistency, and closed form / chain / simulation agreement for the
// service-threshold family at z* = 0..z_star_max.
VerifyOutcome run_verify(const VerifyOptions& options);

}  // namespace aoimec
