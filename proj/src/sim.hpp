#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "chain.hpp"
#include "core.hpp"

namespace aoimec {

// xoshiro256** seeded through splitmix64. Both are fixed, published algorithms, so a
// (seed, policy, params) triple reproduces the same trajectory in any implementation.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next();
  // Uniform on [0, 1) with 53 random bits: (next() >> 11) * 2^-53.
  double uniform();

 private:
  std::array<std::uint64_t, 4> s_{};
};

std::uint64_t splitmix64(std::uint64_t& state);

struct SimConfig {
  std::uint64_t horizon = 1'000'000;
  std::uint64_t seed = 1;
  std::uint64_t warmup = 10'000;
  std::uint32_t batches = 100;

  // warmup = 1% of the horizon
  static SimConfig with_horizon(std::uint64_t horizon, std::uint64_t seed);
  void validate() const;
};

inline constexpr std::size_t kServiceHistogramSize = 64;

struct SimResult {
  double delta_hat = 0.0;
  double p_bar_hat = 0.0;
  double stderr_delta = 0.0;
  double stderr_p = 0.0;
  std::uint64_t slots = 0;  // slots that enter the averages

  // Fraction of averaged slots spent in (1,0).
  double ref_fraction = 0.0;
  double stderr_ref = 0.0;

  // service_counts[k-1] counts local completions that took k slots (k <= 64).
  std::array<std::uint64_t, kServiceHistogramSize> service_counts{};
  std::uint64_t completions = 0;
};

// Slot loop: read (a,z), apply the policy; an offload is served within the slot and the
// next state is (1,0); otherwise the local server completes with probability mu.
// Averages run over batches * floor((horizon - warmup) / batches) slots after the warmup
// (the remainder is added to the warmup).
SimResult simulate(const Policy& policy, const ModelParams& params, const SimConfig& config);

// Standard error of the grand mean from batch means (sample stddev / sqrt(k)).
// Requires at least 10 batches.
double batch_stderr(std::span<const double> batch_means);

}  // namespace aoimec
