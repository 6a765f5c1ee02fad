#include <algorithm>
#include "sim.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace aoimec {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Rng::Rng(std::uint64_t seed) {
  std::uint64_t sm = seed;
  for (auto& word : s_) word = splitmix64(sm);
}

std::uint64_t Rng::next() {
  auto rotl = [](std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); };
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Rng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

SimConfig SimConfig::with_horizon(std::uint64_t horizon, std::uint64_t seed) {
  SimConfig c;
  c.horizon = horizon;
  c.seed = seed;
  c.warmup = horizon / 100;
  return c;
}

void SimConfig::validate() const {
  if (horizon < 1) throw std::invalid_argument("horizon must be at least 1");
  if (warmup >= horizon) throw std::invalid_argument("warmup must be shorter than the horizon");
  if (batches < 10) throw std::invalid_argument("at least 10 batches are required");
  if ((horizon - warmup) / batches == 0)
    throw std::invalid_argument("horizon after warmup is shorter than the number of batches");
}

double batch_stderr(std::span<const double> batch_means) {
  const std::size_t k = batch_means.size();
  if (k < 10) throw std::invalid_argument("batch_stderr needs at least 10 batches, got " + std::to_string(k));
  // Shifted by the first value so a constant series gives exactly zero.
  const double shift = batch_means[0];
  double sum = 0.0, sum_sq = 0.0;
  for (double m : batch_means) {
    const double d = m - shift;
    sum += d;
    sum_sq += d * d;
  }
  const auto n = static_cast<double>(k);
  const double var = std::max(0.0, (sum_sq - sum * sum / n) / (n - 1.0));
  return std::sqrt(var / static_cast<double>(k));
}

SimResult simulate(const Policy& policy, const ModelParams& params, const SimConfig& config) {
  check_mu(params.mu);
  config.validate();

  const std::uint64_t batch_size = (config.horizon - config.warmup) / config.batches;
  const std::uint64_t measured = batch_size * config.batches;
  const std::uint64_t warmup = config.horizon - measured;

  Rng rng(config.seed);
  State s{1, 0};
  SimResult result;
  std::vector<double> age_means, mec_means, ref_means;
  age_means.reserve(config.batches);
  mec_means.reserve(config.batches);
  ref_means.reserve(config.batches);

  std::uint64_t age_sum = 0, mec_count = 0, ref_count = 0;
  std::uint64_t total_age = 0, total_mec = 0, total_ref = 0;
  std::uint64_t in_batch = 0;

  for (std::uint64_t n = 0; n < config.horizon; ++n) {
    const Action u = policy.action(s);
    const bool counted = n >= warmup;
    if (counted) {
      age_sum += static_cast<std::uint64_t>(s.a);
      mec_count += to_int(u);
      ref_count += (s == State{1, 0}) ? 1 : 0;
    }

    if (u == Action::mec) {
      s = {1, 0};
    } else if (params.mu >= 1.0 || rng.uniform() < params.mu) {
      if (counted) {
        ++result.completions;
        const auto k = static_cast<std::size_t>(s.z) + 1;
        if (k <= kServiceHistogramSize) ++result.service_counts[k - 1];
      }
      s = {s.z + 1, 0};
    } else {
      s = {s.a + 1, s.z + 1};
    }

    if (counted && ++in_batch == batch_size) {
      const auto b = static_cast<double>(batch_size);
      age_means.push_back(static_cast<double>(age_sum) / b + 0.5);
      mec_means.push_back(static_cast<double>(mec_count) / b);
      ref_means.push_back(static_cast<double>(ref_count) / b);
      total_age += age_sum;
      total_mec += mec_count;
      total_ref += ref_count;
      age_sum = mec_count = ref_count = 0;
      in_batch = 0;
    }
  }

  const auto m = static_cast<double>(measured);
  result.slots = measured;
  result.delta_hat = static_cast<double>(total_age) / m + 0.5;
  result.p_bar_hat = static_cast<double>(total_mec) / m;
  result.ref_fraction = static_cast<double>(total_ref) / m;
  result.stderr_delta = batch_stderr(age_means);
  result.stderr_p = batch_stderr(mec_means);
  result.stderr_ref = batch_stderr(ref_means);
  return result;
}

}  // namespace aoimec
