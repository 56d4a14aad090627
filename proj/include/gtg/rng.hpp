#pragma once

#include <cstdint>
#include <random>

namespace gtg {

// Purpose tags for deriving independent sub-streams from one master seed.
// Keeping these in one place makes the draw layout of a whole run auditable.
enum class RngStream : std::uint64_t {
  dataset_gen = 1,
  trajectory = 2,
  denoiser_train = 3,
  proxy_split = 4,
  proxy_train = 5,
  context_pick = 6,
  sample_chain = 7,
  corrupt = 8,
};

// Seeded random stream. Streams derived from the same (seed, tag, index)
// triple are identical; different triples are decorrelated via seed_seq.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  Rng(std::uint64_t seed, RngStream tag, std::uint64_t index = 0) {
    std::seed_seq seq{seed, static_cast<std::uint64_t>(tag), index};
    engine_.seed(seq);
  }

  double uniform(double lo = 0.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }

  // Uniform integer in [lo, hi] inclusive.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(engine_);
  }

  double normal(double mean = 0.0, double stddev = 1.0) {
    return std::normal_distribution<double>(mean, stddev)(engine_);
  }

  bool bernoulli(double p) {
    return std::bernoulli_distribution(p)(engine_);
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace gtg
