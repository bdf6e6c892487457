#pragma once

#include <cstdint>
#include <random>

namespace rtnet {

// Seedable random stream. The engine is std::mt19937_64, whose output
// sequence is fixed by the standard; the conversions to uniform/normal
// variates are implemented here rather than through <random> distributions,
// whose algorithms are implementation-defined. Identical (seed, stream)
// therefore gives identical draws on every platform.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  std::uint64_t next_u64() { return engine_(); }
  // Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Uniform integer in [lo, hi], inclusive, without modulo bias.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
  // Standard normal via the Box-Muller transform.
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }
  bool bernoulli(double p) { return uniform() < p; }

  // Independent child stream, e.g. one per pair in a sampling sweep.
  RngStream derive(std::uint64_t sub_stream) const;

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace rtnet
