#pragma once

#include <cstdint>
#include <random>

namespace pickroute {

/// Mixes a base seed with a stream of integers (splitmix64 finalizer), used to
/// derive independent per-instance seeds from (seed, class, index).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t value);

/// Deterministic random source. The standard distributions are
/// implementation-defined, so sampling is done here from the raw engine output
/// to keep generated instances identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform integer in [0, bound). bound must be positive.
  std::uint64_t uniform_index(std::uint64_t bound);

  /// Uniform integer in [lo, hi].
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01();

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Standard normal via Box-Muller (no cached second variate).
  double normal(double mean, double stddev);

 private:
  std::mt19937_64 engine_;
};

}  // namespace pickroute
