#pragma once

#include <cstdint>
#include <string_view>

namespace dbn {

/// SplitMix64 step (Steele, Lea, Flood). Used to expand seeds; the
/// constants are the published ones: increment 0x9E3779B97F4A7C15,
/// multipliers 0xBF58476D1CE4E5B9 and 0x94D049BB133111EB.
std::uint64_t splitmix64(std::uint64_t& state);

/// 64-bit FNV-1a hash (offset 0xCBF29CE484222325, prime 0x100000001B3).
std::uint64_t fnv1a64(std::string_view text);

/// Derives an independent per-stage seed from a global seed:
/// splitmix64 of (global XOR fnv1a64(stage)).
std::uint64_t stage_seed(std::uint64_t global_seed, std::string_view stage);

/// xorshift64* generator (Vigna): shifts 12/25/27, output multiplier
/// 0x2545F4914F6CDD1D. The state is seeded through one splitmix64 step so
/// every 64-bit seed, including 0, gives a valid nonzero state.
///
/// All derived draws are defined here rather than through <random>
/// distributions so sequences are identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();

  /// Uniform in [0, 1) with 53 random bits.
  double uniform();

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi);

  /// Uniform integer in [0, bound) by rejection; bound must be > 0.
  std::uint64_t below(std::uint64_t bound);

  /// Standard normal via Box-Muller (the cosine branch only, no caching).
  double normal();

  /// Bernoulli draw with probability p.
  bool chance(double p) { return uniform() < p; }

 private:
  std::uint64_t state_;
};

}  // namespace dbn
