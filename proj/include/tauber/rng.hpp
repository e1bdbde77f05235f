// Seedable, splittable random source used by every sampler.
//
// The engine is std::mt19937_64. Independent substreams are obtained by
// hashing (master seed, stream index) through SplitMix64 and seeding a
// fresh engine with the result, so batch k of a run is the same no matter
// which thread executes it.
#pragma once

#include <cstdint>
#include <limits>
#include <random>

namespace tauber {

std::uint64_t splitmix64(std::uint64_t x);

class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  /// Deterministic child stream `index` of `master`.
  static Rng substream(std::uint64_t master, std::uint64_t index);

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  /// Uniform draw on the open interval (0, 1).
  double uniform() {
    // 53 random mantissa bits, shifted off zero by half an ulp.
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace tauber
