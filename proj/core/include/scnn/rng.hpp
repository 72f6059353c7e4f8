#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace scnn {

[[nodiscard]] std::uint64_t splitmix64(std::uint64_t x);

/// Subsystem seeds: a labeled child never collides with a sibling label, so
/// adding a consumer of randomness does not perturb existing streams.
[[nodiscard]] std::uint64_t derive_seed(std::uint64_t base, std::string_view label);
[[nodiscard]] std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

/// mt19937_64 with distribution code written out here, so draws are
/// identical across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  /// Uniform in [0, 1) with 53 random bits.
  double uniform01();
  /// Uniform in [lo, hi].
  double uniform(double lo, double hi);
  /// Uniform integer in [0, bound); bound > 0.
  std::uint64_t below(std::uint64_t bound);
  /// Uniform integer in [lo, hi].
  std::int64_t integer(std::int64_t lo, std::int64_t hi);
  /// Standard normal via Box-Muller.
  double normal();

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace scnn
