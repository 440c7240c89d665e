#pragma once

#include <cstdint>

namespace despeckle {

/// Seedable xoshiro256++ generator with splitmix64 state initialization.
///
/// Every random stream in the library flows through this class so that runs
/// are reproducible from the seeds recorded in manifests, independently of
/// the C++ standard library in use. The exact algorithms:
///
///   state init    four splitmix64 steps over (seed, then stream applied as
///                 seed XOR 0x9E3779B97F4A7C15 * (stream+1) mixed in)
///   next_u64      xoshiro256++ (Blackman/Vigna)
///   uniform()     (next_u64() >> 11) * 2^-53, in [0, 1)
///   normal()      Box-Muller: sqrt(-2 ln(1-u1)) * cos(2 pi u2); the sine
///                 branch is discarded, so one normal consumes two uniforms
///   gamma(a)      Marsaglia-Tsang squeeze method for shape a >= 1
///   below(n)      floor(uniform() * n)
///
/// Parallel consumers must construct Rng(seed, stream) with distinct stream
/// indices instead of sharing one generator.
class Rng {
public:
  explicit Rng(uint64_t seed) : Rng(seed, 0) {}
  Rng(uint64_t seed, uint64_t stream);

  uint64_t next_u64();

  /// Uniform double in [0, 1).
  double uniform();

  /// Uniform integer in [0, n).  Requires n >= 1 and n < 2^53.
  uint64_t below(uint64_t n);

  /// Standard normal deviate.
  double normal();

  /// Gamma(shape, scale 1) deviate; shape must be >= 1.
  double gamma(double shape);

private:
  uint64_t s_[4];
};

}  // namespace despeckle
