#pragma once

#include <cstdint>

#include "despeckle/image.hpp"
#include "despeckle/patches.hpp"

namespace despeckle {

/// Multiplicative speckle description: number of looks L and base seed.
struct NoiseSpec {
  int looks = 4;
  uint64_t seed = 1;
};

/// Digamma function psi(x) for x > 0 (recurrence to x >= 10, then the
/// asymptotic series), accurate to ~1e-12.
double digamma(double x);

/// Mean of the log-speckle, c = E[ln eta] = psi(L) - ln L. Always negative,
/// tending to 0 as L grows.
double log_speckle_bias(int looks);

/// i.i.d. field of Gamma(L, 1/L) draws (mean 1, variance 1/L), deterministic
/// for a fixed (spec.seed, stream) pair. Concurrent callers must use distinct
/// stream indices rather than share a generator.
Image sample_speckle(int height, int width, const NoiseSpec& spec, uint64_t stream = 0);

/// Pointwise product f = u * eta with a freshly sampled speckle field.
/// The result keeps Unit-domain semantics but is stored unclamped; clamping
/// happens only at byte export.
Image apply_speckle(const Image& clean, const NoiseSpec& spec, uint64_t stream = 0);

/// Pointwise product against a caller-supplied noise field (test injection).
Image apply_speckle_field(const Image& clean, const Image& eta);

/// Fills the noisy halves of a PatchSet: patch i gets stream index i.
void speckle_patchset(PatchSet& set, const NoiseSpec& spec);

}  // namespace despeckle
