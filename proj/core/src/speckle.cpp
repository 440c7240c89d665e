#include "despeckle/speckle.hpp"

#include <cmath>

#include "despeckle/error.hpp"
#include "despeckle/rng.hpp"

namespace despeckle {

double digamma(double x) {
  if (!(x > 0.0)) throw Error("digamma defined here for x > 0 only");
  double acc = 0.0;
  while (x < 10.0) {
    acc -= 1.0 / x;
    x += 1.0;
  }
  // Asymptotic series: ln x - 1/(2x) - sum_k B_{2k} / (2k x^{2k})
  double inv = 1.0 / x;
  double inv2 = inv * inv;
  double series = std::log(x) - 0.5 * inv -
                  inv2 * (1.0 / 12.0 - inv2 * (1.0 / 120.0 - inv2 * (1.0 / 252.0 - inv2 * (1.0 / 240.0 - inv2 * (1.0 / 132.0)))));
  return acc + series;
}

double log_speckle_bias(int looks) {
  if (looks < 1) throw Error("log_speckle_bias: looks must be >= 1");
  return digamma(static_cast<double>(looks)) - std::log(static_cast<double>(looks));
}

Image sample_speckle(int height, int width, const NoiseSpec& spec, uint64_t stream) {
  if (height < 1 || width < 1) throw Error("sample_speckle: dimensions must be positive");
  if (spec.looks < 1) throw Error("sample_speckle: looks must be >= 1");
  Image eta(height, width, Domain::Unit);
  Rng rng(spec.seed, stream);
  const double shape = static_cast<double>(spec.looks);
  const double scale = 1.0 / shape;
  for (double& p : eta.pixels) p = rng.gamma(shape) * scale;
  return eta;
}

Image apply_speckle(const Image& clean, const NoiseSpec& spec, uint64_t stream) {
  if (clean.domain != Domain::Unit) throw DomainError("apply_speckle expects a Unit image");
  return apply_speckle_field(clean, sample_speckle(clean.height, clean.width, spec, stream));
}

Image apply_speckle_field(const Image& clean, const Image& eta) {
  if (clean.domain != Domain::Unit) throw DomainError("apply_speckle_field expects a Unit image");
  if (!clean.same_shape(eta)) throw Error("apply_speckle_field: shape mismatch");
  Image noisy = clean;
  for (size_t i = 0; i < noisy.size(); ++i) noisy.pixels[i] *= eta.pixels[i];
  return noisy;
}

void speckle_patchset(PatchSet& set, const NoiseSpec& spec) {
  for (size_t i = 0; i < set.patches.size(); ++i)
    set.patches[i].second = apply_speckle(set.patches[i].first, spec, i);
}

}  // namespace despeckle
