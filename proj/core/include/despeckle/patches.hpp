#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "despeckle/image.hpp"

namespace despeckle {

/// Training pairs sampled from a corpus; clean and noisy halves are the same
/// size and both Unit-domain. extract_patches fills only the clean halves;
/// speckle_patchset completes the noisy halves.
struct PatchSet {
  std::vector<std::pair<Image, Image>> patches;  // (clean, noisy)
  int patch_size = 0;
  uint64_t seed = 0;
};

/// One of the 8 dihedral transforms: t in [0, 8), t % 4 counterclockwise
/// quarter turns, t >= 4 additionally flips horizontally first.
Image apply_dihedral(const Image& img, int t);

/// Draws `count` square patches of side `patch_size` by seeded uniform choice
/// of image index and top-left corner, then applies a seeded dihedral
/// transform to each. Pure function of (images, patch_size, count, seed).
///
/// RNG consumption per patch, in order: image index, row offset, column
/// offset, transform index (four `below` draws from Rng(seed)).
PatchSet extract_patches(const std::vector<Image>& images, int patch_size, int count, uint64_t seed);

}  // namespace despeckle
