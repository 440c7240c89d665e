#include "despeckle/patches.hpp"

#include <string>

#include "despeckle/error.hpp"
#include "despeckle/rng.hpp"

namespace despeckle {

Image apply_dihedral(const Image& img, int t) {
  if (t < 0 || t >= 8) throw Error("apply_dihedral: transform index must be in [0, 8)");
  Image src = img;
  if (t >= 4) {  // horizontal flip (mirror columns)
    Image flipped(src.height, src.width, src.domain);
    for (int r = 0; r < src.height; ++r)
      for (int c = 0; c < src.width; ++c) flipped.at(r, c) = src.at(r, src.width - 1 - c);
    src = std::move(flipped);
  }
  int quarter = t % 4;
  for (int q = 0; q < quarter; ++q) {
    // one counterclockwise quarter turn: (r, c) <- src(c, W-1-r)
    Image rot(src.width, src.height, src.domain);
    for (int r = 0; r < rot.height; ++r)
      for (int c = 0; c < rot.width; ++c) rot.at(r, c) = src.at(c, src.width - 1 - r);
    src = std::move(rot);
  }
  return src;
}

PatchSet extract_patches(const std::vector<Image>& images, int patch_size, int count, uint64_t seed) {
  if (patch_size < 1) throw Error("extract_patches: patch_size must be positive");
  if (count < 0) throw Error("extract_patches: count must be nonnegative");
  for (size_t i = 0; i < images.size(); ++i) {
    if (images[i].height < patch_size || images[i].width < patch_size)
      throw Error("extract_patches: image " + std::to_string(i) + " is smaller than patch_size");
    if (images[i].domain != Domain::Unit)
      throw DomainError("extract_patches expects Unit-domain images");
  }
  if (count > 0 && images.empty()) throw Error("extract_patches: no source images");

  PatchSet set;
  set.patch_size = patch_size;
  set.seed = seed;
  set.patches.reserve(static_cast<size_t>(count));

  Rng rng(seed);
  for (int n = 0; n < count; ++n) {
    const Image& src = images[rng.below(images.size())];
    int r0 = static_cast<int>(rng.below(static_cast<uint64_t>(src.height - patch_size + 1)));
    int c0 = static_cast<int>(rng.below(static_cast<uint64_t>(src.width - patch_size + 1)));
    Image patch(patch_size, patch_size, Domain::Unit);
    for (int r = 0; r < patch_size; ++r)
      for (int c = 0; c < patch_size; ++c) patch.at(r, c) = src.at(r0 + r, c0 + c);
    int t = static_cast<int>(rng.below(8));
    set.patches.emplace_back(apply_dihedral(patch, t), Image{});
  }
  return set;
}

}  // namespace despeckle
