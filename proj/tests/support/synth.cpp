#include "synth.hpp"

#include <algorithm>
#include <cmath>

#include "despeckle/rng.hpp"

namespace testsupport {

using despeckle::Domain;
using despeckle::Image;
using despeckle::Rng;

Image synth_scene(int height, int width, uint64_t seed) {
  Rng rng(seed);
  Image img(height, width, Domain::Unit);

  // gradient background
  const double gx = 0.15 + 0.25 * rng.uniform();
  const double gy = 0.15 + 0.25 * rng.uniform();
  const double base = 0.25 + 0.3 * rng.uniform();
  for (int r = 0; r < height; ++r)
    for (int c = 0; c < width; ++c)
      img.at(r, c) = base + gx * c / width + gy * r / height;

  // flat rectangles with sharp edges
  const int nrect = 3 + static_cast<int>(rng.below(3));
  for (int k = 0; k < nrect; ++k) {
    const int r0 = static_cast<int>(rng.below(static_cast<uint64_t>(height)));
    const int c0 = static_cast<int>(rng.below(static_cast<uint64_t>(width)));
    const int rh = 2 + static_cast<int>(rng.below(static_cast<uint64_t>(std::max(2, height / 3))));
    const int cw = 2 + static_cast<int>(rng.below(static_cast<uint64_t>(std::max(2, width / 3))));
    const double v = 0.1 + 0.8 * rng.uniform();
    for (int r = r0; r < std::min(height, r0 + rh); ++r)
      for (int c = c0; c < std::min(width, c0 + cw); ++c) img.at(r, c) = v;
  }

  // one disk
  const double cr = static_cast<double>(rng.below(static_cast<uint64_t>(height)));
  const double cc = static_cast<double>(rng.below(static_cast<uint64_t>(width)));
  const double rad = 2.0 + 0.2 * std::min(height, width) * rng.uniform();
  const double dv = 0.1 + 0.8 * rng.uniform();
  for (int r = 0; r < height; ++r)
    for (int c = 0; c < width; ++c)
      if ((r - cr) * (r - cr) + (c - cc) * (c - cc) <= rad * rad) img.at(r, c) = dv;

  // low-frequency texture band
  const double fr = 2.0 + 4.0 * rng.uniform();
  const double fc = 2.0 + 4.0 * rng.uniform();
  const int band_top = static_cast<int>(rng.below(static_cast<uint64_t>(std::max(1, height / 2))));
  for (int r = band_top; r < std::min(height, band_top + height / 4 + 2); ++r)
    for (int c = 0; c < width; ++c)
      img.at(r, c) += 0.08 * std::sin(2.0 * M_PI * fr * r / height) * std::cos(2.0 * M_PI * fc * c / width);

  for (double& v : img.pixels) v = std::clamp(v, 0.05, 0.95);
  return img;
}

std::vector<Image> synth_corpus(int count, int height, int width, uint64_t seed0) {
  std::vector<Image> out;
  out.reserve(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i) out.push_back(synth_scene(height, width, seed0 + static_cast<uint64_t>(i)));
  return out;
}

}  // namespace testsupport
