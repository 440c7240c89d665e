#pragma once

#include <cstdint>
#include <vector>

#include "despeckle/image.hpp"

namespace testsupport {

/// Deterministic synthetic grayscale scene with flat regions, sharp edges,
/// a gradient background and a textured patch -- enough structure for
/// training, metric and attack tests. Unit domain, values in [0.05, 0.95].
despeckle::Image synth_scene(int height, int width, uint64_t seed);

std::vector<despeckle::Image> synth_corpus(int count, int height, int width, uint64_t seed0);

}  // namespace testsupport
