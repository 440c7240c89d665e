#pragma once

#include <string>

#include "despeckle/image.hpp"

namespace despeckle {

/// Reads a binary PGM (P5, maxval 255) in the canonical header form
/// "P5\n<width> <height>\n255\n" followed by width*height payload bytes.
/// The restriction to the canonical form keeps read/write round trips
/// byte-identical. Throws PgmError with a distinct kind per malformation.
Image read_pgm(const std::string& path);

/// Writes a Byte255 image as canonical binary PGM. Pixels are rounded
/// half-up and clamped to [0, 255].
void write_pgm(const Image& img, const std::string& path);

}  // namespace despeckle
