#pragma once

#include "despeckle/array2d.hpp"

namespace despeckle {

/// Unnormalized forward 2D DFT:
///   F(k1,k2) = sum_{n1,n2} x(n1,n2) exp(-2 pi i (k1 n1 / N1 + k2 n2 / N2))
/// Arbitrary sizes are supported (radix-2 for powers of two, Bluestein
/// otherwise). Throws on empty input.
Spectrum dft2(const Array2d& field);
Spectrum dft2(const Spectrum& field);

/// Inverse of dft2 including the 1/(N1*N2) normalization, so that
/// idft2(dft2(x)) == x to within 1e-10 relative max error.
Spectrum idft2(const Spectrum& spectrum);

}  // namespace despeckle
