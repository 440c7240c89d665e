#pragma once

// Independent reference implementations used to freeze expected values.
// Everything here is deliberately naive (double loops, dense solves) and
// shares no code with the library paths it checks.

#include <complex>
#include <cstdint>
#include <vector>

#include "despeckle/array2d.hpp"
#include "despeckle/image.hpp"

namespace testsupport {

/// O(N^2 M^2) textbook DFT.
despeckle::Spectrum naive_dft2(const despeckle::Array2d& x);

/// Dense direct solve of (I - tau L_per) u = z with the periodic 5-point
/// Laplacian assembled as a matrix, via Gaussian elimination with partial
/// pivoting.
despeckle::Array2d dense_implicit_solve(const despeckle::Array2d& z, double tau);

/// Literal per-window SSIM (Gaussian 11x11 sigma 1.5, valid windows only).
double naive_ssim(const despeckle::Image& y, const despeckle::Image& yhat);

double naive_psnr(const despeckle::Image& y, const despeckle::Image& yhat);
double naive_enl(const despeckle::Image& region);
double naive_cx(const despeckle::Image& region);
double naive_epd_roa(const despeckle::Image& noisy, const despeckle::Image& denoised, bool horizontal);

/// Random field whose spectrum is supported on |z| <= band (radial), built
/// from explicit cosines, so it is independent of any DFT implementation.
despeckle::Array2d band_limited_field(int rows, int cols, double band, uint64_t seed);

despeckle::Array2d random_field(int rows, int cols, uint64_t seed, double scale = 1.0);

/// Subtracts the mean.
void remove_mean(despeckle::Array2d& a);

double l2_norm(const despeckle::Array2d& a);
double l2_diff(const despeckle::Array2d& a, const despeckle::Array2d& b);
double max_abs_diff(const despeckle::Array2d& a, const despeckle::Array2d& b);

}  // namespace testsupport
