#pragma once

#include "despeckle/array2d.hpp"

namespace despeckle {

enum class Boundary { Periodic };

/// Diffusion block parameters: time step tau (grid units h = 1), boundary
/// handling, and the unrolling depth K consumed by the model.
struct DiffusionConfig {
  double tau = 0.1;
  Boundary boundary = Boundary::Periodic;
  int depth_k = 5;
};

/// Per-mode gain of the implicit periodic heat step,
///   m(i,j) = 1 / (-2 tau (cos z_i + cos z_j - 2) + 1),
/// with z_i = 2 pi i / N1, z_j = 2 pi j / N2. m(0,0) == 1 exactly and
/// 0 < m <= 1 for tau >= 0.
Array2d spectral_multiplier(int rows, int cols, double tau);

/// Solves (I - tau Laplacian_per) u = z exactly in the Fourier domain.
/// The imaginary residue of the inverse transform is checked against 1e-9
/// and discarded; a violation throws (it indicates a DFT bug).
Array2d implicit_heat_step(const Array2d& z, double tau);

/// Forward Euler step u + tau * Laplacian_per(u). Subject to the 2D CFL
/// bound tau <= 1/4; with strict=true a larger tau throws.
Array2d explicit_heat_step(const Array2d& u, double tau, bool strict = true);

/// Periodic convolution with the sampled 2D heat kernel
///   Phi(x, t) = exp(-|x|^2 / (4t)) / (4 pi t),
/// periodized onto the grid and renormalized to unit sum. Spatial-domain
/// evaluation, independent of the DFT path; serves as the reference for
/// iterated implicit steps.
Array2d gaussian_convolution_oracle(const Array2d& f, double t);

/// Spectral energy above the cutoff: sum of |F(i,j)|^2 over modes whose
/// principal frequency satisfies max(|z_i|, |z_j|) > cutoff, divided by
/// N1*N2. cutoff must lie in (0, pi).
double high_freq_energy(const Array2d& field, double cutoff);

}  // namespace despeckle
