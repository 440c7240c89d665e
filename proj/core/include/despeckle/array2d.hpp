#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace despeckle {

/// Dense row-major 2D array of doubles. The workhorse type for the PDE and
/// metric kernels; carries no domain semantics (see Image for that).
struct Array2d {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Array2d() = default;
  Array2d(int r, int c, double fill = 0.0) : rows(r), cols(c), data(static_cast<size_t>(r) * c, fill) {}

  double& at(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
  double at(int r, int c) const { return data[static_cast<size_t>(r) * cols + c]; }

  size_t size() const { return data.size(); }
  bool same_shape(const Array2d& other) const { return rows == other.rows && cols == other.cols; }
};

/// Row-major 2D array of complex doubles (DFT spectra).
struct Spectrum {
  int rows = 0;
  int cols = 0;
  std::vector<std::complex<double>> data;

  Spectrum() = default;
  Spectrum(int r, int c) : rows(r), cols(c), data(static_cast<size_t>(r) * c) {}

  std::complex<double>& at(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
  const std::complex<double>& at(int r, int c) const { return data[static_cast<size_t>(r) * cols + c]; }
};

}  // namespace despeckle
