#include "despeckle/fft.hpp"

#include <cmath>
#include <complex>
#include <vector>

#include "despeckle/error.hpp"

namespace despeckle {

namespace {

using cplx = std::complex<double>;

bool is_pow2(size_t n) { return n != 0 && (n & (n - 1)) == 0; }

size_t next_pow2(size_t n) {
  size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

// In-place iterative radix-2 Cooley-Tukey; n must be a power of two.
// sign = -1 forward, +1 inverse (unnormalized).
void fft_pow2(std::vector<cplx>& a, int sign) {
  const size_t n = a.size();
  if (n <= 1) return;
  // bit-reversal permutation
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (size_t len = 2; len <= n; len <<= 1) {
    double ang = sign * 2.0 * M_PI / static_cast<double>(len);
    cplx wlen(std::cos(ang), std::sin(ang));
    for (size_t i = 0; i < n; i += len) {
      cplx w(1.0, 0.0);
      for (size_t k = 0; k < len / 2; ++k) {
        cplx u = a[i + k];
        cplx v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

// Arbitrary-length DFT via Bluestein's chirp-z algorithm.
void fft_bluestein(std::vector<cplx>& a, int sign) {
  const size_t n = a.size();
  const size_t m = next_pow2(2 * n - 1);
  // chirp[k] = exp(sign * i * pi * k^2 / n)
  std::vector<cplx> chirp(n);
  for (size_t k = 0; k < n; ++k) {
    // k^2 mod 2n keeps the argument small for large n
    size_t k2 = (k * k) % (2 * n);
    double ang = sign * M_PI * static_cast<double>(k2) / static_cast<double>(n);
    chirp[k] = cplx(std::cos(ang), std::sin(ang));
  }
  std::vector<cplx> x(m, cplx(0.0, 0.0)), y(m, cplx(0.0, 0.0));
  for (size_t k = 0; k < n; ++k) x[k] = a[k] * chirp[k];
  y[0] = std::conj(chirp[0]);
  for (size_t k = 1; k < n; ++k) y[k] = y[m - k] = std::conj(chirp[k]);
  fft_pow2(x, -1);
  fft_pow2(y, -1);
  for (size_t k = 0; k < m; ++k) x[k] *= y[k];
  fft_pow2(x, +1);
  const double inv_m = 1.0 / static_cast<double>(m);
  for (size_t k = 0; k < n; ++k) a[k] = x[k] * inv_m * chirp[k];
}

void fft_1d(std::vector<cplx>& a, int sign) {
  if (is_pow2(a.size()))
    fft_pow2(a, sign);
  else
    fft_bluestein(a, sign);
}

// Row-column 2D transform; sign = -1 forward, +1 inverse (unnormalized).
Spectrum transform2(const Spectrum& in, int sign) {
  const int rows = in.rows, cols = in.cols;
  Spectrum out = in;
  std::vector<cplx> line(static_cast<size_t>(cols));
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) line[c] = out.at(r, c);
    fft_1d(line, sign);
    for (int c = 0; c < cols; ++c) out.at(r, c) = line[c];
  }
  line.assign(static_cast<size_t>(rows), cplx());
  for (int c = 0; c < cols; ++c) {
    for (int r = 0; r < rows; ++r) line[r] = out.at(r, c);
    fft_1d(line, sign);
    for (int r = 0; r < rows; ++r) out.at(r, c) = line[r];
  }
  return out;
}

}  // namespace

Spectrum dft2(const Spectrum& field) {
  if (field.rows < 1 || field.cols < 1) throw Error("dft2: empty array");
  return transform2(field, -1);
}

Spectrum dft2(const Array2d& field) {
  if (field.rows < 1 || field.cols < 1) throw Error("dft2: empty array");
  Spectrum s(field.rows, field.cols);
  for (size_t i = 0; i < field.data.size(); ++i) s.data[i] = cplx(field.data[i], 0.0);
  return transform2(s, -1);
}

Spectrum idft2(const Spectrum& spectrum) {
  if (spectrum.rows < 1 || spectrum.cols < 1) throw Error("idft2: empty array");
  Spectrum out = transform2(spectrum, +1);
  const double norm = 1.0 / (static_cast<double>(spectrum.rows) * static_cast<double>(spectrum.cols));
  for (auto& v : out.data) v *= norm;
  return out;
}

}  // namespace despeckle
