#include "despeckle/spectral.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "despeckle/error.hpp"
#include "despeckle/fft.hpp"

namespace despeckle {

namespace {

void require_finite(const Array2d& a, const char* who) {
  for (double v : a.data)
    if (!std::isfinite(v)) throw Error(std::string(who) + ": non-finite input");
}

// Principal angular frequency of index i on an N-point grid, in [0, pi].
double principal_freq(int i, int n) {
  int k = std::min(i, n - i);
  return 2.0 * M_PI * static_cast<double>(k) / static_cast<double>(n);
}

}  // namespace

Array2d spectral_multiplier(int rows, int cols, double tau) {
  if (rows < 1 || cols < 1) throw Error("spectral_multiplier: empty grid");
  if (tau < 0.0) throw Error("spectral_multiplier: tau must be nonnegative");
  Array2d m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    double zi = 2.0 * M_PI * static_cast<double>(i) / static_cast<double>(rows);
    for (int j = 0; j < cols; ++j) {
      double zj = 2.0 * M_PI * static_cast<double>(j) / static_cast<double>(cols);
      m.at(i, j) = 1.0 / (-2.0 * tau * (std::cos(zi) + std::cos(zj) - 2.0) + 1.0);
    }
  }
  return m;
}

Array2d implicit_heat_step(const Array2d& z, double tau) {
  if (z.rows < 1 || z.cols < 1) throw Error("implicit_heat_step: empty grid");
  if (tau < 0.0) throw Error("implicit_heat_step: tau must be nonnegative");
  require_finite(z, "implicit_heat_step");

  Spectrum f = dft2(z);
  Array2d m = spectral_multiplier(z.rows, z.cols, tau);
  for (size_t i = 0; i < f.data.size(); ++i) f.data[i] *= m.data[i];
  Spectrum back = idft2(f);

  Array2d out(z.rows, z.cols);
  double max_imag = 0.0;
  for (size_t i = 0; i < back.data.size(); ++i) {
    max_imag = std::max(max_imag, std::abs(back.data[i].imag()));
    out.data[i] = back.data[i].real();
  }
  if (max_imag >= 1e-9)
    throw Error("implicit_heat_step: imaginary residue " + std::to_string(max_imag) + " exceeds 1e-9");
  return out;
}

Array2d explicit_heat_step(const Array2d& u, double tau, bool strict) {
  if (u.rows < 1 || u.cols < 1) throw Error("explicit_heat_step: empty grid");
  if (tau < 0.0) throw Error("explicit_heat_step: tau must be nonnegative");
  if (strict && tau > 0.25) throw Error("explicit_heat_step: tau exceeds the 2D CFL bound 1/4");
  require_finite(u, "explicit_heat_step");

  const int h = u.rows, w = u.cols;
  Array2d out(h, w);
  for (int r = 0; r < h; ++r) {
    int rm = (r == 0) ? h - 1 : r - 1;
    int rp = (r == h - 1) ? 0 : r + 1;
    for (int c = 0; c < w; ++c) {
      int cm = (c == 0) ? w - 1 : c - 1;
      int cp = (c == w - 1) ? 0 : c + 1;
      double lap = u.at(rm, c) + u.at(rp, c) + u.at(r, cm) + u.at(r, cp) - 4.0 * u.at(r, c);
      out.at(r, c) = u.at(r, c) + tau * lap;
    }
  }
  return out;
}

Array2d gaussian_convolution_oracle(const Array2d& f, double t) {
  if (!(t > 0.0)) throw Error("gaussian_convolution_oracle: t must be positive");
  if (f.rows < 1 || f.cols < 1) throw Error("gaussian_convolution_oracle: empty grid");

  const int h = f.rows, w = f.cols;
  // Periodize the sampled kernel: fold exp(-|x|^2/4t) tails over +-1 period
  // in each direction (further periods are negligible for the t used here).
  Array2d kernel(h, w, 0.0);
  double sum = 0.0;
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      double acc = 0.0;
      for (int pr = -1; pr <= 1; ++pr) {
        for (int pc = -1; pc <= 1; ++pc) {
          double dr = static_cast<double>(r + pr * h);
          double dc = static_cast<double>(c + pc * w);
          acc += std::exp(-(dr * dr + dc * dc) / (4.0 * t));
        }
      }
      kernel.at(r, c) = acc;
      sum += acc;
    }
  }
  for (double& v : kernel.data) v /= sum;

  // direct periodic convolution
  Array2d out(h, w);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      double acc = 0.0;
      for (int kr = 0; kr < h; ++kr) {
        int sr = r - kr;
        sr = ((sr % h) + h) % h;
        for (int kc = 0; kc < w; ++kc) {
          int sc = c - kc;
          sc = ((sc % w) + w) % w;
          acc += kernel.at(kr, kc) * f.at(sr, sc);
        }
      }
      out.at(r, c) = acc;
    }
  }
  return out;
}

double high_freq_energy(const Array2d& field, double cutoff) {
  if (!(cutoff > 0.0 && cutoff < M_PI)) throw Error("high_freq_energy: cutoff must lie in (0, pi)");
  require_finite(field, "high_freq_energy");
  Spectrum f = dft2(field);
  double energy = 0.0;
  for (int i = 0; i < f.rows; ++i) {
    double zi = principal_freq(i, f.rows);
    for (int j = 0; j < f.cols; ++j) {
      double zj = principal_freq(j, f.cols);
      if (std::max(zi, zj) > cutoff) energy += std::norm(f.at(i, j));
    }
  }
  return energy / (static_cast<double>(f.rows) * static_cast<double>(f.cols));
}

}  // namespace despeckle
