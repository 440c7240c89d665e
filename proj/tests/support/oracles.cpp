#include "oracles.hpp"

#include <cmath>
#include <stdexcept>
#include <algorithm>
#include <limits>

#include "despeckle/rng.hpp"

namespace testsupport {

using despeckle::Array2d;
using despeckle::Image;
using despeckle::Rng;
using despeckle::Spectrum;

Spectrum naive_dft2(const Array2d& x) {
  const int n1 = x.rows, n2 = x.cols;
  Spectrum out(n1, n2);
  for (int k1 = 0; k1 < n1; ++k1) {
    for (int k2 = 0; k2 < n2; ++k2) {
      std::complex<double> acc(0.0, 0.0);
      for (int a = 0; a < n1; ++a) {
        for (int b = 0; b < n2; ++b) {
          const double ang = -2.0 * M_PI * (static_cast<double>(k1) * a / n1 + static_cast<double>(k2) * b / n2);
          acc += x.at(a, b) * std::complex<double>(std::cos(ang), std::sin(ang));
        }
      }
      out.at(k1, k2) = acc;
    }
  }
  return out;
}

Array2d dense_implicit_solve(const Array2d& z, double tau) {
  const int h = z.rows, w = z.cols;
  const int n = h * w;
  // A = I - tau * L_per
  std::vector<double> a(static_cast<size_t>(n) * n, 0.0);
  auto idx = [w](int r, int c) { return r * w + c; };
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const int i = idx(r, c);
      a[static_cast<size_t>(i) * n + i] += 1.0 + 4.0 * tau;
      const int nb[4] = {idx((r + h - 1) % h, c), idx((r + 1) % h, c), idx(r, (c + w - 1) % w),
                         idx(r, (c + 1) % w)};
      for (int k = 0; k < 4; ++k) a[static_cast<size_t>(i) * n + nb[k]] -= tau;
    }
  }
  std::vector<double> b = z.data;

  // Gaussian elimination with partial pivoting
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(a[static_cast<size_t>(r) * n + col]) > std::abs(a[static_cast<size_t>(piv) * n + col])) piv = r;
    if (piv != col) {
      for (int c = 0; c < n; ++c) std::swap(a[static_cast<size_t>(col) * n + c], a[static_cast<size_t>(piv) * n + c]);
      std::swap(b[static_cast<size_t>(col)], b[static_cast<size_t>(piv)]);
    }
    const double d = a[static_cast<size_t>(col) * n + col];
    if (d == 0.0) throw std::runtime_error("dense_implicit_solve: singular matrix");
    for (int r = col + 1; r < n; ++r) {
      const double f = a[static_cast<size_t>(r) * n + col] / d;
      if (f == 0.0) continue;
      for (int c = col; c < n; ++c) a[static_cast<size_t>(r) * n + c] -= f * a[static_cast<size_t>(col) * n + c];
      b[static_cast<size_t>(r)] -= f * b[static_cast<size_t>(col)];
    }
  }
  Array2d u(h, w);
  for (int r = n - 1; r >= 0; --r) {
    double acc = b[static_cast<size_t>(r)];
    for (int c = r + 1; c < n; ++c) acc -= a[static_cast<size_t>(r) * n + c] * u.data[static_cast<size_t>(c)];
    u.data[static_cast<size_t>(r)] = acc / a[static_cast<size_t>(r) * n + r];
  }
  return u;
}

double naive_ssim(const Image& y, const Image& yhat) {
  const int win = 11;
  const double sigma = 1.5;
  double w2d[11][11];
  double wsum = 0.0;
  for (int i = 0; i < win; ++i) {
    for (int j = 0; j < win; ++j) {
      const double di = i - 5.0, dj = j - 5.0;
      w2d[i][j] = std::exp(-(di * di + dj * dj) / (2.0 * sigma * sigma));
      wsum += w2d[i][j];
    }
  }
  for (int i = 0; i < win; ++i)
    for (int j = 0; j < win; ++j) w2d[i][j] /= wsum;

  const double c1 = (0.01 * 255) * (0.01 * 255);
  const double c2 = (0.03 * 255) * (0.03 * 255);
  double acc = 0.0;
  int count = 0;
  for (int r0 = 0; r0 + win <= y.height; ++r0) {
    for (int c0 = 0; c0 + win <= y.width; ++c0) {
      double m1 = 0, m2 = 0, e11 = 0, e22 = 0, e12 = 0;
      for (int i = 0; i < win; ++i) {
        for (int j = 0; j < win; ++j) {
          const double a = y.at(r0 + i, c0 + j);
          const double b = yhat.at(r0 + i, c0 + j);
          m1 += w2d[i][j] * a;
          m2 += w2d[i][j] * b;
          e11 += w2d[i][j] * a * a;
          e22 += w2d[i][j] * b * b;
          e12 += w2d[i][j] * a * b;
        }
      }
      const double v1 = e11 - m1 * m1, v2 = e22 - m2 * m2, cov = e12 - m1 * m2;
      acc += ((2 * m1 * m2 + c1) * (2 * cov + c2)) / ((m1 * m1 + m2 * m2 + c1) * (v1 + v2 + c2));
      ++count;
    }
  }
  return acc / count;
}

double naive_psnr(const Image& y, const Image& yhat) {
  double err = 0.0;
  for (int r = 0; r < y.height; ++r)
    for (int c = 0; c < y.width; ++c) {
      const double d = yhat.at(r, c) - y.at(r, c);
      err += d * d;
    }
  if (err == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(static_cast<double>(y.height) * y.width * 255.0 * 255.0 / err);
}

double naive_enl(const Image& region) {
  double mean = 0.0;
  for (double v : region.pixels) mean += v + 1.0;
  mean /= static_cast<double>(region.size());
  double var = 0.0;
  for (double v : region.pixels) var += ((v + 1.0) - mean) * ((v + 1.0) - mean);
  var /= static_cast<double>(region.size());
  if (var == 0.0) return std::numeric_limits<double>::infinity();
  return mean * mean / var;
}

double naive_cx(const Image& region) {
  double mean = 0.0;
  for (double v : region.pixels) mean += v + 1.0;
  mean /= static_cast<double>(region.size());
  double var = 0.0;
  for (double v : region.pixels) var += ((v + 1.0) - mean) * ((v + 1.0) - mean);
  var /= static_cast<double>(region.size());
  return std::sqrt(var) / mean;
}

double naive_epd_roa(const Image& noisy, const Image& denoised, bool horizontal) {
  auto sum = [&](const Image& img) {
    double acc = 0.0;
    if (horizontal) {
      for (int r = 0; r < img.height; ++r)
        for (int c = 0; c + 1 < img.width; ++c)
          acc += std::abs((img.at(r, c) + 1.0) / (img.at(r, c + 1) + 1.0));
    } else {
      for (int r = 0; r + 1 < img.height; ++r)
        for (int c = 0; c < img.width; ++c)
          acc += std::abs((img.at(r, c) + 1.0) / (img.at(r + 1, c) + 1.0));
    }
    return acc;
  };
  return sum(denoised) / sum(noisy);
}

Array2d band_limited_field(int rows, int cols, double band, uint64_t seed) {
  Rng rng(seed);
  Array2d out(rows, cols, 0.0);
  const int pmax = static_cast<int>(std::floor(band * rows / (2.0 * M_PI)));
  const int qmax = static_cast<int>(std::floor(band * cols / (2.0 * M_PI)));
  for (int p = -pmax; p <= pmax; ++p) {
    for (int q = -qmax; q <= qmax; ++q) {
      const double zi = 2.0 * M_PI * p / rows;
      const double zj = 2.0 * M_PI * q / cols;
      if (zi * zi + zj * zj > band * band) continue;
      const double amp = rng.normal() * 0.3;
      const double phase = 2.0 * M_PI * rng.uniform();
      for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
          out.at(r, c) += amp * std::cos(zi * r + zj * c + phase);
    }
  }
  return out;
}

Array2d random_field(int rows, int cols, uint64_t seed, double scale) {
  Rng rng(seed);
  Array2d out(rows, cols);
  for (double& v : out.data) v = scale * rng.normal();
  return out;
}

void remove_mean(Array2d& a) {
  double mean = 0.0;
  for (double v : a.data) mean += v;
  mean /= static_cast<double>(a.data.size());
  for (double& v : a.data) v -= mean;
}

double l2_norm(const Array2d& a) {
  double acc = 0.0;
  for (double v : a.data) acc += v * v;
  return std::sqrt(acc);
}

double l2_diff(const Array2d& a, const Array2d& b) {
  double acc = 0.0;
  for (size_t i = 0; i < a.data.size(); ++i) {
    const double d = a.data[i] - b.data[i];
    acc += d * d;
  }
  return std::sqrt(acc);
}

double max_abs_diff(const Array2d& a, const Array2d& b) {
  double m = 0.0;
  for (size_t i = 0; i < a.data.size(); ++i) m = std::max(m, std::abs(a.data[i] - b.data[i]));
  return m;
}

}  // namespace testsupport
