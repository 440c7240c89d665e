#include "despeckle/metrics.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "despeckle/error.hpp"

namespace despeckle {

namespace {

void require_byte(const Image& img, const char* who) {
  if (img.domain != Domain::Byte255) throw DomainError(std::string(who) + " expects Byte255 images");
}

// Valid-region separable convolution with a 1D window along rows then
// columns; output is (H-n+1) x (W-n+1).
std::vector<double> gauss_filter_valid(const std::vector<double>& in, int h, int w,
                                       const std::vector<double>& win) {
  const int n = static_cast<int>(win.size());
  const int wo = w - n + 1;
  const int ho = h - n + 1;
  std::vector<double> rows(static_cast<size_t>(h) * wo);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < wo; ++c) {
      double acc = 0.0;
      for (int k = 0; k < n; ++k) acc += win[k] * in[static_cast<size_t>(r) * w + c + k];
      rows[static_cast<size_t>(r) * wo + c] = acc;
    }
  }
  std::vector<double> out(static_cast<size_t>(ho) * wo);
  for (int r = 0; r < ho; ++r) {
    for (int c = 0; c < wo; ++c) {
      double acc = 0.0;
      for (int k = 0; k < n; ++k) acc += win[k] * rows[static_cast<size_t>(r + k) * wo + c];
      out[static_cast<size_t>(r) * wo + c] = acc;
    }
  }
  return out;
}

void mean_var(const Image& region, double& mean, double& var) {
  if (region.size() == 0) throw Error("metrics: empty region");
  double sum = 0.0;
  for (double v : region.pixels) sum += v + 1.0;  // [0,255] -> [1,256]
  mean = sum / static_cast<double>(region.size());
  double sq = 0.0;
  for (double v : region.pixels) {
    double d = (v + 1.0) - mean;
    sq += d * d;
  }
  var = sq / static_cast<double>(region.size());
}

}  // namespace

double psnr(const Image& y, const Image& yhat) {
  require_byte(y, "psnr");
  require_byte(yhat, "psnr");
  if (!y.same_shape(yhat)) throw Error("psnr: dimension mismatch");
  double err = 0.0;
  for (size_t i = 0; i < y.size(); ++i) {
    double d = yhat.pixels[i] - y.pixels[i];
    err += d * d;
  }
  if (err == 0.0) return std::numeric_limits<double>::infinity();
  const double num = static_cast<double>(y.height) * y.width * 255.0 * 255.0;
  return 10.0 * std::log10(num / err);
}

double ssim(const Image& y, const Image& yhat, const SsimConfig& cfg) {
  require_byte(y, "ssim");
  require_byte(yhat, "ssim");
  if (!y.same_shape(yhat)) throw Error("ssim: dimension mismatch");
  if (y.height < cfg.window || y.width < cfg.window) throw Error("ssim: image smaller than the window");

  std::vector<double> win(static_cast<size_t>(cfg.window));
  const double half = (cfg.window - 1) / 2.0;
  double wsum = 0.0;
  for (int i = 0; i < cfg.window; ++i) {
    win[i] = std::exp(-((i - half) * (i - half)) / (2.0 * cfg.sigma * cfg.sigma));
    wsum += win[i];
  }
  for (double& v : win) v /= wsum;

  const size_t npix = y.size();
  std::vector<double> xy(npix), xx(npix), yy(npix);
  for (size_t i = 0; i < npix; ++i) {
    xy[i] = y.pixels[i] * yhat.pixels[i];
    xx[i] = y.pixels[i] * y.pixels[i];
    yy[i] = yhat.pixels[i] * yhat.pixels[i];
  }
  auto mu1 = gauss_filter_valid(y.pixels, y.height, y.width, win);
  auto mu2 = gauss_filter_valid(yhat.pixels, y.height, y.width, win);
  auto e11 = gauss_filter_valid(xx, y.height, y.width, win);
  auto e22 = gauss_filter_valid(yy, y.height, y.width, win);
  auto e12 = gauss_filter_valid(xy, y.height, y.width, win);

  const double c1 = (cfg.k1 * 255.0) * (cfg.k1 * 255.0);
  const double c2 = (cfg.k2 * 255.0) * (cfg.k2 * 255.0);
  double acc = 0.0;
  for (size_t i = 0; i < mu1.size(); ++i) {
    const double m1 = mu1[i], m2 = mu2[i];
    const double v1 = e11[i] - m1 * m1;
    const double v2 = e22[i] - m2 * m2;
    const double cov = e12[i] - m1 * m2;
    acc += ((2.0 * m1 * m2 + c1) * (2.0 * cov + c2)) / ((m1 * m1 + m2 * m2 + c1) * (v1 + v2 + c2));
  }
  return acc / static_cast<double>(mu1.size());
}

double enl(const Image& region) {
  double mean, var;
  mean_var(region, mean, var);
  if (var == 0.0) return std::numeric_limits<double>::infinity();
  return mean * mean / var;
}

double cx(const Image& region) {
  double mean, var;
  mean_var(region, mean, var);
  return std::sqrt(var) / mean;
}

double epd_roa(const Image& noisy, const Image& denoised, EpdDirection direction) {
  if (!noisy.same_shape(denoised)) throw Error("epd_roa: dimension mismatch");
  const int h = noisy.height, w = noisy.width;
  if ((direction == EpdDirection::Horizontal && w < 2) || (direction == EpdDirection::Vertical && h < 2))
    throw Error("epd_roa: image too small for adjacent pairs");

  auto ratio_sum = [&](const Image& img) {
    double acc = 0.0;
    if (direction == EpdDirection::Horizontal) {
      for (int r = 0; r < h; ++r)
        for (int c = 0; c + 1 < w; ++c) acc += std::abs((img.at(r, c) + 1.0) / (img.at(r, c + 1) + 1.0));
    } else {
      for (int r = 0; r + 1 < h; ++r)
        for (int c = 0; c < w; ++c) acc += std::abs((img.at(r, c) + 1.0) / (img.at(r + 1, c) + 1.0));
    }
    return acc;
  };
  return ratio_sum(denoised) / ratio_sum(noisy);
}

}  // namespace despeckle
