#pragma once

#include "despeckle/image.hpp"

namespace despeckle {

/// Flat record of everything the evaluation commands emit. PSNR and ENL use
/// a +inf sentinel for their degenerate cases (identical pair, constant
/// region); those arise legitimately in tests.
struct MetricsReport {
  double psnr = 0.0;
  double ssim = 0.0;
  double enl = 0.0;
  double cx = 0.0;
  double epd_roa_hd = 0.0;
  double epd_roa_vd = 0.0;
};

/// 10 log10(I*J*255^2 / ||yhat - y||^2) on Byte255 images; +inf when equal.
double psnr(const Image& y, const Image& yhat);

struct SsimConfig {
  int window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
};

/// Mean structural similarity over all fully interior (valid) windows of a
/// Gaussian 11x11, sigma 1.5 weighting, c1=(k1*255)^2, c2=(k2*255)^2.
double ssim(const Image& y, const Image& yhat, const SsimConfig& cfg = {});

/// Equivalent number of looks mean^2/variance (population variance) on the
/// [1,256]-shifted gray range; +inf for a constant region.
double enl(const Image& region);

/// Coefficient of variation std/mean on the [1,256]-shifted range.
double cx(const Image& region);

enum class EpdDirection { Horizontal, Vertical };

/// Edge preservation via ratio of averages: sum of |a/b| over adjacent pixel
/// pairs along the direction in the denoised image divided by the same sum
/// in the noisy image, both shifted to [1,256] first.
double epd_roa(const Image& noisy, const Image& denoised, EpdDirection direction);

}  // namespace despeckle
