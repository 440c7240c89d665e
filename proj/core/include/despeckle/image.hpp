#pragma once

#include <vector>

#include "despeckle/array2d.hpp"

namespace despeckle {

/// Value range an Image lives in.
///   Byte255  values in [0, 255]
///   Unit     values in [0, 1] (speckled images may exceed 1 until byte export)
///   Log      any finite values (log-domain working images)
enum class Domain { Byte255, Unit, Log };

/// Grayscale image: row-major doubles plus an explicit domain tag.
struct Image {
  int height = 0;
  int width = 0;
  Domain domain = Domain::Unit;
  std::vector<double> pixels;

  Image() = default;
  Image(int h, int w, Domain d, double fill = 0.0)
      : height(h), width(w), domain(d), pixels(static_cast<size_t>(h) * w, fill) {}

  double& at(int r, int c) { return pixels[static_cast<size_t>(r) * width + c]; }
  double at(int r, int c) const { return pixels[static_cast<size_t>(r) * width + c]; }

  size_t size() const { return pixels.size(); }
  bool same_shape(const Image& other) const { return height == other.height && width == other.width; }
};

constexpr double kLogFloor = 1.0 / 255.0;

/// Byte255 -> Unit (divide by 255).
Image to_unit(const Image& img);

/// Unit -> Byte255 (multiply by 255, clamp to [0, 255]; no rounding here --
/// rounding happens at PGM export).
Image to_byte(const Image& img);

/// Unit -> Log: p -> ln(max(p, floor)).
Image log_transform(const Image& img, double floor = kLogFloor);

/// Log -> Unit: q -> exp(q) clamped to [0, 1].
Image exp_transform(const Image& img);

/// View helpers between Image and the plain math array type.
Array2d to_array(const Image& img);
Image from_array(const Array2d& a, Domain domain);

}  // namespace despeckle
