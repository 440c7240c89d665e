#include "despeckle/image.hpp"

#include <algorithm>
#include <cmath>

#include "despeckle/error.hpp"

namespace despeckle {

Image to_unit(const Image& img) {
  if (img.domain != Domain::Byte255) throw DomainError("to_unit expects a Byte255 image");
  Image out = img;
  out.domain = Domain::Unit;
  for (double& p : out.pixels) p /= 255.0;
  return out;
}

Image to_byte(const Image& img) {
  if (img.domain != Domain::Unit) throw DomainError("to_byte expects a Unit image");
  Image out = img;
  out.domain = Domain::Byte255;
  for (double& p : out.pixels) p = std::clamp(p * 255.0, 0.0, 255.0);
  return out;
}

Image log_transform(const Image& img, double floor) {
  if (img.domain != Domain::Unit) throw DomainError("log_transform expects a Unit image");
  if (!(floor > 0.0)) throw Error("log_transform floor must be positive");
  Image out = img;
  out.domain = Domain::Log;
  for (double& p : out.pixels) p = std::log(std::max(p, floor));
  return out;
}

Image exp_transform(const Image& img) {
  if (img.domain != Domain::Log) throw DomainError("exp_transform expects a Log image");
  Image out = img;
  out.domain = Domain::Unit;
  for (double& p : out.pixels) p = std::clamp(std::exp(p), 0.0, 1.0);
  return out;
}

Array2d to_array(const Image& img) {
  Array2d a;
  a.rows = img.height;
  a.cols = img.width;
  a.data = img.pixels;
  return a;
}

Image from_array(const Array2d& a, Domain domain) {
  Image img;
  img.height = a.rows;
  img.width = a.cols;
  img.domain = domain;
  img.pixels = a.data;
  return img;
}

}  // namespace despeckle
