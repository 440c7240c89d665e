#pragma once

#include <cstdint>
#include <vector>

namespace despeckle {

/// N-dimensional 64-bit float array, row-major. grad, when non-empty, has
/// the same length as data.
struct Tensor {
  std::vector<int64_t> shape;
  std::vector<double> data;
  bool requires_grad = false;
  std::vector<double> grad;

  Tensor() = default;
  explicit Tensor(std::vector<int64_t> s, double fill = 0.0);

  int64_t numel() const;
  int64_t dim(size_t i) const { return shape[i]; }

  /// Element access for the [B, C, H, W] layout used by the model ops.
  double& at4(int64_t b, int64_t c, int64_t h, int64_t w) {
    return data[((b * shape[1] + c) * shape[2] + h) * shape[3] + w];
  }
  double at4(int64_t b, int64_t c, int64_t h, int64_t w) const {
    return data[((b * shape[1] + c) * shape[2] + h) * shape[3] + w];
  }

  bool same_shape(const Tensor& other) const { return shape == other.shape; }
};

int64_t shape_numel(const std::vector<int64_t>& shape);

}  // namespace despeckle
