#include "despeckle/tensor.hpp"

#include "despeckle/error.hpp"

namespace despeckle {

int64_t shape_numel(const std::vector<int64_t>& shape) {
  int64_t n = 1;
  for (int64_t d : shape) {
    if (d < 1) throw Error("Tensor: shape entries must be positive");
    n *= d;
  }
  return n;
}

Tensor::Tensor(std::vector<int64_t> s, double fill) : shape(std::move(s)) {
  data.assign(static_cast<size_t>(shape_numel(shape)), fill);
}

int64_t Tensor::numel() const { return static_cast<int64_t>(data.size()); }

}  // namespace despeckle
