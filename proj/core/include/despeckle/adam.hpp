#pragma once

#include <cstdint>
#include <vector>

#include "despeckle/tensor.hpp"

namespace despeckle {

/// Bias-corrected Adam state over an ordered parameter list. Moment arrays
/// mirror the parameter shapes; step_count advances by one per update.
struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double learning_rate = 1e-3;
  int64_t step_count = 0;
  std::vector<std::vector<double>> first_moment;
  std::vector<std::vector<double>> second_moment;

  void init(const std::vector<Tensor*>& params);
};

/// One Adam update:
///   m = b1 m + (1-b1) g;  v = b2 v + (1-b2) g^2
///   p -= lr * (m / (1-b1^t)) / (sqrt(v / (1-b2^t)) + eps)
/// Throws on shape mismatch between params, grads, and state.
void adam_step(const std::vector<Tensor*>& params, const std::vector<const std::vector<double>*>& grads,
               AdamState& state);

}  // namespace despeckle
