#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace despeckle {

/// A differentiable scalar function for verification: called with a point x,
/// returns f(x); when grad_out is non-null it must also fill the analytic
/// gradient (same length as x).
using ScalarFn = std::function<double(const std::vector<double>&, std::vector<double>*)>;

struct GradCheckResult {
  double max_rel_error = 0.0;
  size_t worst_index = 0;
};

/// Central-difference verification of reverse-mode gradients:
///   numeric_i = (f(x + h e_i) - f(x - h e_i)) / (2h)
/// compared against the analytic gradient with relative error
///   |a - n| / max(|a|, |n|, 1e-12).
/// When `indices` is empty every coordinate is checked; otherwise only the
/// listed ones (used to sample a few coordinates of large parameter vectors).
GradCheckResult grad_check(const ScalarFn& f, const std::vector<double>& x, double h,
                           const std::vector<size_t>& indices = {});

}  // namespace despeckle
