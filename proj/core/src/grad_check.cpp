#include "despeckle/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "despeckle/error.hpp"

namespace despeckle {

GradCheckResult grad_check(const ScalarFn& f, const std::vector<double>& x, double h,
                           const std::vector<size_t>& indices) {
  if (!(h > 0.0)) throw Error("grad_check: h must be positive");

  std::vector<double> analytic(x.size(), 0.0);
  f(x, &analytic);

  std::vector<size_t> idx = indices;
  if (idx.empty()) {
    idx.resize(x.size());
    for (size_t i = 0; i < x.size(); ++i) idx[i] = i;
  }

  GradCheckResult result;
  std::vector<double> probe = x;
  for (size_t i : idx) {
    probe[i] = x[i] + h;
    double fp = f(probe, nullptr);
    probe[i] = x[i] - h;
    double fm = f(probe, nullptr);
    probe[i] = x[i];
    double numeric = (fp - fm) / (2.0 * h);
    double denom = std::max({std::abs(analytic[i]), std::abs(numeric), 1e-12});
    double rel = std::abs(analytic[i] - numeric) / denom;
    if (rel > result.max_rel_error) {
      result.max_rel_error = rel;
      result.worst_index = i;
    }
  }
  return result;
}

}  // namespace despeckle
