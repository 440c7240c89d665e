#include "despeckle/adam.hpp"

#include <cmath>

#include "despeckle/error.hpp"

namespace despeckle {

void AdamState::init(const std::vector<Tensor*>& params) {
  first_moment.clear();
  second_moment.clear();
  step_count = 0;
  for (const Tensor* p : params) {
    first_moment.emplace_back(p->data.size(), 0.0);
    second_moment.emplace_back(p->data.size(), 0.0);
  }
}

void adam_step(const std::vector<Tensor*>& params, const std::vector<const std::vector<double>*>& grads,
               AdamState& state) {
  if (params.size() != grads.size() || params.size() != state.first_moment.size())
    throw Error("adam_step: parameter/gradient/state count mismatch");

  state.step_count += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step_count));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step_count));

  for (size_t t = 0; t < params.size(); ++t) {
    Tensor& p = *params[t];
    const std::vector<double>& g = *grads[t];
    std::vector<double>& m = state.first_moment[t];
    std::vector<double>& v = state.second_moment[t];
    if (g.size() != p.data.size() || m.size() != p.data.size())
      throw Error("adam_step: shape mismatch in parameter " + std::to_string(t));
    for (size_t i = 0; i < p.data.size(); ++i) {
      m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
      v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i];
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      p.data[i] -= state.learning_rate * mhat / (std::sqrt(vhat) + state.epsilon);
    }
  }
}

}  // namespace despeckle
