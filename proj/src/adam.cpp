// SPDX-License-Identifier: Apache-2.0
#include "gazegan/adam.hpp"

#include <cmath>

#include "gazegan/error.hpp"

namespace gaze::nn {

void adam_step(Tensor& params, AdamState& state) {
  const size_t n = params.data.size();
  if (params.grad.size() != n)
    throw ContractError("adam_step: parameter gradient not populated");
  if (state.m.size() != n || state.v.size() != n)
    throw ContractError("adam_step: moment buffers do not match parameter length");

  state.t += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
  for (size_t i = 0; i < n; ++i) {
    const double g = params.grad[i];
    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * g;
    state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * g * g;
    const double m_hat = state.m[i] / bc1;
    const double v_hat = state.v[i] / bc2;
    params.data[i] -= state.lr * m_hat / (std::sqrt(v_hat) + state.epsilon);
  }
}

}  // namespace gaze::nn
