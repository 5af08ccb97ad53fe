// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "gazegan/tensor.hpp"

namespace gaze::nn {

// Per-parameter Adam accumulator. m/v run parallel to the flattened
// parameter; t counts completed steps.
struct AdamState {
  std::vector<double> m, v;
  int64_t t = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double lr = 1e-4;

  AdamState() = default;
  AdamState(int64_t length, double lr_in, double beta1_in = 0.9, double beta2_in = 0.999,
            double epsilon_in = 1e-8)
      : m(static_cast<size_t>(length), 0.0),
        v(static_cast<size_t>(length), 0.0),
        beta1(beta1_in),
        beta2(beta2_in),
        epsilon(epsilon_in),
        lr(lr_in) {}
};

// One bias-corrected Adam update in place. Requires a populated gradient.
void adam_step(Tensor& params, AdamState& state);

}  // namespace gaze::nn
