// SPDX-License-Identifier: Apache-2.0
//
// Differentiable layer ops. Each op computes its forward result and, when a
// tape is given and any input takes part in backprop, records a closure that
// propagates output grads back to input grads. Pass tape == nullptr for
// inference-only forward passes.
//
// Shape conventions: sequence ops take [C,T] or batched [B,C,T]; dense takes
// [N] or [B,N]. conv1d kernels are [C_out,C_in,K], conv1d_transpose kernels
// are [C_in,C_out,K], so a transpose with the same kernel array is the exact
// adjoint of the matching conv.
#pragma once

#include <vector>

#include "gazegan/tensor.hpp"

namespace gaze::nn {

TensorPtr conv1d(Tape* tape, const TensorPtr& input, const TensorPtr& kernels,
                 const TensorPtr& bias, int64_t stride, int64_t padding);

TensorPtr conv1d_transpose(Tape* tape, const TensorPtr& input, const TensorPtr& kernels,
                           const TensorPtr& bias, int64_t stride, int64_t padding);

TensorPtr dense(Tape* tape, const TensorPtr& input, const TensorPtr& weights,
                const TensorPtr& bias);

// Row `index` of a [V,E] table; gradient accumulates only into that row.
TensorPtr embedding_lookup(Tape* tape, const TensorPtr& table, int64_t index);
// Batched variant: one row per index, output [B,E].
TensorPtr embedding_lookup(Tape* tape, const TensorPtr& table,
                           const std::vector<int64_t>& indices);

TensorPtr leaky_relu(Tape* tape, const TensorPtr& input, double alpha);
TensorPtr tanh_act(Tape* tape, const TensorPtr& input);
TensorPtr sigmoid(Tape* tape, const TensorPtr& input);

// -mean(t*log(p) + (1-t)*log(1-p)) with p clamped to [1e-7, 1-1e-7].
TensorPtr bce_loss(Tape* tape, const TensorPtr& pred, const TensorPtr& target);

// Mean over rows of (logsumexp(row) - row[target]); logits are [B,K].
TensorPtr softmax_cross_entropy(Tape* tape, const TensorPtr& logits,
                                const std::vector<int64_t>& targets);

// Row-wise softmax, forward only (no tape participation).
TensorPtr softmax_probs(const TensorPtr& logits);

TensorPtr add(Tape* tape, const TensorPtr& a, const TensorPtr& b);
TensorPtr concat(Tape* tape, const TensorPtr& a, const TensorPtr& b, size_t axis);
TensorPtr slice_axis(Tape* tape, const TensorPtr& input, size_t axis,
                     int64_t begin, int64_t end);
TensorPtr reshape(Tape* tape, const TensorPtr& input, std::vector<int64_t> new_shape);
TensorPtr affine(Tape* tape, const TensorPtr& input, double scale, double shift);
TensorPtr mean_all(Tape* tape, const TensorPtr& input);
TensorPtr sum_all(Tape* tape, const TensorPtr& input);

// Copy of the input that does not participate in backprop.
TensorPtr detach(const TensorPtr& input);

}  // namespace gaze::nn
