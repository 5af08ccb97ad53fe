// SPDX-License-Identifier: Apache-2.0
#include "gazegan/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gazegan/error.hpp"
#include "gazegan/kernels.hpp"

namespace gaze::nn {

namespace {

constexpr double kBceEps = 1e-7;
// Keeps sigmoid/tanh outputs strictly inside their open codomains even in
// saturation.
constexpr double kActEps = 1e-15;

bool tracked(Tape* tape, std::initializer_list<TensorPtr> inputs) {
  if (!tape) return false;
  for (const auto& t : inputs)
    if (t && t->requires_grad) return true;
  return false;
}

void mark_output(const TensorPtr& out, std::initializer_list<TensorPtr> inputs) {
  for (const auto& t : inputs) {
    if (t && t->requires_grad) {
      out->requires_grad = true;
      t->ensure_grad();
    }
  }
  if (out->requires_grad) out->ensure_grad();
}

struct ConvDims {
  int64_t batch, c_in, t_in, t_out;
  bool batched;
};

ConvDims conv_input_dims(const TensorPtr& input) {
  if (input->rank() == 2) return {1, input->dim(0), input->dim(1), 0, false};
  if (input->rank() == 3) return {input->dim(0), input->dim(1), input->dim(2), 0, true};
  throw ShapeError("conv input must be [C,T] or [B,C,T]");
}

void fill_bias_rows(std::vector<double>& out, const std::vector<double>& bias,
                    int64_t batch, int64_t channels, int64_t t_len) {
  for (int64_t b = 0; b < batch; ++b)
    for (int64_t c = 0; c < channels; ++c)
      std::fill_n(out.begin() + (b * channels + c) * t_len, t_len, bias[static_cast<size_t>(c)]);
}

}  // namespace

TensorPtr conv1d(Tape* tape, const TensorPtr& input, const TensorPtr& kernels,
                 const TensorPtr& bias, int64_t stride, int64_t padding) {
  if (kernels->rank() != 3) throw ShapeError("conv1d kernels must be [C_out,C_in,K]");
  auto d = conv_input_dims(input);
  const int64_t c_out = kernels->dim(0), k_len = kernels->dim(2);
  if (kernels->dim(1) != d.c_in)
    throw ShapeError("conv1d C_in mismatch: input has " + std::to_string(d.c_in) +
                     ", kernels expect " + std::to_string(kernels->dim(1)));
  if (bias->rank() != 1 || bias->dim(0) != c_out)
    throw ShapeError("conv1d bias must be [C_out]");
  if (stride < 1 || padding < 0) throw ShapeError("conv1d needs stride >= 1, padding >= 0");
  if (d.t_in + 2 * padding < k_len)
    throw ShapeError("conv1d input too short for kernel");
  d.t_out = conv_out_len(d.t_in, k_len, stride, padding);

  auto out = Tensor::zeros(d.batched ? std::vector<int64_t>{d.batch, c_out, d.t_out}
                                     : std::vector<int64_t>{c_out, d.t_out});
  fill_bias_rows(out->data, bias->data, d.batch, c_out, d.t_out);
  kernels::xcorr_acc(input->data.data(), kernels->data.data(), out->data.data(),
                     d.batch, d.c_in, d.t_in, c_out, k_len, stride, padding, d.t_out);

  if (tracked(tape, {input, kernels, bias})) {
    mark_output(out, {input, kernels, bias});
    tape->record([=]() {
      if (input->requires_grad)
        kernels::xcorr_adjoint_acc(out->grad.data(), kernels->data.data(), input->grad.data(),
                                   d.batch, d.c_in, d.t_in, c_out, k_len, stride, padding, d.t_out);
      if (kernels->requires_grad)
        kernels::xcorr_weight_acc(input->data.data(), out->grad.data(), kernels->grad.data(),
                                  d.batch, d.c_in, d.t_in, c_out, k_len, stride, padding, d.t_out);
      if (bias->requires_grad)
        kernels::channel_sum_acc(out->grad.data(), bias->grad.data(), d.batch, c_out, d.t_out);
    });
  }
  return out;
}

TensorPtr conv1d_transpose(Tape* tape, const TensorPtr& input, const TensorPtr& kernels,
                           const TensorPtr& bias, int64_t stride, int64_t padding) {
  if (kernels->rank() != 3) throw ShapeError("conv1d_transpose kernels must be [C_in,C_out,K]");
  auto d = conv_input_dims(input);
  const int64_t c_out = kernels->dim(1), k_len = kernels->dim(2);
  if (kernels->dim(0) != d.c_in)
    throw ShapeError("conv1d_transpose C_in mismatch: input has " + std::to_string(d.c_in) +
                     ", kernels expect " + std::to_string(kernels->dim(0)));
  if (bias->rank() != 1 || bias->dim(0) != c_out)
    throw ShapeError("conv1d_transpose bias must be [C_out]");
  if (stride < 1 || padding < 0)
    throw ShapeError("conv1d_transpose needs stride >= 1, padding >= 0");
  d.t_out = tconv_out_len(d.t_in, k_len, stride, padding);
  if (d.t_out <= 0) throw ShapeError("conv1d_transpose output length is non-positive");

  auto out = Tensor::zeros(d.batched ? std::vector<int64_t>{d.batch, c_out, d.t_out}
                                     : std::vector<int64_t>{c_out, d.t_out});
  fill_bias_rows(out->data, bias->data, d.batch, c_out, d.t_out);
  // Adjoint of conv1d: the xcorr kernels are reused with the channel roles of
  // "summed over" and "produced" swapped; [C_in,C_out,K] lands on the same
  // flat layout the conv kernels expect.
  kernels::xcorr_adjoint_acc(input->data.data(), kernels->data.data(), out->data.data(),
                             d.batch, c_out, d.t_out, d.c_in, k_len, stride, padding, d.t_in);

  if (tracked(tape, {input, kernels, bias})) {
    mark_output(out, {input, kernels, bias});
    auto dd = d;
    tape->record([=]() {
      if (input->requires_grad)
        kernels::xcorr_acc(out->grad.data(), kernels->data.data(), input->grad.data(),
                           dd.batch, c_out, dd.t_out, dd.c_in, k_len, stride, padding, dd.t_in);
      if (kernels->requires_grad)
        kernels::xcorr_weight_acc(out->grad.data(), input->data.data(), kernels->grad.data(),
                                  dd.batch, c_out, dd.t_out, dd.c_in, k_len, stride, padding, dd.t_in);
      if (bias->requires_grad)
        kernels::channel_sum_acc(out->grad.data(), bias->grad.data(), dd.batch, c_out, dd.t_out);
    });
  }
  return out;
}

TensorPtr dense(Tape* tape, const TensorPtr& input, const TensorPtr& weights,
                const TensorPtr& bias) {
  if (weights->rank() != 2) throw ShapeError("dense weights must be [M,N]");
  const int64_t m_out = weights->dim(0), n_in = weights->dim(1);
  bool batched = input->rank() == 2;
  if (!batched && input->rank() != 1) throw ShapeError("dense input must be [N] or [B,N]");
  const int64_t batch = batched ? input->dim(0) : 1;
  const int64_t n_have = batched ? input->dim(1) : input->dim(0);
  if (n_have != n_in)
    throw ShapeError("dense input size " + std::to_string(n_have) +
                     " does not match weight columns " + std::to_string(n_in));
  if (bias->rank() != 1 || bias->dim(0) != m_out) throw ShapeError("dense bias must be [M]");

  auto out = Tensor::zeros(batched ? std::vector<int64_t>{batch, m_out}
                                   : std::vector<int64_t>{m_out});
  for (int64_t b = 0; b < batch; ++b)
    std::copy(bias->data.begin(), bias->data.end(), out->data.begin() + b * m_out);
  kernels::matvec_acc(input->data.data(), weights->data.data(), out->data.data(),
                      batch, n_in, m_out);

  if (tracked(tape, {input, weights, bias})) {
    mark_output(out, {input, weights, bias});
    tape->record([=]() {
      if (input->requires_grad)
        kernels::matvec_adjoint_acc(out->grad.data(), weights->data.data(),
                                    input->grad.data(), batch, n_in, m_out);
      if (weights->requires_grad || bias->requires_grad)
        kernels::matvec_weight_acc(input->data.data(), out->grad.data(),
                                   weights->requires_grad ? weights->grad.data() : nullptr,
                                   bias->requires_grad ? bias->grad.data() : nullptr,
                                   batch, n_in, m_out);
    });
  }
  return out;
}

TensorPtr embedding_lookup(Tape* tape, const TensorPtr& table,
                           const std::vector<int64_t>& indices) {
  if (table->rank() != 2) throw ShapeError("embedding table must be [V,E]");
  const int64_t vocab = table->dim(0), e_dim = table->dim(1);
  for (int64_t idx : indices)
    if (idx < 0 || idx >= vocab)
      throw IndexError("embedding index " + std::to_string(idx) + " outside [0, " +
                       std::to_string(vocab) + ")");
  const int64_t batch = static_cast<int64_t>(indices.size());
  auto out = Tensor::zeros({batch, e_dim});
  for (int64_t b = 0; b < batch; ++b)
    std::copy_n(table->data.begin() + indices[static_cast<size_t>(b)] * e_dim, e_dim,
                out->data.begin() + b * e_dim);

  if (tracked(tape, {table})) {
    mark_output(out, {table});
    auto idx_copy = indices;
    tape->record([=]() {
      if (!table->requires_grad) return;
      for (int64_t b = 0; b < batch; ++b) {
        double* row = table->grad.data() + idx_copy[static_cast<size_t>(b)] * e_dim;
        const double* g = out->grad.data() + b * e_dim;
        for (int64_t e = 0; e < e_dim; ++e) row[e] += g[e];
      }
    });
  }
  return out;
}

TensorPtr embedding_lookup(Tape* tape, const TensorPtr& table, int64_t index) {
  auto out = embedding_lookup(tape, table, std::vector<int64_t>{index});
  out->shape = {out->dim(1)};
  return out;
}

namespace {

template <typename Fwd, typename Bwd>
TensorPtr elementwise(Tape* tape, const TensorPtr& input, Fwd fwd, Bwd dfdx) {
  auto out = Tensor::zeros(input->shape);
  const int64_t n = input->size();
  const double* x = input->data.data();
  double* y = out->data.data();
#pragma omp parallel for schedule(static) if (n > 4096)
  for (int64_t i = 0; i < n; ++i) y[i] = fwd(x[i]);

  if (tracked(tape, {input})) {
    mark_output(out, {input});
    tape->record([=]() {
      if (!input->requires_grad) return;
      const double* xi = input->data.data();
      const double* go = out->grad.data();
      double* gi = input->grad.data();
#pragma omp parallel for schedule(static) if (n > 4096)
      for (int64_t i = 0; i < n; ++i) gi[i] += go[i] * dfdx(xi[i]);
    });
  }
  return out;
}

double sigmoid_stable(double x) {
  double s;
  if (x >= 0.0) {
    s = 1.0 / (1.0 + std::exp(-x));
  } else {
    const double e = std::exp(x);
    s = e / (1.0 + e);
  }
  return std::clamp(s, kActEps, 1.0 - kActEps);
}

}  // namespace

TensorPtr leaky_relu(Tape* tape, const TensorPtr& input, double alpha) {
  return elementwise(
      tape, input, [alpha](double x) { return x >= 0.0 ? x : alpha * x; },
      [alpha](double x) { return x >= 0.0 ? 1.0 : alpha; });
}

TensorPtr tanh_act(Tape* tape, const TensorPtr& input) {
  return elementwise(
      tape, input,
      [](double x) { return std::clamp(std::tanh(x), -(1.0 - kActEps), 1.0 - kActEps); },
      [](double x) {
        const double t = std::tanh(x);
        return 1.0 - t * t;
      });
}

TensorPtr sigmoid(Tape* tape, const TensorPtr& input) {
  return elementwise(
      tape, input, [](double x) { return sigmoid_stable(x); },
      [](double x) {
        const double s = sigmoid_stable(x);
        return s * (1.0 - s);
      });
}

TensorPtr bce_loss(Tape* tape, const TensorPtr& pred, const TensorPtr& target) {
  if (pred->shape != target->shape) throw ShapeError("bce_loss shapes must match");
  const int64_t n = pred->size();
  double total = 0.0;
  for (int64_t i = 0; i < n; ++i) {
    const double p = std::clamp(pred->data[static_cast<size_t>(i)], kBceEps, 1.0 - kBceEps);
    const double t = target->data[static_cast<size_t>(i)];
    total += t * std::log(p) + (1.0 - t) * std::log(1.0 - p);
  }
  auto out = Tensor::scalar(-total / static_cast<double>(n));

  if (tracked(tape, {pred, target})) {
    mark_output(out, {pred, target});
    tape->record([=]() {
      const double g = out->grad[0] / static_cast<double>(n);
      for (int64_t i = 0; i < n; ++i) {
        const size_t s = static_cast<size_t>(i);
        const double raw = pred->data[s];
        if (raw < kBceEps || raw > 1.0 - kBceEps) continue;  // clamp region, zero slope
        const double t = target->data[s];
        if (pred->requires_grad)
          pred->grad[s] += g * (-(t / raw) + (1.0 - t) / (1.0 - raw));
        if (target->requires_grad)
          target->grad[s] += g * (std::log(1.0 - raw) - std::log(raw));
      }
    });
  }
  return out;
}

TensorPtr softmax_cross_entropy(Tape* tape, const TensorPtr& logits,
                                const std::vector<int64_t>& targets) {
  if (logits->rank() != 2) throw ShapeError("softmax_cross_entropy logits must be [B,K]");
  const int64_t batch = logits->dim(0), k_dim = logits->dim(1);
  if (static_cast<int64_t>(targets.size()) != batch)
    throw ShapeError("softmax_cross_entropy needs one target per row");
  for (int64_t t : targets)
    if (t < 0 || t >= k_dim) throw IndexError("target class out of range");

  double total = 0.0;
  for (int64_t b = 0; b < batch; ++b) {
    const double* row = logits->data.data() + b * k_dim;
    const double m = *std::max_element(row, row + k_dim);
    double sum = 0.0;
    for (int64_t k = 0; k < k_dim; ++k) sum += std::exp(row[k] - m);
    total += m + std::log(sum) - row[targets[static_cast<size_t>(b)]];
  }
  auto out = Tensor::scalar(total / static_cast<double>(batch));

  if (tracked(tape, {logits})) {
    mark_output(out, {logits});
    auto t_copy = targets;
    tape->record([=]() {
      if (!logits->requires_grad) return;
      const double g = out->grad[0] / static_cast<double>(batch);
      for (int64_t b = 0; b < batch; ++b) {
        const double* row = logits->data.data() + b * k_dim;
        double* grow = logits->grad.data() + b * k_dim;
        const double m = *std::max_element(row, row + k_dim);
        double sum = 0.0;
        for (int64_t k = 0; k < k_dim; ++k) sum += std::exp(row[k] - m);
        for (int64_t k = 0; k < k_dim; ++k) {
          const double p = std::exp(row[k] - m) / sum;
          grow[k] += g * (p - (k == t_copy[static_cast<size_t>(b)] ? 1.0 : 0.0));
        }
      }
    });
  }
  return out;
}

TensorPtr softmax_probs(const TensorPtr& logits) {
  if (logits->rank() != 2) throw ShapeError("softmax_probs logits must be [B,K]");
  const int64_t batch = logits->dim(0), k_dim = logits->dim(1);
  auto out = Tensor::zeros(logits->shape);
  for (int64_t b = 0; b < batch; ++b) {
    const double* row = logits->data.data() + b * k_dim;
    double* orow = out->data.data() + b * k_dim;
    const double m = *std::max_element(row, row + k_dim);
    double sum = 0.0;
    for (int64_t k = 0; k < k_dim; ++k) {
      orow[k] = std::exp(row[k] - m);
      sum += orow[k];
    }
    for (int64_t k = 0; k < k_dim; ++k) orow[k] /= sum;
  }
  return out;
}

TensorPtr add(Tape* tape, const TensorPtr& a, const TensorPtr& b) {
  if (a->shape != b->shape) throw ShapeError("add shapes must match");
  auto out = Tensor::zeros(a->shape);
  const int64_t n = a->size();
  for (int64_t i = 0; i < n; ++i)
    out->data[static_cast<size_t>(i)] =
        a->data[static_cast<size_t>(i)] + b->data[static_cast<size_t>(i)];

  if (tracked(tape, {a, b})) {
    mark_output(out, {a, b});
    tape->record([=]() {
      for (int64_t i = 0; i < n; ++i) {
        const size_t s = static_cast<size_t>(i);
        if (a->requires_grad) a->grad[s] += out->grad[s];
        if (b->requires_grad) b->grad[s] += out->grad[s];
      }
    });
  }
  return out;
}

namespace {

struct AxisBlocks {
  int64_t outer, a_block, b_block;
};

AxisBlocks concat_blocks(const TensorPtr& a, const TensorPtr& b, size_t axis) {
  if (a->rank() != b->rank() || axis >= a->rank())
    throw ShapeError("concat rank/axis mismatch");
  for (size_t i = 0; i < a->rank(); ++i)
    if (i != axis && a->shape[i] != b->shape[i])
      throw ShapeError("concat non-axis dims must match");
  int64_t outer = 1, inner = 1;
  for (size_t i = 0; i < axis; ++i) outer *= a->shape[i];
  for (size_t i = axis + 1; i < a->rank(); ++i) inner *= a->shape[i];
  return {outer, a->shape[axis] * inner, b->shape[axis] * inner};
}

}  // namespace

TensorPtr concat(Tape* tape, const TensorPtr& a, const TensorPtr& b, size_t axis) {
  const auto blocks = concat_blocks(a, b, axis);
  auto shape = a->shape;
  shape[axis] += b->shape[axis];
  auto out = Tensor::zeros(shape);
  const int64_t stride = blocks.a_block + blocks.b_block;
  for (int64_t o = 0; o < blocks.outer; ++o) {
    std::copy_n(a->data.begin() + o * blocks.a_block, blocks.a_block,
                out->data.begin() + o * stride);
    std::copy_n(b->data.begin() + o * blocks.b_block, blocks.b_block,
                out->data.begin() + o * stride + blocks.a_block);
  }

  if (tracked(tape, {a, b})) {
    mark_output(out, {a, b});
    tape->record([=]() {
      for (int64_t o = 0; o < blocks.outer; ++o) {
        const double* g = out->grad.data() + o * stride;
        if (a->requires_grad) {
          double* ga = a->grad.data() + o * blocks.a_block;
          for (int64_t i = 0; i < blocks.a_block; ++i) ga[i] += g[i];
        }
        if (b->requires_grad) {
          double* gb = b->grad.data() + o * blocks.b_block;
          for (int64_t i = 0; i < blocks.b_block; ++i) gb[i] += g[blocks.a_block + i];
        }
      }
    });
  }
  return out;
}

TensorPtr slice_axis(Tape* tape, const TensorPtr& input, size_t axis,
                     int64_t begin, int64_t end) {
  if (axis >= input->rank()) throw ShapeError("slice axis out of range");
  if (begin < 0 || end > input->shape[axis] || begin >= end)
    throw ShapeError("slice bounds invalid");
  int64_t outer = 1, inner = 1;
  for (size_t i = 0; i < axis; ++i) outer *= input->shape[i];
  for (size_t i = axis + 1; i < input->rank(); ++i) inner *= input->shape[i];
  const int64_t in_block = input->shape[axis] * inner;
  const int64_t out_block = (end - begin) * inner;

  auto shape = input->shape;
  shape[axis] = end - begin;
  auto out = Tensor::zeros(shape);
  for (int64_t o = 0; o < outer; ++o)
    std::copy_n(input->data.begin() + o * in_block + begin * inner, out_block,
                out->data.begin() + o * out_block);

  if (tracked(tape, {input})) {
    mark_output(out, {input});
    tape->record([=]() {
      if (!input->requires_grad) return;
      for (int64_t o = 0; o < outer; ++o) {
        double* gi = input->grad.data() + o * in_block + begin * inner;
        const double* go = out->grad.data() + o * out_block;
        for (int64_t i = 0; i < out_block; ++i) gi[i] += go[i];
      }
    });
  }
  return out;
}

TensorPtr reshape(Tape* tape, const TensorPtr& input, std::vector<int64_t> new_shape) {
  if (shape_size(new_shape) != input->size())
    throw ShapeError("reshape must preserve element count");
  auto out = Tensor::from(std::move(new_shape), input->data);

  if (tracked(tape, {input})) {
    mark_output(out, {input});
    tape->record([=]() {
      if (!input->requires_grad) return;
      for (size_t i = 0; i < input->grad.size(); ++i) input->grad[i] += out->grad[i];
    });
  }
  return out;
}

TensorPtr affine(Tape* tape, const TensorPtr& input, double scale, double shift) {
  return elementwise(
      tape, input, [scale, shift](double x) { return scale * x + shift; },
      [scale](double) { return scale; });
}

TensorPtr mean_all(Tape* tape, const TensorPtr& input) {
  const int64_t n = input->size();
  double total = 0.0;
  for (double v : input->data) total += v;
  auto out = Tensor::scalar(total / static_cast<double>(n));

  if (tracked(tape, {input})) {
    mark_output(out, {input});
    tape->record([=]() {
      if (!input->requires_grad) return;
      const double g = out->grad[0] / static_cast<double>(n);
      for (auto& gi : input->grad) gi += g;
    });
  }
  return out;
}

TensorPtr sum_all(Tape* tape, const TensorPtr& input) {
  double total = 0.0;
  for (double v : input->data) total += v;
  auto out = Tensor::scalar(total);

  if (tracked(tape, {input})) {
    mark_output(out, {input});
    tape->record([=]() {
      if (!input->requires_grad) return;
      const double g = out->grad[0];
      for (auto& gi : input->grad) gi += g;
    });
  }
  return out;
}

TensorPtr detach(const TensorPtr& input) {
  return Tensor::from(input->shape, input->data);
}

}  // namespace gaze::nn
