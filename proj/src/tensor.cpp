// SPDX-License-Identifier: Apache-2.0
#include "gazegan/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gazegan/error.hpp"

namespace gaze::nn {

int64_t shape_size(const std::vector<int64_t>& shape) {
  int64_t n = 1;
  for (int64_t d : shape) {
    if (d <= 0) throw ShapeError("tensor dimensions must be positive");
    n *= d;
  }
  return n;
}

Tensor::Tensor(std::vector<int64_t> shape_in, bool requires_grad_in)
    : shape(std::move(shape_in)),
      data(static_cast<size_t>(shape_size(shape)), 0.0),
      requires_grad(requires_grad_in) {}

TensorPtr Tensor::zeros(std::vector<int64_t> shape, bool requires_grad) {
  return std::make_shared<Tensor>(std::move(shape), requires_grad);
}

TensorPtr Tensor::from(std::vector<int64_t> shape, std::vector<double> values,
                       bool requires_grad) {
  if (shape_size(shape) != static_cast<int64_t>(values.size()))
    throw ShapeError("value count does not match shape");
  auto t = std::make_shared<Tensor>();
  t->shape = std::move(shape);
  t->data = std::move(values);
  t->requires_grad = requires_grad;
  return t;
}

TensorPtr Tensor::scalar(double value) {
  return from({1}, {value});
}

int64_t Tensor::dim(size_t axis) const {
  if (axis >= shape.size()) throw ShapeError("axis out of range");
  return shape[axis];
}

double Tensor::item() const {
  if (!is_scalar()) throw ContractError("item() requires a scalar tensor");
  return data[0];
}

void Tensor::ensure_grad() {
  if (grad.size() != data.size()) grad.assign(data.size(), 0.0);
}

void Tensor::zero_grad() {
  std::fill(grad.begin(), grad.end(), 0.0);
}

bool Tensor::all_finite() const {
  return std::all_of(data.begin(), data.end(),
                     [](double v) { return std::isfinite(v); });
}

void Tape::record(std::function<void()> backward_step) {
  steps_.push_back(std::move(backward_step));
}

void Tape::backward(const TensorPtr& loss) {
  if (!loss || !loss->is_scalar())
    throw ContractError("backward requires a scalar loss tensor");
  loss->ensure_grad();
  loss->grad[0] = 1.0;
  for (auto it = steps_.rbegin(); it != steps_.rend(); ++it) (*it)();
}

void Tape::clear() { steps_.clear(); }

}  // namespace gaze::nn
