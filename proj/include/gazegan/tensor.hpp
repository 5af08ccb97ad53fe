// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

namespace gaze::nn {

class Tensor;
using TensorPtr = std::shared_ptr<Tensor>;

int64_t shape_size(const std::vector<int64_t>& shape);

// Dense n-d array of 64-bit reals in row-major order. The gradient buffer is
// allocated lazily and only for tensors that take part in backprop.
class Tensor {
 public:
  std::vector<int64_t> shape;
  std::vector<double> data;
  std::vector<double> grad;
  bool requires_grad = false;

  Tensor() = default;
  Tensor(std::vector<int64_t> shape_in, bool requires_grad_in);

  static TensorPtr zeros(std::vector<int64_t> shape, bool requires_grad = false);
  static TensorPtr from(std::vector<int64_t> shape, std::vector<double> values,
                        bool requires_grad = false);
  static TensorPtr scalar(double value);

  int64_t size() const { return static_cast<int64_t>(data.size()); }
  size_t rank() const { return shape.size(); }
  int64_t dim(size_t axis) const;
  bool is_scalar() const { return data.size() == 1; }

  // Scalar value; ContractError when the tensor is not 1-element.
  double item() const;

  void ensure_grad();
  void zero_grad();
  bool all_finite() const;
};

// Reverse-mode gradient tape. Ops append their backward closures in execution
// order, which is a topological order by construction; backward() seeds the
// scalar loss with grad 1 and replays every node exactly once in reverse.
class Tape {
 public:
  void record(std::function<void()> backward_step);
  void backward(const TensorPtr& loss);
  void clear();
  size_t size() const { return steps_.size(); }

 private:
  std::vector<std::function<void()>> steps_;
};

}  // namespace gaze::nn
