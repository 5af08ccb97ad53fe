// SPDX-License-Identifier: Apache-2.0
//
// Shared test helpers: temp dirs, random tensors and the central-difference
// gradient oracle. The oracle recomputes the loss through fresh forward
// passes only, so it stays independent of the tape it checks.
#pragma once

#include <cmath>
#include <cstring>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "gazegan/rng.hpp"
#include "gazegan/tensor.hpp"

namespace testsupport {

struct TempDir {
  std::filesystem::path path;

  explicit TempDir(const std::string& tag) {
    path = std::filesystem::temp_directory_path() /
           (tag + "-" + std::to_string(std::random_device{}()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::string str() const { return path.string(); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

inline gaze::nn::TensorPtr random_tensor(std::vector<int64_t> shape, gaze::nn::Rng& rng,
                                         bool requires_grad = true, double stddev = 1.0) {
  auto t = gaze::nn::Tensor::zeros(std::move(shape), requires_grad);
  rng.fill_normal(t->data, stddev);
  return t;
}

// Max over parameter elements of |analytic - central difference| relative to
// max(1, |analytic|, |fd|). make_loss must rebuild the graph from the
// tensors' current data; it receives the tape for the analytic pass and
// nullptr during finite differencing.
inline double gradcheck(const std::function<gaze::nn::TensorPtr(gaze::nn::Tape*)>& make_loss,
                        const std::vector<gaze::nn::TensorPtr>& params, double h = 1e-5) {
  gaze::nn::Tape tape;
  auto loss = make_loss(&tape);
  tape.backward(loss);

  std::vector<std::vector<double>> analytic;
  analytic.reserve(params.size());
  for (const auto& p : params) analytic.push_back(p->grad);

  double worst = 0.0;
  for (size_t pi = 0; pi < params.size(); ++pi) {
    auto& p = *params[pi];
    for (size_t i = 0; i < p.data.size(); ++i) {
      const double saved = p.data[i];
      p.data[i] = saved + h;
      const double up = make_loss(nullptr)->item();
      p.data[i] = saved - h;
      const double down = make_loss(nullptr)->item();
      p.data[i] = saved;
      const double fd = (up - down) / (2.0 * h);
      const double a = analytic[pi][i];
      const double rel = std::abs(a - fd) / std::max({1.0, std::abs(a), std::abs(fd)});
      worst = std::max(worst, rel);
    }
  }
  for (const auto& p : params) p->zero_grad();
  return worst;
}

inline uint64_t hash_doubles(const std::vector<double>& values) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (double v : values) {
    uint64_t bits;
    static_assert(sizeof(bits) == sizeof(v));
    std::memcpy(&bits, &v, sizeof(bits));
    for (int i = 0; i < 8; ++i) {
      h ^= (bits >> (8 * i)) & 0xff;
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

}  // namespace testsupport
