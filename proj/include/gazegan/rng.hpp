// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace gaze::nn {

// Full state of an Rng, suitable for checkpointing. The cached Box-Muller
// spare is part of the state so that restoring mid-stream is exact.
struct RngState {
  std::array<uint64_t, 4> s{};
  bool has_spare = false;
  double spare = 0.0;

  bool operator==(const RngState&) const = default;
};

// xoshiro256** seeded through splitmix64. Self-contained so that streams are
// reproducible across standard libraries and serializable bit-exactly.
class Rng {
 public:
  explicit Rng(uint64_t seed);
  explicit Rng(const RngState& state) : state_(state) {}

  uint64_t next_u64();

  // Uniform in [0, 1).
  double uniform();

  // Uniform integer in [0, n). n must be positive.
  int64_t below(int64_t n);

  // Standard normal via Box-Muller with one cached spare.
  double normal();

  void fill_normal(std::vector<double>& out, double stddev);

  const RngState& state() const { return state_; }
  void set_state(const RngState& state) { state_ = state; }

  // Stable sub-seed derivation for per-stage streams.
  static uint64_t derive(uint64_t seed, uint64_t stream);

 private:
  RngState state_;
};

// Fisher-Yates shuffle driven by the given Rng.
template <typename T>
void shuffle(std::vector<T>& items, Rng& rng) {
  for (int64_t i = static_cast<int64_t>(items.size()) - 1; i > 0; --i) {
    const int64_t j = rng.below(i + 1);
    std::swap(items[static_cast<size_t>(i)], items[static_cast<size_t>(j)]);
  }
}

}  // namespace gaze::nn
