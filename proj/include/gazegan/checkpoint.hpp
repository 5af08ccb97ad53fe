// SPDX-License-Identifier: Apache-2.0
//
// Binary checkpoint container shared by every trainable component.
//
// Layout (all integers little-endian, reals raw IEEE-754 doubles):
//   magic "GGAN" | u32 format_version | u8 component | u8 mode_kind |
//   u8 mode_dim | u64 epoch |
//   u32 n_params  { u32 name_len, name, u32 rank, i64 dims[rank], f64 data[] } |
//   u32 n_opt     { u32 name_len, name, u64 t, f64 lr, f64 beta1, f64 beta2,
//                   f64 epsilon, u64 len, f64 m[len], f64 v[len] } |
//   u64 rng_s[4] | u8 rng_has_spare | f64 rng_spare |
//   u32 class_map_len | i64 class_map[]
//
// Round-trips are bit-exact: doubles are written verbatim.
#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "gazegan/adam.hpp"
#include "gazegan/rng.hpp"
#include "gazegan/tensor.hpp"

namespace gaze::nn {

enum class ComponentTag : uint8_t {
  generator = 0,
  discriminator = 1,
  codec = 2,
  classifier = 3,
};

std::string component_name(ComponentTag tag);

struct Checkpoint {
  uint32_t format_version = 1;
  ComponentTag component = ComponentTag::generator;
  uint8_t mode_kind = 0;  // 0 = all_dims, 1 = single_dim
  uint8_t mode_dim = 0;   // trait index when single_dim
  uint64_t epoch = 0;
  std::vector<std::pair<std::string, TensorPtr>> params;
  std::vector<std::pair<std::string, AdamState>> opt_states;
  RngState rng;
  std::vector<int64_t> class_map;  // classifier output -> class index

  const TensorPtr& param(const std::string& name) const;
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace gaze::nn
