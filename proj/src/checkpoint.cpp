// SPDX-License-Identifier: Apache-2.0
#include "gazegan/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "gazegan/error.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint format assumes a little-endian host");

namespace gaze::nn {

namespace {

constexpr char kMagic[4] = {'G', 'G', 'A', 'N'};

template <typename T>
void write_pod(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw IoError("checkpoint truncated");
  return value;
}

void write_string(std::ostream& out, const std::string& s) {
  write_pod<uint32_t>(out, static_cast<uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::istream& in) {
  const auto len = read_pod<uint32_t>(in);
  std::string s(len, '\0');
  in.read(s.data(), len);
  if (!in) throw IoError("checkpoint truncated");
  return s;
}

void write_doubles(std::ostream& out, const std::vector<double>& values) {
  out.write(reinterpret_cast<const char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(double)));
}

void read_doubles(std::istream& in, std::vector<double>& values, size_t count) {
  values.resize(count);
  in.read(reinterpret_cast<char*>(values.data()),
          static_cast<std::streamsize>(count * sizeof(double)));
  if (!in) throw IoError("checkpoint truncated");
}

}  // namespace

std::string component_name(ComponentTag tag) {
  switch (tag) {
    case ComponentTag::generator: return "generator";
    case ComponentTag::discriminator: return "discriminator";
    case ComponentTag::codec: return "codec";
    case ComponentTag::classifier: return "classifier";
  }
  return "unknown";
}

const TensorPtr& Checkpoint::param(const std::string& name) const {
  for (const auto& [n, t] : params)
    if (n == name) return t;
  throw IoError("checkpoint missing parameter block '" + name + "'");
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open checkpoint for writing: " + path);

  out.write(kMagic, 4);
  write_pod<uint32_t>(out, ckpt.format_version);
  write_pod<uint8_t>(out, static_cast<uint8_t>(ckpt.component));
  write_pod<uint8_t>(out, ckpt.mode_kind);
  write_pod<uint8_t>(out, ckpt.mode_dim);
  write_pod<uint64_t>(out, ckpt.epoch);

  write_pod<uint32_t>(out, static_cast<uint32_t>(ckpt.params.size()));
  for (const auto& [name, tensor] : ckpt.params) {
    write_string(out, name);
    write_pod<uint32_t>(out, static_cast<uint32_t>(tensor->rank()));
    for (int64_t d : tensor->shape) write_pod<int64_t>(out, d);
    write_doubles(out, tensor->data);
  }

  write_pod<uint32_t>(out, static_cast<uint32_t>(ckpt.opt_states.size()));
  for (const auto& [name, state] : ckpt.opt_states) {
    write_string(out, name);
    write_pod<uint64_t>(out, static_cast<uint64_t>(state.t));
    write_pod<double>(out, state.lr);
    write_pod<double>(out, state.beta1);
    write_pod<double>(out, state.beta2);
    write_pod<double>(out, state.epsilon);
    write_pod<uint64_t>(out, static_cast<uint64_t>(state.m.size()));
    write_doubles(out, state.m);
    write_doubles(out, state.v);
  }

  for (uint64_t word : ckpt.rng.s) write_pod<uint64_t>(out, word);
  write_pod<uint8_t>(out, ckpt.rng.has_spare ? 1 : 0);
  write_pod<double>(out, ckpt.rng.spare);

  write_pod<uint32_t>(out, static_cast<uint32_t>(ckpt.class_map.size()));
  for (int64_t c : ckpt.class_map) write_pod<int64_t>(out, c);

  if (!out) throw IoError("checkpoint write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path);

  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw IoError("not a GGAN checkpoint: " + path);

  Checkpoint ckpt;
  ckpt.format_version = read_pod<uint32_t>(in);
  if (ckpt.format_version != 1)
    throw IoError("unsupported checkpoint format_version " +
                  std::to_string(ckpt.format_version));
  ckpt.component = static_cast<ComponentTag>(read_pod<uint8_t>(in));
  ckpt.mode_kind = read_pod<uint8_t>(in);
  ckpt.mode_dim = read_pod<uint8_t>(in);
  ckpt.epoch = read_pod<uint64_t>(in);

  const auto n_params = read_pod<uint32_t>(in);
  ckpt.params.reserve(n_params);
  for (uint32_t i = 0; i < n_params; ++i) {
    auto name = read_string(in);
    const auto rank = read_pod<uint32_t>(in);
    std::vector<int64_t> shape(rank);
    for (auto& d : shape) d = read_pod<int64_t>(in);
    auto tensor = std::make_shared<Tensor>();
    tensor->shape = std::move(shape);
    read_doubles(in, tensor->data, static_cast<size_t>(shape_size(tensor->shape)));
    ckpt.params.emplace_back(std::move(name), std::move(tensor));
  }

  const auto n_opt = read_pod<uint32_t>(in);
  ckpt.opt_states.reserve(n_opt);
  for (uint32_t i = 0; i < n_opt; ++i) {
    auto name = read_string(in);
    AdamState state;
    state.t = static_cast<int64_t>(read_pod<uint64_t>(in));
    state.lr = read_pod<double>(in);
    state.beta1 = read_pod<double>(in);
    state.beta2 = read_pod<double>(in);
    state.epsilon = read_pod<double>(in);
    const auto len = read_pod<uint64_t>(in);
    read_doubles(in, state.m, len);
    read_doubles(in, state.v, len);
    ckpt.opt_states.emplace_back(std::move(name), std::move(state));
  }

  for (auto& word : ckpt.rng.s) word = read_pod<uint64_t>(in);
  ckpt.rng.has_spare = read_pod<uint8_t>(in) != 0;
  ckpt.rng.spare = read_pod<double>(in);

  const auto map_len = read_pod<uint32_t>(in);
  ckpt.class_map.resize(map_len);
  for (auto& c : ckpt.class_map) c = read_pod<int64_t>(in);

  return ckpt;
}

}  // namespace gaze::nn
