// SPDX-License-Identifier: Apache-2.0
//
// Run configuration shared by every subcommand: a flat `key = value` config
// file, flag overrides, the GAZE_GAN_SEED environment override, and the run
// manifest (config hash + seed + artifact hashes).
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gazegan/dataio.hpp"

namespace gaze::cli {

struct RunConfig {
  // paths; no defaults
  std::string data_dir;
  std::string personality_file;
  std::string out_dir;

  // pipeline
  std::string mode = "all_dims";  // all_dims | O | C | E | A | N
  int64_t stride = 60;
  double test_fraction = 0.2;
  uint64_t seed = 1;

  // gan training
  int64_t batch_size = 64;
  double lr_g = 1e-4;
  double lr_d = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  int64_t epochs = 50;
  int64_t latent_dim = 100;
  int64_t embed_dim = 50;
  int64_t base_channels = 128;
  int64_t checkpoint_interval = 10;
  std::string g_loss = "non_saturating";  // non_saturating | saturating
  std::string label_sampling = "uniform";  // uniform | empirical
  std::string real_blink = "codec";        // codec (bridged) | raw

  // blink codec
  int64_t codec_latent = 30;
  int64_t codec_hidden = 128;
  int64_t codec_epochs = 150;
  double codec_lr = 1e-3;
  int64_t codec_batch_size = 64;

  // eval classifier
  int64_t classifier_channels = 32;
  int64_t classifier_epochs = 30;
  double classifier_lr = 1e-3;
  int64_t classifier_batch_size = 64;
  int64_t synth_per_class = 1000;

  // animation rig
  double eye_x = 0.0;
  double eye_y = 0.0;
  double eye_z = 0.0;
  double view_distance = 1.0;
  double h_fov = 60.0;
  double v_fov = 46.0;
  double baseline_pupil = 0.0;  // 0 = take the dataset pupil mean
  double eyelid_slope = -1.0;
  double eyelid_intercept = 1.0;

  // synthetic demo corpus
  int64_t fixture_participants = 3;
  int64_t fixture_samples = 2400;

  data::LabelMode label_mode() const { return data::LabelMode::parse(mode); }

  // Assign one key; ConfigError on unknown keys or unparsable values.
  void set(const std::string& key, const std::string& value);

  // Sorted key=value lines over every field; hashed into the manifest.
  std::string canonical_text() const;

  // Key/default/description triples for --help output.
  struct KeyDoc {
    std::string key;
    std::string default_value;
    std::string description;
  };
  static std::vector<KeyDoc> key_docs();
};

// Flat config file: `key = value` lines, '#' comments. Unknown keys reject.
void load_config_file(RunConfig& config, const std::string& path);

// GAZE_GAN_SEED, when set, replaces the seed.
void apply_env_overrides(RunConfig& config);

struct Manifest {
  std::string command;
  std::string config_hash;
  uint64_t seed = 0;
  std::vector<std::string> artifacts;

  void add(const std::string& path) { artifacts.push_back(path); }
  // Writes <out_dir>/manifest_<command>.json with per-artifact content hashes.
  void write(const std::string& out_dir) const;
};

}  // namespace gaze::cli
