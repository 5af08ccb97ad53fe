// SPDX-License-Identifier: Apache-2.0
//
// Conditional generator/discriminator pair and the adversarial training
// loop. Both networks condition on an integer personality class through a
// learned embedding; the generator routes its blink head through the frozen
// pre-trained blink decoder before anything reaches the discriminator.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gazegan/blinkcodec.hpp"
#include "gazegan/checkpoint.hpp"
#include "gazegan/dataio.hpp"
#include "gazegan/rng.hpp"
#include "gazegan/tensor.hpp"

namespace gaze::gan {

struct GanConfig {
  int64_t batch_size = 64;
  double lr_g = 1e-4;
  double lr_d = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  int64_t epochs = 50;
  uint64_t seed = 1;
  data::LabelMode mode;
  int64_t latent_dim = 100;
  int64_t embed_dim = 50;
  // Generator stage-1 channels; stage 2 halves, the discriminator mirrors.
  int64_t base_channels = 128;
  int64_t checkpoint_interval = 10;  // epochs between checkpoints; 0 = final only
  // Literal minimization of log(1-D(G)) instead of the non-saturating form.
  bool saturating_g_loss = false;
  enum class LabelSampling { uniform, empirical };
  LabelSampling label_sampling = LabelSampling::uniform;
  // Route real blink channels through the frozen decode(encode(.)) bridge
  // before the discriminator sees them. Generated blinks are decoder output
  // and live strictly inside (-1,1); raw real blinks sit exactly on +-1, a
  // soft-vs-hard tell that lets D win without consulting the class label.
  // The bridge puts both sides in the decoder's codomain.
  bool real_blink_through_codec = true;
};

// z + label embedding -> dense -> [C1,75] -> tconv(4,2,1) -> [C2,150] ->
// tconv(4,2,1) -> [4,300]; channels 0..2 pass through tanh, channel 3 feeds
// a linear 300->L blink-latent head.
struct GeneratorParams {
  data::LabelMode mode;
  int64_t latent_dim = 100;
  int64_t embed_dim = 50;
  int64_t c1 = 128;
  int64_t c2 = 64;
  int64_t blink_latent = 30;
  nn::TensorPtr embed;
  nn::TensorPtr fc_w, fc_b;
  nn::TensorPtr tconv1_w, tconv1_b;
  nn::TensorPtr tconv2_w, tconv2_b;
  nn::TensorPtr blink_w, blink_b;

  static GeneratorParams init(const GanConfig& config, int64_t blink_latent, nn::Rng& rng);
  static GeneratorParams from_checkpoint(const nn::Checkpoint& ckpt);
  std::vector<std::pair<std::string, nn::TensorPtr>> named_params() const;
  void set_requires_grad(bool on) const;
};

// Label embedding -> dense 300-length channel, concatenated with the window
// as channel 5; two stride-2 convs mirror the generator; dense -> sigmoid.
struct DiscriminatorParams {
  data::LabelMode mode;
  int64_t embed_dim = 50;
  int64_t c1 = 64;
  int64_t c2 = 128;
  nn::TensorPtr embed;
  nn::TensorPtr label_proj_w, label_proj_b;
  nn::TensorPtr conv1_w, conv1_b;
  nn::TensorPtr conv2_w, conv2_b;
  nn::TensorPtr fc_w, fc_b;

  static DiscriminatorParams init(const GanConfig& config, nn::Rng& rng);
  static DiscriminatorParams from_checkpoint(const nn::Checkpoint& ckpt);
  std::vector<std::pair<std::string, nn::TensorPtr>> named_params() const;
  void set_requires_grad(bool on) const;
};

// [B,latent] noise + labels -> normalized [B,4,300] window batch, every
// channel in (-1,1).
nn::TensorPtr generator_forward(nn::Tape* tape, const GeneratorParams& g,
                                const blink::BlinkCodecParams& codec,
                                const nn::TensorPtr& z,
                                const std::vector<int64_t>& labels);

// Normalized [B,4,300] batch + labels -> per-sample real-probability [B,1].
nn::TensorPtr discriminator_forward(nn::Tape* tape, const DiscriminatorParams& d,
                                    const nn::TensorPtr& windows,
                                    const std::vector<int64_t>& labels);

// bce(D(real,y),1) + bce(D(fake,y),0). The fake batch must already be
// detached from the generator.
nn::TensorPtr d_loss(nn::Tape* tape, const DiscriminatorParams& d,
                     const nn::TensorPtr& real, const nn::TensorPtr& fake,
                     const std::vector<int64_t>& real_labels,
                     const std::vector<int64_t>& fake_labels);

// Non-saturating bce(D(G(z,y),y),1), or mean log(1-D(G)) when saturating.
nn::TensorPtr g_loss(nn::Tape* tape, const GeneratorParams& g,
                     const DiscriminatorParams& d,
                     const blink::BlinkCodecParams& codec, const nn::TensorPtr& z,
                     const std::vector<int64_t>& labels, bool saturating = false);

struct GanEpochLog {
  int64_t epoch = 0;
  double d_loss = 0.0;
  double g_loss = 0.0;
};

struct GanTrainResult {
  GeneratorParams g;
  DiscriminatorParams d;
  std::vector<GanEpochLog> log;
};

struct GanResume {
  nn::Checkpoint generator;
  nn::Checkpoint discriminator;
};

// Alternating one-D-update/one-G-update training over normalized windows.
// Fake-batch labels are drawn from the classes seen in training data.
// Deterministic per seed; writes generator.ckpt/discriminator.ckpt into
// checkpoint_dir when given, plus *_diverged.ckpt diagnostics on NaN abort.
GanTrainResult train_gan(const std::vector<data::GazeWindow>& train_windows,
                         const blink::BlinkCodecParams& codec, const GanConfig& config,
                         const std::string& checkpoint_dir = "",
                         const GanResume* resume = nullptr);

// n independent draws for one class -> device-space windows (denormalized,
// blink binarized). Unseen class indices are valid inputs by design.
std::vector<data::GazeWindow> synthesize_batch(int64_t n, const data::ClassLabel& label,
                                               const GeneratorParams& g,
                                               const blink::BlinkCodecParams& codec,
                                               const data::NormStats& stats, nn::Rng& rng);

// Checkpoint bridges. Training state (optimizer moments, RNG, epoch) rides
// along so a resumed run continues bit-identically.
nn::Checkpoint generator_checkpoint(const GeneratorParams& g, uint64_t epoch,
                                    const std::vector<std::pair<std::string, nn::AdamState>>& opt,
                                    const nn::RngState& rng);
nn::Checkpoint discriminator_checkpoint(const DiscriminatorParams& d, uint64_t epoch,
                                        const std::vector<std::pair<std::string, nn::AdamState>>& opt,
                                        const nn::RngState& rng);

}  // namespace gaze::gan
