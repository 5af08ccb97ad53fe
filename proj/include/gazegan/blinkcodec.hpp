// SPDX-License-Identifier: Apache-2.0
//
// Autoencoder over the binary blink channel. The pre-trained decoder acts as
// a fixed differentiable bridge between the generator's blink head and the
// discriminator; binarize() is the final discretization back to {0,1}.
#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "gazegan/checkpoint.hpp"
#include "gazegan/rng.hpp"
#include "gazegan/tensor.hpp"

namespace gaze::blink {

struct CodecConfig {
  int64_t window = 300;
  int64_t hidden_dim = 128;
  int64_t latent_dim = 30;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  int64_t batch_size = 64;
  int64_t epochs = 150;
  uint64_t seed = 1;
  // when logging, also track thresholded accuracy on (up to) the first 1000
  // training windows each epoch
  bool log_accuracy = false;
};

// Dense encoder window -> hidden -> latent, decoder latent -> hidden ->
// window with a sigmoid head, so decoded curves live strictly in (0,1).
struct BlinkCodecParams {
  int64_t window = 300;
  int64_t hidden_dim = 128;
  int64_t latent_dim = 30;
  nn::TensorPtr enc_w1, enc_b1, enc_w2, enc_b2;
  nn::TensorPtr dec_w1, dec_b1, dec_w2, dec_b2;

  static BlinkCodecParams init(const CodecConfig& config, nn::Rng& rng);
  std::vector<std::pair<std::string, nn::TensorPtr>> named_params() const;
  void set_requires_grad(bool on) const;
};

// [300] or [B,300] binary input -> latent. ContractError on non-binary input.
nn::TensorPtr encode(nn::Tape* tape, const BlinkCodecParams& params,
                     const nn::TensorPtr& blink);

// Latent -> blink-probability curve in (0,1); differentiable w.r.t. latent.
nn::TensorPtr decode(nn::Tape* tape, const BlinkCodecParams& params,
                     const nn::TensorPtr& latent);

inline double binarize_value(double v, double threshold = 0.5) {
  return v >= threshold ? 1.0 : 0.0;
}
std::vector<double> binarize(const std::vector<double>& continuous,
                             double threshold = 0.5);

struct CodecEpochLog {
  int64_t epoch = 0;
  double loss = 0.0;
  double accuracy = 0.0;  // populated when CodecConfig::log_accuracy is set
};

// Reconstruction training with Adam on BCE. Deterministic per seed.
BlinkCodecParams train_autoencoder(const std::vector<std::vector<double>>& blink_windows,
                                   const CodecConfig& config,
                                   std::vector<CodecEpochLog>* log = nullptr);

// Fraction of frames whose thresholded reconstruction matches the input.
double reconstruction_accuracy(const BlinkCodecParams& params,
                               const std::vector<std::vector<double>>& blink_windows,
                               double threshold = 0.5);

// Mean BCE of decode(encode(w)) against w over the given windows.
double reconstruction_loss(const BlinkCodecParams& params,
                           const std::vector<std::vector<double>>& blink_windows);

nn::Checkpoint to_checkpoint(const BlinkCodecParams& params);
BlinkCodecParams codec_from_checkpoint(const nn::Checkpoint& ckpt);

}  // namespace gaze::blink
