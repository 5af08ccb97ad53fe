// SPDX-License-Identifier: Apache-2.0
#include "gazegan/blinkcodec.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gazegan/adam.hpp"
#include "gazegan/error.hpp"
#include "gazegan/ops.hpp"

namespace gaze::blink {

namespace {

constexpr double kLeakAlpha = 0.2;
constexpr double kInitStd = 0.02;

nn::TensorPtr init_weight(std::vector<int64_t> shape, nn::Rng& rng) {
  auto t = nn::Tensor::zeros(std::move(shape), true);
  rng.fill_normal(t->data, kInitStd);
  return t;
}

}  // namespace

BlinkCodecParams BlinkCodecParams::init(const CodecConfig& config, nn::Rng& rng) {
  BlinkCodecParams p;
  p.window = config.window;
  p.hidden_dim = config.hidden_dim;
  p.latent_dim = config.latent_dim;
  p.enc_w1 = init_weight({p.hidden_dim, p.window}, rng);
  p.enc_b1 = nn::Tensor::zeros({p.hidden_dim}, true);
  p.enc_w2 = init_weight({p.latent_dim, p.hidden_dim}, rng);
  p.enc_b2 = nn::Tensor::zeros({p.latent_dim}, true);
  p.dec_w1 = init_weight({p.hidden_dim, p.latent_dim}, rng);
  p.dec_b1 = nn::Tensor::zeros({p.hidden_dim}, true);
  p.dec_w2 = init_weight({p.window, p.hidden_dim}, rng);
  p.dec_b2 = nn::Tensor::zeros({p.window}, true);
  return p;
}

std::vector<std::pair<std::string, nn::TensorPtr>> BlinkCodecParams::named_params() const {
  return {{"enc_w1", enc_w1}, {"enc_b1", enc_b1}, {"enc_w2", enc_w2}, {"enc_b2", enc_b2},
          {"dec_w1", dec_w1}, {"dec_b1", dec_b1}, {"dec_w2", dec_w2}, {"dec_b2", dec_b2}};
}

void BlinkCodecParams::set_requires_grad(bool on) const {
  for (auto& [name, t] : named_params()) {
    t->requires_grad = on;
    if (on) t->ensure_grad();
  }
}

nn::TensorPtr encode(nn::Tape* tape, const BlinkCodecParams& params,
                     const nn::TensorPtr& blink) {
  for (double v : blink->data)
    if (v != 0.0 && v != 1.0)
      throw ContractError("encode expects a binary blink vector");
  auto h = nn::leaky_relu(tape, nn::dense(tape, blink, params.enc_w1, params.enc_b1), kLeakAlpha);
  return nn::dense(tape, h, params.enc_w2, params.enc_b2);
}

nn::TensorPtr decode(nn::Tape* tape, const BlinkCodecParams& params,
                     const nn::TensorPtr& latent) {
  auto h = nn::leaky_relu(tape, nn::dense(tape, latent, params.dec_w1, params.dec_b1), kLeakAlpha);
  return nn::sigmoid(tape, nn::dense(tape, h, params.dec_w2, params.dec_b2));
}

std::vector<double> binarize(const std::vector<double>& continuous, double threshold) {
  std::vector<double> out(continuous.size());
  for (size_t i = 0; i < continuous.size(); ++i)
    out[i] = binarize_value(continuous[i], threshold);
  return out;
}

namespace {

nn::TensorPtr batch_tensor(const std::vector<std::vector<double>>& windows,
                           const std::vector<int64_t>& order, int64_t begin, int64_t end,
                           int64_t window_len) {
  const int64_t b_count = end - begin;
  auto batch = nn::Tensor::zeros({b_count, window_len});
  for (int64_t b = 0; b < b_count; ++b) {
    const auto& w = windows[static_cast<size_t>(order[static_cast<size_t>(begin + b)])];
    std::copy(w.begin(), w.end(), batch->data.begin() + b * window_len);
  }
  return batch;
}

}  // namespace

BlinkCodecParams train_autoencoder(const std::vector<std::vector<double>>& blink_windows,
                                   const CodecConfig& config,
                                   std::vector<CodecEpochLog>* log) {
  if (blink_windows.empty())
    throw ContractError("train_autoencoder: empty training set");
  for (const auto& w : blink_windows)
    if (static_cast<int64_t>(w.size()) != config.window)
      throw ContractError("train_autoencoder: window length mismatch");

  nn::Rng rng(config.seed);
  auto params = BlinkCodecParams::init(config, rng);
  auto named = params.named_params();

  std::vector<nn::AdamState> opt;
  opt.reserve(named.size());
  for (auto& [name, t] : named)
    opt.emplace_back(t->size(), config.lr, config.beta1, config.beta2);

  const int64_t n = static_cast<int64_t>(blink_windows.size());
  std::vector<int64_t> order(static_cast<size_t>(n));

  nn::Tape tape;
  for (int64_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    nn::shuffle(order, rng);
    double epoch_loss = 0.0;
    int64_t batches = 0;
    for (int64_t begin = 0; begin < n; begin += config.batch_size) {
      const int64_t end = std::min(n, begin + config.batch_size);
      auto batch = batch_tensor(blink_windows, order, begin, end, config.window);
      auto latent = encode(&tape, params, batch);
      auto recon = decode(&tape, params, latent);
      auto loss = nn::bce_loss(&tape, recon, batch);
      tape.backward(loss);
      for (size_t i = 0; i < named.size(); ++i) nn::adam_step(*named[i].second, opt[i]);
      for (auto& [name, t] : named) t->zero_grad();
      tape.clear();
      epoch_loss += loss->item();
      ++batches;
    }
    if (log) {
      CodecEpochLog entry{epoch, epoch_loss / static_cast<double>(batches), 0.0};
      if (config.log_accuracy) {
        const size_t probe_count = std::min<size_t>(blink_windows.size(), 1000);
        const std::vector<std::vector<double>> probe(blink_windows.begin(),
                                                     blink_windows.begin() + probe_count);
        entry.accuracy = reconstruction_accuracy(params, probe);
      }
      log->push_back(entry);
    }
  }
  return params;
}

double reconstruction_accuracy(const BlinkCodecParams& params,
                               const std::vector<std::vector<double>>& blink_windows,
                               double threshold) {
  if (blink_windows.empty())
    throw ContractError("reconstruction_accuracy: empty set");
  int64_t hits = 0, total = 0;
  for (const auto& w : blink_windows) {
    auto input = nn::Tensor::from({static_cast<int64_t>(w.size())}, w);
    auto recon = decode(nullptr, params, encode(nullptr, params, input));
    for (size_t i = 0; i < w.size(); ++i) {
      hits += binarize_value(recon->data[i], threshold) == w[i] ? 1 : 0;
      ++total;
    }
  }
  return static_cast<double>(hits) / static_cast<double>(total);
}

double reconstruction_loss(const BlinkCodecParams& params,
                           const std::vector<std::vector<double>>& blink_windows) {
  if (blink_windows.empty())
    throw ContractError("reconstruction_loss: empty set");
  double total = 0.0;
  for (const auto& w : blink_windows) {
    auto input = nn::Tensor::from({static_cast<int64_t>(w.size())}, w);
    auto recon = decode(nullptr, params, encode(nullptr, params, input));
    total += nn::bce_loss(nullptr, recon, input)->item();
  }
  return total / static_cast<double>(blink_windows.size());
}

nn::Checkpoint to_checkpoint(const BlinkCodecParams& params) {
  nn::Checkpoint ckpt;
  ckpt.component = nn::ComponentTag::codec;
  for (const auto& [name, t] : params.named_params())
    ckpt.params.emplace_back(name, t);
  return ckpt;
}

BlinkCodecParams codec_from_checkpoint(const nn::Checkpoint& ckpt) {
  if (ckpt.component != nn::ComponentTag::codec)
    throw IoError("checkpoint is not a codec checkpoint");
  BlinkCodecParams p;
  p.enc_w1 = ckpt.param("enc_w1");
  p.enc_b1 = ckpt.param("enc_b1");
  p.enc_w2 = ckpt.param("enc_w2");
  p.enc_b2 = ckpt.param("enc_b2");
  p.dec_w1 = ckpt.param("dec_w1");
  p.dec_b1 = ckpt.param("dec_b1");
  p.dec_w2 = ckpt.param("dec_w2");
  p.dec_b2 = ckpt.param("dec_b2");
  p.hidden_dim = p.enc_w1->dim(0);
  p.window = p.enc_w1->dim(1);
  p.latent_dim = p.enc_w2->dim(0);
  return p;
}

}  // namespace gaze::blink
