// SPDX-License-Identifier: Apache-2.0
#include "gazegan/cgan.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <set>

#include "gazegan/adam.hpp"
#include "gazegan/error.hpp"
#include "gazegan/ops.hpp"

namespace gaze::gan {

namespace {

constexpr double kLeakAlpha = 0.2;
constexpr double kInitStd = 0.02;
constexpr int64_t kKernel = 4;
constexpr int64_t kStride = 2;
constexpr int64_t kPad = 1;
constexpr int64_t kSeqLen = data::kWindowFrames;  // 300
constexpr int64_t kSeqMid = kSeqLen / 2;          // 150
constexpr int64_t kSeqBase = kSeqLen / 4;         // 75

nn::TensorPtr init_weight(std::vector<int64_t> shape, nn::Rng& rng) {
  auto t = nn::Tensor::zeros(std::move(shape), true);
  rng.fill_normal(t->data, kInitStd);
  return t;
}

// Embedding rows act as inputs next to unit-variance noise, not as weights;
// unit scale keeps the class signal visible from the first step.
nn::TensorPtr init_embedding(std::vector<int64_t> shape, nn::Rng& rng) {
  auto t = nn::Tensor::zeros(std::move(shape), true);
  rng.fill_normal(t->data, 1.0);
  return t;
}

uint8_t mode_kind_byte(const data::LabelMode& mode) {
  return static_cast<uint8_t>(mode.kind);
}

data::LabelMode mode_from_bytes(uint8_t kind, uint8_t dim) {
  data::LabelMode mode;
  mode.kind = static_cast<data::LabelMode::Kind>(kind);
  mode.dim = static_cast<data::Trait>(dim);
  return mode;
}

}  // namespace

GeneratorParams GeneratorParams::init(const GanConfig& config, int64_t blink_latent,
                                      nn::Rng& rng) {
  GeneratorParams p;
  p.mode = config.mode;
  p.latent_dim = config.latent_dim;
  p.embed_dim = config.embed_dim;
  p.c1 = config.base_channels;
  p.c2 = config.base_channels / 2;
  p.blink_latent = blink_latent;
  p.embed = init_embedding({config.mode.class_count(), p.embed_dim}, rng);
  p.fc_w = init_weight({kSeqBase * p.c1, p.latent_dim + p.embed_dim}, rng);
  p.fc_b = nn::Tensor::zeros({kSeqBase * p.c1}, true);
  p.tconv1_w = init_weight({p.c1, p.c2, kKernel}, rng);
  p.tconv1_b = nn::Tensor::zeros({p.c2}, true);
  p.tconv2_w = init_weight({p.c2, data::kChannels, kKernel}, rng);
  p.tconv2_b = nn::Tensor::zeros({data::kChannels}, true);
  p.blink_w = init_weight({p.blink_latent, kSeqLen}, rng);
  p.blink_b = nn::Tensor::zeros({p.blink_latent}, true);
  return p;
}

std::vector<std::pair<std::string, nn::TensorPtr>> GeneratorParams::named_params() const {
  return {{"embed", embed},       {"fc_w", fc_w},         {"fc_b", fc_b},
          {"tconv1_w", tconv1_w}, {"tconv1_b", tconv1_b}, {"tconv2_w", tconv2_w},
          {"tconv2_b", tconv2_b}, {"blink_w", blink_w},   {"blink_b", blink_b}};
}

void GeneratorParams::set_requires_grad(bool on) const {
  for (auto& [name, t] : named_params()) {
    t->requires_grad = on;
    if (on) t->ensure_grad();
  }
}

GeneratorParams GeneratorParams::from_checkpoint(const nn::Checkpoint& ckpt) {
  if (ckpt.component != nn::ComponentTag::generator)
    throw IoError("checkpoint is not a generator checkpoint");
  GeneratorParams p;
  p.mode = mode_from_bytes(ckpt.mode_kind, ckpt.mode_dim);
  p.embed = ckpt.param("embed");
  p.fc_w = ckpt.param("fc_w");
  p.fc_b = ckpt.param("fc_b");
  p.tconv1_w = ckpt.param("tconv1_w");
  p.tconv1_b = ckpt.param("tconv1_b");
  p.tconv2_w = ckpt.param("tconv2_w");
  p.tconv2_b = ckpt.param("tconv2_b");
  p.blink_w = ckpt.param("blink_w");
  p.blink_b = ckpt.param("blink_b");
  p.embed_dim = p.embed->dim(1);
  p.c1 = p.tconv1_w->dim(0);
  p.c2 = p.tconv1_w->dim(1);
  p.latent_dim = p.fc_w->dim(1) - p.embed_dim;
  p.blink_latent = p.blink_w->dim(0);
  return p;
}

DiscriminatorParams DiscriminatorParams::init(const GanConfig& config, nn::Rng& rng) {
  DiscriminatorParams p;
  p.mode = config.mode;
  p.embed_dim = config.embed_dim;
  p.c1 = config.base_channels / 2;
  p.c2 = config.base_channels;
  p.embed = init_embedding({config.mode.class_count(), p.embed_dim}, rng);
  p.label_proj_w = init_weight({kSeqLen, p.embed_dim}, rng);
  p.label_proj_b = nn::Tensor::zeros({kSeqLen}, true);
  p.conv1_w = init_weight({p.c1, data::kChannels + 1, kKernel}, rng);
  p.conv1_b = nn::Tensor::zeros({p.c1}, true);
  p.conv2_w = init_weight({p.c2, p.c1, kKernel}, rng);
  p.conv2_b = nn::Tensor::zeros({p.c2}, true);
  p.fc_w = init_weight({1, p.c2 * kSeqBase}, rng);
  p.fc_b = nn::Tensor::zeros({1}, true);
  return p;
}

std::vector<std::pair<std::string, nn::TensorPtr>> DiscriminatorParams::named_params() const {
  return {{"embed", embed},
          {"label_proj_w", label_proj_w},
          {"label_proj_b", label_proj_b},
          {"conv1_w", conv1_w},
          {"conv1_b", conv1_b},
          {"conv2_w", conv2_w},
          {"conv2_b", conv2_b},
          {"fc_w", fc_w},
          {"fc_b", fc_b}};
}

void DiscriminatorParams::set_requires_grad(bool on) const {
  for (auto& [name, t] : named_params()) {
    t->requires_grad = on;
    if (on) t->ensure_grad();
  }
}

DiscriminatorParams DiscriminatorParams::from_checkpoint(const nn::Checkpoint& ckpt) {
  if (ckpt.component != nn::ComponentTag::discriminator)
    throw IoError("checkpoint is not a discriminator checkpoint");
  DiscriminatorParams p;
  p.mode = mode_from_bytes(ckpt.mode_kind, ckpt.mode_dim);
  p.embed = ckpt.param("embed");
  p.label_proj_w = ckpt.param("label_proj_w");
  p.label_proj_b = ckpt.param("label_proj_b");
  p.conv1_w = ckpt.param("conv1_w");
  p.conv1_b = ckpt.param("conv1_b");
  p.conv2_w = ckpt.param("conv2_w");
  p.conv2_b = ckpt.param("conv2_b");
  p.fc_w = ckpt.param("fc_w");
  p.fc_b = ckpt.param("fc_b");
  p.embed_dim = p.embed->dim(1);
  p.c1 = p.conv1_w->dim(0);
  p.c2 = p.conv2_w->dim(0);
  return p;
}

nn::TensorPtr generator_forward(nn::Tape* tape, const GeneratorParams& g,
                                const blink::BlinkCodecParams& codec,
                                const nn::TensorPtr& z,
                                const std::vector<int64_t>& labels) {
  if (z->rank() != 2 || z->dim(1) != g.latent_dim)
    throw ShapeError("generator z must be [B,latent_dim]");
  const int64_t batch = z->dim(0);
  if (static_cast<int64_t>(labels.size()) != batch)
    throw ShapeError("generator needs one label per z row");
  if (codec.latent_dim != g.blink_latent)
    throw ShapeError("codec latent dim does not match generator blink head");

  auto emb = nn::embedding_lookup(tape, g.embed, labels);
  auto seed = nn::concat(tape, z, emb, 1);
  auto h = nn::leaky_relu(tape, nn::dense(tape, seed, g.fc_w, g.fc_b), kLeakAlpha);
  h = nn::reshape(tape, h, {batch, g.c1, kSeqBase});
  h = nn::leaky_relu(tape, nn::conv1d_transpose(tape, h, g.tconv1_w, g.tconv1_b, kStride, kPad),
                     kLeakAlpha);
  auto raw = nn::conv1d_transpose(tape, h, g.tconv2_w, g.tconv2_b, kStride, kPad);

  auto cont = nn::tanh_act(tape, nn::slice_axis(tape, raw, 1, 0, 3));
  auto head = nn::reshape(tape, nn::slice_axis(tape, raw, 1, 3, 4), {batch, kSeqLen});
  auto blink_latent = nn::dense(tape, head, g.blink_w, g.blink_b);
  auto blink_prob = blink::decode(tape, codec, blink_latent);
  auto blink_pm1 = nn::reshape(tape, nn::affine(tape, blink_prob, 2.0, -1.0),
                               {batch, 1, kSeqLen});
  return nn::concat(tape, cont, blink_pm1, 1);
}

nn::TensorPtr discriminator_forward(nn::Tape* tape, const DiscriminatorParams& d,
                                    const nn::TensorPtr& windows,
                                    const std::vector<int64_t>& labels) {
  if (windows->rank() != 3 || windows->dim(1) != data::kChannels ||
      windows->dim(2) != kSeqLen)
    throw ShapeError("discriminator input must be [B,4,300]");
  const int64_t batch = windows->dim(0);
  if (static_cast<int64_t>(labels.size()) != batch)
    throw ShapeError("discriminator needs one label per window");

  auto emb = nn::embedding_lookup(tape, d.embed, labels);
  auto lab = nn::dense(tape, emb, d.label_proj_w, d.label_proj_b);
  auto lab_channel = nn::reshape(tape, lab, {batch, 1, kSeqLen});
  auto x = nn::concat(tape, windows, lab_channel, 1);
  auto h = nn::leaky_relu(tape, nn::conv1d(tape, x, d.conv1_w, d.conv1_b, kStride, kPad),
                          kLeakAlpha);
  h = nn::leaky_relu(tape, nn::conv1d(tape, h, d.conv2_w, d.conv2_b, kStride, kPad),
                     kLeakAlpha);
  auto flat = nn::reshape(tape, h, {batch, d.c2 * kSeqBase});
  return nn::sigmoid(tape, nn::dense(tape, flat, d.fc_w, d.fc_b));
}

nn::TensorPtr d_loss(nn::Tape* tape, const DiscriminatorParams& d,
                     const nn::TensorPtr& real, const nn::TensorPtr& fake,
                     const std::vector<int64_t>& real_labels,
                     const std::vector<int64_t>& fake_labels) {
  if (real->shape != fake->shape)
    throw ShapeError("d_loss real/fake batches must have equal shape");
  const int64_t batch = real->dim(0);
  auto p_real = discriminator_forward(tape, d, real, real_labels);
  auto p_fake = discriminator_forward(tape, d, fake, fake_labels);
  auto ones = nn::Tensor::from({batch, 1}, std::vector<double>(static_cast<size_t>(batch), 1.0));
  auto zeros = nn::Tensor::zeros({batch, 1});
  return nn::add(tape, nn::bce_loss(tape, p_real, ones), nn::bce_loss(tape, p_fake, zeros));
}

nn::TensorPtr g_loss(nn::Tape* tape, const GeneratorParams& g,
                     const DiscriminatorParams& d,
                     const blink::BlinkCodecParams& codec, const nn::TensorPtr& z,
                     const std::vector<int64_t>& labels, bool saturating) {
  auto fake = generator_forward(tape, g, codec, z, labels);
  auto p_fake = discriminator_forward(tape, d, fake, labels);
  const int64_t batch = z->dim(0);
  if (saturating) {
    // mean log(1 - D(G)) == -bce(D(G), 0); minimized literally.
    auto zeros = nn::Tensor::zeros({batch, 1});
    return nn::affine(tape, nn::bce_loss(tape, p_fake, zeros), -1.0, 0.0);
  }
  auto ones = nn::Tensor::from({batch, 1}, std::vector<double>(static_cast<size_t>(batch), 1.0));
  return nn::bce_loss(tape, p_fake, ones);
}

namespace {

struct OptSet {
  std::vector<std::pair<std::string, nn::TensorPtr>> params;
  std::vector<nn::AdamState> states;

  void init(const std::vector<std::pair<std::string, nn::TensorPtr>>& named, double lr,
            const GanConfig& config) {
    params = named;
    states.clear();
    for (auto& [name, t] : params)
      states.emplace_back(t->size(), lr, config.beta1, config.beta2);
  }

  void load(const std::vector<std::pair<std::string, nn::TensorPtr>>& named,
            const nn::Checkpoint& ckpt) {
    params = named;
    states.clear();
    for (auto& [name, t] : params) {
      bool found = false;
      for (const auto& [opt_name, state] : ckpt.opt_states) {
        if (opt_name == name) {
          states.push_back(state);
          found = true;
          break;
        }
      }
      if (!found) throw IoError("checkpoint missing optimizer state '" + name + "'");
    }
  }

  void step() {
    for (size_t i = 0; i < params.size(); ++i) nn::adam_step(*params[i].second, states[i]);
  }

  void zero_grads() {
    for (auto& [name, t] : params) t->zero_grad();
  }

  std::vector<std::pair<std::string, nn::AdamState>> named_states() const {
    std::vector<std::pair<std::string, nn::AdamState>> out;
    out.reserve(params.size());
    for (size_t i = 0; i < params.size(); ++i)
      out.emplace_back(params[i].first, states[i]);
    return out;
  }
};

void write_gan_checkpoints(const std::string& dir, const std::string& suffix,
                           const GeneratorParams& g, const DiscriminatorParams& d,
                           uint64_t epoch, const OptSet& g_opt, const OptSet& d_opt,
                           const nn::RngState& rng) {
  const auto base = std::filesystem::path(dir);
  nn::save_checkpoint(generator_checkpoint(g, epoch, g_opt.named_states(), rng),
                      (base / ("generator" + suffix + ".ckpt")).string());
  nn::save_checkpoint(discriminator_checkpoint(d, epoch, d_opt.named_states(), rng),
                      (base / ("discriminator" + suffix + ".ckpt")).string());
}

}  // namespace

GanTrainResult train_gan(const std::vector<data::GazeWindow>& train_windows,
                         const blink::BlinkCodecParams& codec, const GanConfig& config,
                         const std::string& checkpoint_dir, const GanResume* resume) {
  const int64_t n = static_cast<int64_t>(train_windows.size());
  if (n == 0) throw ContractError("train_gan: empty dataset");
  if (config.batch_size < 1 || config.batch_size > n)
    throw ContractError("train_gan: batch_size must be in [1, dataset size]");
  if (!checkpoint_dir.empty()) std::filesystem::create_directories(checkpoint_dir);

  // The decoder is a fixed bridge; only the generator learns through it.
  codec.set_requires_grad(false);

  std::set<int64_t> seen;
  std::vector<int64_t> all_labels(static_cast<size_t>(n));
  for (int64_t i = 0; i < n; ++i) {
    all_labels[static_cast<size_t>(i)] = train_windows[static_cast<size_t>(i)].label.index;
    seen.insert(all_labels[static_cast<size_t>(i)]);
  }
  const std::vector<int64_t> seen_classes(seen.begin(), seen.end());

  nn::Rng rng(config.seed);
  GanTrainResult result{GeneratorParams::init(config, codec.latent_dim, rng),
                        DiscriminatorParams::init(config, rng),
                        {}};
  OptSet g_opt, d_opt;
  g_opt.init(result.g.named_params(), config.lr_g, config);
  d_opt.init(result.d.named_params(), config.lr_d, config);
  int64_t start_epoch = 0;

  if (resume) {
    result.g = GeneratorParams::from_checkpoint(resume->generator);
    result.d = DiscriminatorParams::from_checkpoint(resume->discriminator);
    result.g.set_requires_grad(true);
    result.d.set_requires_grad(true);
    g_opt.load(result.g.named_params(), resume->generator);
    d_opt.load(result.d.named_params(), resume->discriminator);
    rng.set_state(resume->generator.rng);
    start_epoch = static_cast<int64_t>(resume->generator.epoch);
  }

  auto sample_fake_labels = [&](int64_t count) {
    std::vector<int64_t> labels(static_cast<size_t>(count));
    for (auto& l : labels) {
      if (config.label_sampling == GanConfig::LabelSampling::uniform)
        l = seen_classes[static_cast<size_t>(rng.below(static_cast<int64_t>(seen_classes.size())))];
      else
        l = all_labels[static_cast<size_t>(rng.below(n))];
    }
    return labels;
  };

  std::vector<int64_t> order(static_cast<size_t>(n));
  const int64_t steps = n / config.batch_size;

  // blink channel of a real batch: raw {-1,+1}, or decoder-codomain values
  // via the frozen codec bridge
  auto bridge_real_blinks = [&](const nn::TensorPtr& real_batch) {
    if (!config.real_blink_through_codec) return;
    const int64_t batch = real_batch->dim(0);
    auto blinks = nn::Tensor::zeros({batch, kSeqLen});
    for (int64_t b = 0; b < batch; ++b)
      for (int64_t t = 0; t < kSeqLen; ++t)
        blinks->data[static_cast<size_t>(b * kSeqLen + t)] =
            real_batch->data[static_cast<size_t>((b * data::kChannels + 3) * kSeqLen + t)] >
                    0.0
                ? 1.0
                : 0.0;
    auto probs = blink::decode(nullptr, codec, blink::encode(nullptr, codec, blinks));
    for (int64_t b = 0; b < batch; ++b)
      for (int64_t t = 0; t < kSeqLen; ++t)
        real_batch->data[static_cast<size_t>((b * data::kChannels + 3) * kSeqLen + t)] =
            2.0 * probs->data[static_cast<size_t>(b * kSeqLen + t)] - 1.0;
  };

  nn::Tape tape;
  for (int64_t epoch = start_epoch; epoch < config.epochs; ++epoch) {
    // epoch order must be a pure function of the rng state so a resumed run
    // shuffles identically
    std::iota(order.begin(), order.end(), 0);
    nn::shuffle(order, rng);
    double d_sum = 0.0, g_sum = 0.0;
    for (int64_t step = 0; step < steps; ++step) {
      const int64_t batch = config.batch_size;
      std::vector<int64_t> idx(order.begin() + step * batch,
                               order.begin() + (step + 1) * batch);
      auto real = data::window_batch(train_windows, idx);
      bridge_real_blinks(real);
      std::vector<int64_t> real_labels(static_cast<size_t>(batch));
      for (int64_t b = 0; b < batch; ++b)
        real_labels[static_cast<size_t>(b)] =
            train_windows[static_cast<size_t>(idx[static_cast<size_t>(b)])].label.index;

      // D update; the fake batch is generated off-tape so no generator
      // gradient exists.
      auto z_d = nn::Tensor::zeros({batch, config.latent_dim});
      rng.fill_normal(z_d->data, 1.0);
      const auto fake_labels = sample_fake_labels(batch);
      auto fake = generator_forward(nullptr, result.g, codec, z_d, fake_labels);
      auto loss_d = d_loss(&tape, result.d, real, fake, real_labels, fake_labels);
      tape.backward(loss_d);
      d_opt.step();
      d_opt.zero_grads();
      g_opt.zero_grads();
      tape.clear();

      // G update.
      auto z_g = nn::Tensor::zeros({batch, config.latent_dim});
      rng.fill_normal(z_g->data, 1.0);
      const auto gen_labels = sample_fake_labels(batch);
      auto loss_g =
          g_loss(&tape, result.g, result.d, codec, z_g, gen_labels, config.saturating_g_loss);
      tape.backward(loss_g);
      g_opt.step();
      g_opt.zero_grads();
      d_opt.zero_grads();
      tape.clear();

      const double dv = loss_d->item(), gv = loss_g->item();
      if (!std::isfinite(dv) || !std::isfinite(gv)) {
        if (!checkpoint_dir.empty())
          write_gan_checkpoints(checkpoint_dir, "_diverged", result.g, result.d,
                                static_cast<uint64_t>(epoch), g_opt, d_opt, rng.state());
        throw TrainingDiverged("train_gan: non-finite loss at epoch " +
                               std::to_string(epoch) + " step " + std::to_string(step) +
                               (checkpoint_dir.empty()
                                    ? ""
                                    : "; diagnostic checkpoint written to " + checkpoint_dir));
      }
      d_sum += dv;
      g_sum += gv;
    }
    result.log.push_back({epoch, d_sum / static_cast<double>(steps),
                          g_sum / static_cast<double>(steps)});

    const bool last = epoch + 1 == config.epochs;
    const bool interval_hit =
        config.checkpoint_interval > 0 && (epoch + 1) % config.checkpoint_interval == 0;
    if (!checkpoint_dir.empty() && (last || interval_hit))
      write_gan_checkpoints(checkpoint_dir, "", result.g, result.d,
                            static_cast<uint64_t>(epoch + 1), g_opt, d_opt, rng.state());
  }
  return result;
}

std::vector<data::GazeWindow> synthesize_batch(int64_t n, const data::ClassLabel& label,
                                               const GeneratorParams& g,
                                               const blink::BlinkCodecParams& codec,
                                               const data::NormStats& stats, nn::Rng& rng) {
  if (n < 1) throw ContractError("synthesize_batch: n must be positive");
  if (label.index < 0 || label.index >= g.mode.class_count())
    throw IndexError("class index " + std::to_string(label.index) + " outside [0, " +
                     std::to_string(g.mode.class_count()) + ")");

  std::vector<data::GazeWindow> out;
  out.reserve(static_cast<size_t>(n));
  constexpr int64_t kChunk = 256;
  for (int64_t done = 0; done < n; done += kChunk) {
    const int64_t batch = std::min(kChunk, n - done);
    auto z = nn::Tensor::zeros({batch, g.latent_dim});
    rng.fill_normal(z->data, 1.0);
    const std::vector<int64_t> labels(static_cast<size_t>(batch), label.index);
    auto gen = generator_forward(nullptr, g, codec, z, labels);

    for (int64_t b = 0; b < batch; ++b) {
      std::vector<double> frames(static_cast<size_t>(data::kWindowFrames * data::kChannels));
      for (int64_t t = 0; t < data::kWindowFrames; ++t) {
        for (int64_t c = 0; c < 3; ++c)
          frames[static_cast<size_t>(t * data::kChannels + c)] =
              gen->data[static_cast<size_t>((b * data::kChannels + c) * data::kWindowFrames + t)];
        // back from the (-1,1) training scale to a blink probability
        const double pm1 =
            gen->data[static_cast<size_t>((b * data::kChannels + 3) * data::kWindowFrames + t)];
        frames[static_cast<size_t>(t * data::kChannels + 3)] = (pm1 + 1.0) / 2.0;
      }
      data::GazeWindow w;
      w.frames = data::denormalize_window(frames, stats);
      w.label = label;
      w.participant_id = "synthetic";
      out.push_back(std::move(w));
    }
  }
  return out;
}

nn::Checkpoint generator_checkpoint(const GeneratorParams& g, uint64_t epoch,
                                    const std::vector<std::pair<std::string, nn::AdamState>>& opt,
                                    const nn::RngState& rng) {
  nn::Checkpoint ckpt;
  ckpt.component = nn::ComponentTag::generator;
  ckpt.mode_kind = mode_kind_byte(g.mode);
  ckpt.mode_dim = static_cast<uint8_t>(g.mode.dim);
  ckpt.epoch = epoch;
  for (const auto& [name, t] : g.named_params()) ckpt.params.emplace_back(name, t);
  ckpt.opt_states = opt;
  ckpt.rng = rng;
  return ckpt;
}

nn::Checkpoint discriminator_checkpoint(const DiscriminatorParams& d, uint64_t epoch,
                                        const std::vector<std::pair<std::string, nn::AdamState>>& opt,
                                        const nn::RngState& rng) {
  nn::Checkpoint ckpt;
  ckpt.component = nn::ComponentTag::discriminator;
  ckpt.mode_kind = mode_kind_byte(d.mode);
  ckpt.mode_dim = static_cast<uint8_t>(d.mode.dim);
  ckpt.epoch = epoch;
  for (const auto& [name, t] : d.named_params()) ckpt.params.emplace_back(name, t);
  ckpt.opt_states = opt;
  ckpt.rng = rng;
  return ckpt;
}

}  // namespace gaze::gan
