// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <limits>

#include "gazegan/cgan.hpp"
#include "gazegan/error.hpp"
#include "gazegan/ops.hpp"
#include "support.hpp"

using namespace gaze;
using testsupport::TempDir;
using testsupport::hash_doubles;

namespace {

gan::GanConfig tiny_config() {
  gan::GanConfig config;
  config.mode = data::LabelMode::single(data::Trait::extroversion);
  config.batch_size = 8;
  config.latent_dim = 8;
  config.embed_dim = 8;
  config.base_channels = 8;
  config.epochs = 2;
  config.seed = 13;
  config.checkpoint_interval = 0;
  return config;
}

blink::BlinkCodecParams tiny_codec(uint64_t seed = 31) {
  blink::CodecConfig config;
  config.hidden_dim = 16;
  config.latent_dim = 6;
  nn::Rng rng(seed);
  return blink::BlinkCodecParams::init(config, rng);
}

// Normalized windows whose gaze means depend on the class.
std::vector<data::GazeWindow> toy_windows(int64_t count, uint64_t seed) {
  nn::Rng rng(seed);
  std::vector<data::GazeWindow> windows;
  const double means[3] = {-0.5, 0.0, 0.5};
  for (int64_t i = 0; i < count; ++i) {
    const int64_t cls = i % 3;
    data::GazeWindow w;
    w.label = {data::LabelMode::single(data::Trait::extroversion), cls};
    w.participant_id = "t" + std::to_string(i % 5);
    w.frames.resize(static_cast<size_t>(data::kWindowFrames * data::kChannels));
    for (int64_t t = 0; t < data::kWindowFrames; ++t) {
      w.at(t, 0) = means[cls] + 0.05 * rng.normal();
      w.at(t, 1) = -means[cls] + 0.05 * rng.normal();
      w.at(t, 2) = 0.3 * rng.normal();
      w.at(t, 3) = rng.uniform() < 0.03 ? 1.0 : 0.0;
    }
    windows.push_back(std::move(w));
  }
  return windows;
}

uint64_t param_hash(const std::vector<std::pair<std::string, nn::TensorPtr>>& named) {
  uint64_t h = 0;
  for (const auto& [name, t] : named) h ^= hash_doubles(t->data);
  return h;
}

}  // namespace

TEST_CASE("generator emits normalized 300x4 windows deterministically") {
  auto config = tiny_config();
  auto codec = tiny_codec();
  nn::Rng rng(1);
  auto g = gan::GeneratorParams::init(config, codec.latent_dim, rng);

  auto z = testsupport::random_tensor({5, config.latent_dim}, rng, false);
  const std::vector<int64_t> labels = {0, 1, 2, 1, 0};
  auto out = gan::generator_forward(nullptr, g, codec, z, labels);
  REQUIRE(out->shape == std::vector<int64_t>{5, 4, 300});
  for (double v : out->data) {
    CHECK(v > -1.0);
    CHECK(v < 1.0);
  }

  auto again = gan::generator_forward(nullptr, g, codec, z, labels);
  CHECK(std::memcmp(out->data.data(), again->data.data(),
                    out->data.size() * sizeof(double)) == 0);

  CHECK_THROWS_AS(gan::generator_forward(nullptr, g, codec, z, {0, 1, 2, 1, 7}), IndexError);
}

TEST_CASE("discriminator emits probabilities and reacts to the label") {
  auto config = tiny_config();
  nn::Rng rng(2);
  auto d = gan::DiscriminatorParams::init(config, rng);

  auto windows = toy_windows(3, 5);
  auto batch = data::window_batch(windows, {0, 1, 2});
  auto p = gan::discriminator_forward(nullptr, d, batch, {0, 1, 2});
  REQUIRE(p->shape == std::vector<int64_t>{3, 1});
  for (double v : p->data) {
    CHECK(v > 0.0);
    CHECK(v < 1.0);
  }

  auto p_same = gan::discriminator_forward(nullptr, d, batch, {0, 1, 2});
  CHECK(p->data == p_same->data);

  auto p_other = gan::discriminator_forward(nullptr, d, batch, {1, 2, 0});
  CHECK(p->data != p_other->data);
}

TEST_CASE("loss anchors at D == 0.5") {
  auto config = tiny_config();
  nn::Rng rng(3);
  auto d = gan::DiscriminatorParams::init(config, rng);
  // zeroed head forces sigmoid(0) = 0.5 regardless of input
  std::fill(d.fc_w->data.begin(), d.fc_w->data.end(), 0.0);
  std::fill(d.fc_b->data.begin(), d.fc_b->data.end(), 0.0);

  const double ln2 = std::log(2.0);
  for (int64_t batch : {1, 4, 9}) {
    auto windows = toy_windows(batch, 7);
    std::vector<int64_t> idx(static_cast<size_t>(batch));
    std::vector<int64_t> labels(static_cast<size_t>(batch), 1);
    for (int64_t i = 0; i < batch; ++i) idx[static_cast<size_t>(i)] = i;
    auto real = data::window_batch(windows, idx);
    auto fake = data::window_batch(windows, idx);

    const double dl = gan::d_loss(nullptr, d, real, fake, labels, labels)->item();
    CHECK(dl == doctest::Approx(2.0 * ln2).epsilon(1e-12));

    auto codec = tiny_codec();
    auto g = gan::GeneratorParams::init(config, codec.latent_dim, rng);
    auto z = testsupport::random_tensor({batch, config.latent_dim}, rng, false);
    const double gl = gan::g_loss(nullptr, g, d, codec, z, labels)->item();
    CHECK(gl == doctest::Approx(ln2).epsilon(1e-12));

    // literal saturating form: mean log(1-D) = -ln 2 at D == 0.5
    const double gs = gan::g_loss(nullptr, g, d, codec, z, labels, true)->item();
    CHECK(gs == doctest::Approx(-ln2).epsilon(1e-12));
  }
}

TEST_CASE("loss limits away from the anchor point") {
  auto config = tiny_config();
  nn::Rng rng(14);
  auto d = gan::DiscriminatorParams::init(config, rng);
  auto codec = tiny_codec();
  auto g = gan::GeneratorParams::init(config, codec.latent_dim, rng);

  // random-parameter d_loss is a sum of BCE terms, so never negative
  auto windows = toy_windows(4, 15);
  auto batch = data::window_batch(windows, {0, 1, 2, 3});
  const std::vector<int64_t> labels = {0, 1, 2, 0};
  CHECK(gan::d_loss(nullptr, d, batch, batch, labels, labels)->item() >= 0.0);

  // a fully fooled discriminator drives the generator loss to ~0
  std::fill(d.fc_w->data.begin(), d.fc_w->data.end(), 0.0);
  d.fc_b->data[0] = 40.0;  // sigmoid(40) saturates at ~1
  auto z = testsupport::random_tensor({4, config.latent_dim}, rng, false);
  CHECK(gan::g_loss(nullptr, g, d, codec, z, labels)->item() < 1e-6);
}

TEST_CASE("non-finite losses abort with a diagnostic checkpoint") {
  TempDir dir("nan");
  auto config = tiny_config();
  config.epochs = 1;
  config.checkpoint_interval = 0;
  auto codec = tiny_codec();
  auto windows = toy_windows(16, 61);
  gan::train_gan(windows, codec, config, dir.str());

  // poison the discriminator head and resume: the first loss comes out NaN
  gan::GanResume resume;
  resume.generator = nn::load_checkpoint(dir.file("generator.ckpt"));
  resume.discriminator = nn::load_checkpoint(dir.file("discriminator.ckpt"));
  resume.discriminator.param("fc_b")->data[0] = std::numeric_limits<double>::quiet_NaN();
  auto longer = config;
  longer.epochs = 2;
  CHECK_THROWS_AS(gan::train_gan(windows, codec, longer, dir.str(), &resume),
                  TrainingDiverged);
  CHECK(std::filesystem::exists(dir.file("generator_diverged.ckpt")));
  CHECK(std::filesystem::exists(dir.file("discriminator_diverged.ckpt")));
}

TEST_CASE("generator gradients are connected through decoder and discriminator") {
  auto config = tiny_config();
  auto codec = tiny_codec();
  codec.set_requires_grad(false);
  nn::Rng rng(4);
  auto g = gan::GeneratorParams::init(config, codec.latent_dim, rng);
  auto d = gan::DiscriminatorParams::init(config, rng);

  nn::Tape tape;
  auto z = testsupport::random_tensor({4, config.latent_dim}, rng, false);
  auto loss = gan::g_loss(&tape, g, d, codec, z, {0, 1, 2, 0});
  tape.backward(loss);

  for (const auto& [name, t] : g.named_params()) {
    double norm = 0.0;
    for (double v : t->grad) norm += v * v;
    CHECK(norm > 0.0);
  }
}

TEST_CASE("one-sided updates do not leak into the other network") {
  auto config = tiny_config();
  auto codec = tiny_codec();
  codec.set_requires_grad(false);
  nn::Rng rng(6);
  auto g = gan::GeneratorParams::init(config, codec.latent_dim, rng);
  auto d = gan::DiscriminatorParams::init(config, rng);

  auto windows = toy_windows(8, 21);
  auto real = data::window_batch(windows, {0, 1, 2, 3, 4, 5, 6, 7});
  const std::vector<int64_t> labels = {0, 1, 2, 0, 1, 2, 0, 1};

  std::vector<nn::AdamState> d_opt, g_opt;
  for (auto& [name, t] : d.named_params()) d_opt.emplace_back(t->size(), 1e-3);
  for (auto& [name, t] : g.named_params()) g_opt.emplace_back(t->size(), 1e-3);

  const uint64_t g_before = param_hash(g.named_params());
  {
    nn::Tape tape;
    auto z = testsupport::random_tensor({8, config.latent_dim}, rng, false);
    auto fake = gan::generator_forward(nullptr, g, codec, z, labels);
    auto loss = gan::d_loss(&tape, d, real, fake, labels, labels);
    tape.backward(loss);
    auto named = d.named_params();
    for (size_t i = 0; i < named.size(); ++i) nn::adam_step(*named[i].second, d_opt[i]);
  }
  CHECK(param_hash(g.named_params()) == g_before);

  const uint64_t d_after_step = param_hash(d.named_params());
  {
    nn::Tape tape;
    auto z = testsupport::random_tensor({8, config.latent_dim}, rng, false);
    auto loss = gan::g_loss(&tape, g, d, codec, z, labels);
    tape.backward(loss);
    auto named = g.named_params();
    for (size_t i = 0; i < named.size(); ++i) nn::adam_step(*named[i].second, g_opt[i]);
  }
  CHECK(param_hash(d.named_params()) == d_after_step);
  CHECK(param_hash(g.named_params()) != g_before);
}

TEST_CASE("train_gan runs, logs finite losses and is deterministic") {
  auto config = tiny_config();
  auto codec = tiny_codec();
  auto windows = toy_windows(24, 33);

  auto run1 = gan::train_gan(windows, codec, config);
  REQUIRE(run1.log.size() == 2);
  for (const auto& entry : run1.log) {
    CHECK(std::isfinite(entry.d_loss));
    CHECK(std::isfinite(entry.g_loss));
  }

  auto run2 = gan::train_gan(windows, codec, config);
  for (size_t i = 0; i < run1.log.size(); ++i) {
    CHECK(run1.log[i].d_loss == run2.log[i].d_loss);
    CHECK(run1.log[i].g_loss == run2.log[i].g_loss);
  }
  CHECK(param_hash(run1.g.named_params()) == param_hash(run2.g.named_params()));
  CHECK(param_hash(run1.d.named_params()) == param_hash(run2.d.named_params()));

  CHECK_THROWS_AS(gan::train_gan({}, codec, config), ContractError);
  auto big_batch = config;
  big_batch.batch_size = 1000;
  CHECK_THROWS_AS(gan::train_gan(windows, codec, big_batch), ContractError);
}

TEST_CASE("checkpoint resume continues bit-identically") {
  TempDir dir("resume");
  auto codec = tiny_codec();
  auto windows = toy_windows(24, 41);

  auto full_config = tiny_config();
  full_config.epochs = 4;
  full_config.checkpoint_interval = 0;
  auto full = gan::train_gan(windows, codec, full_config, dir.file("full"));

  auto half_config = full_config;
  half_config.epochs = 2;
  std::filesystem::create_directories(dir.file("half"));
  gan::train_gan(windows, codec, half_config, dir.file("half"));

  gan::GanResume resume;
  resume.generator = nn::load_checkpoint(dir.file("half") + "/generator.ckpt");
  resume.discriminator = nn::load_checkpoint(dir.file("half") + "/discriminator.ckpt");
  CHECK(resume.generator.epoch == 2);

  auto rest = gan::train_gan(windows, codec, full_config, "", &resume);
  REQUIRE(rest.log.size() == 2);
  CHECK(rest.log[0].epoch == 2);
  CHECK(rest.log[0].d_loss == full.log[2].d_loss);
  CHECK(rest.log[0].g_loss == full.log[2].g_loss);
  CHECK(rest.log[1].d_loss == full.log[3].d_loss);
  CHECK(rest.log[1].g_loss == full.log[3].g_loss);
  CHECK(param_hash(rest.g.named_params()) == param_hash(full.g.named_params()));
  CHECK(param_hash(rest.d.named_params()) == param_hash(full.d.named_params()));
}

TEST_CASE("generator checkpoint round-trip reproduces forward outputs bit-exactly") {
  TempDir dir("gckpt");
  auto config = tiny_config();
  auto codec = tiny_codec();
  nn::Rng rng(8);
  auto g = gan::GeneratorParams::init(config, codec.latent_dim, rng);

  nn::save_checkpoint(gan::generator_checkpoint(g, 3, {}, rng.state()),
                      dir.file("generator.ckpt"));
  auto loaded = gan::GeneratorParams::from_checkpoint(
      nn::load_checkpoint(dir.file("generator.ckpt")));
  CHECK(loaded.mode == g.mode);
  CHECK(loaded.latent_dim == g.latent_dim);

  auto z = testsupport::random_tensor({6, config.latent_dim}, rng, false);
  const std::vector<int64_t> labels = {0, 1, 2, 2, 1, 0};
  auto a = gan::generator_forward(nullptr, g, codec, z, labels);
  auto b = gan::generator_forward(nullptr, loaded, codec, z, labels);
  CHECK(std::memcmp(a->data.data(), b->data.data(), a->data.size() * sizeof(double)) == 0);
}

TEST_CASE("synthesize_batch yields device-space windows that pass the quality test") {
  auto config = tiny_config();
  config.mode = data::LabelMode::all_dims();
  auto codec = tiny_codec();
  nn::Rng rng(9);
  auto g = gan::GeneratorParams::init(config, codec.latent_dim, rng);
  const data::NormStats stats{2.0, 5.0};

  // class 242 is never in any training set here: unseen classes still work
  const data::ClassLabel unseen{data::LabelMode::all_dims(), 242};
  auto windows = gan::synthesize_batch(12, unseen, g, codec, stats, rng);
  REQUIRE(windows.size() == 12);
  for (const auto& w : windows) {
    CHECK(data::quality_filter(w.frames));
    CHECK(w.label.index == 242);
    for (int64_t t = 0; t < data::kWindowFrames; ++t) {
      const double blink = w.at(t, 3);
      CHECK((blink == 0.0 || blink == 1.0));
    }
  }

  const data::ClassLabel bad{data::LabelMode::all_dims(), 243};
  CHECK_THROWS_AS(gan::synthesize_batch(1, bad, g, codec, stats, rng), IndexError);
}
