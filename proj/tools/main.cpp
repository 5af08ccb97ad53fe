// SPDX-License-Identifier: Apache-2.0
//
// gazegan command-line front end. Subcommands cover the pipeline end to end:
// prepare -> train-ae -> train-gan -> synth / eval / export-anim, plus
// make-fixture for a synthetic demo corpus.
//
// Exit codes: 0 success, 1 usage or config error, 2 runtime failure.
#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "cli_config.hpp"
#include "gazegan/anim.hpp"
#include "gazegan/blinkcodec.hpp"
#include "gazegan/cgan.hpp"
#include "gazegan/dataio.hpp"
#include "gazegan/error.hpp"
#include "gazegan/evalmetrics.hpp"
#include "gazegan/fixture.hpp"
#include "gazegan/textio.hpp"

namespace fs = std::filesystem;
using namespace gaze;

namespace {

// Per-stage rng streams derived from the master seed.
enum SeedStream : uint64_t {
  kSeedSplit = 0,
  kSeedCodec = 1,
  kSeedGan = 2,
  kSeedSynth = 3,
  kSeedClassifier = 4,
  kSeedEvalSynth = 5,
};

struct CliState {
  cli::RunConfig config;
  std::string config_path;
  std::vector<std::pair<std::string, std::string>> overrides;

  void finalize() {
    if (!config_path.empty()) cli::load_config_file(config, config_path);
    cli::apply_env_overrides(config);
    for (const auto& [key, value] : overrides) config.set(key, value);
  }
};

std::string flag_name(const std::string& key) {
  std::string name = "--" + key;
  for (auto& c : name)
    if (c == '_') c = '-';
  return name;
}

// Registers config keys as flags on a subcommand; values land in the
// override list so the file -> env -> flag precedence stays intact.
void add_key_flags(CLI::App* cmd, CliState& state, const std::vector<std::string>& keys) {
  static const auto docs = cli::RunConfig::key_docs();
  for (const auto& key : keys) {
    const auto doc = std::find_if(docs.begin(), docs.end(),
                                  [&](const auto& d) { return d.key == key; });
    std::string desc = doc->description;
    if (!doc->default_value.empty()) desc += " [default: " + doc->default_value + "]";
    cmd->add_option_function<std::string>(
        flag_name(key),
        [&state, key](const std::string& value) { state.overrides.emplace_back(key, value); },
        desc);
  }
}

void require_out_dir(const cli::RunConfig& config) {
  if (config.out_dir.empty())
    throw ConfigError("out_dir is required (flag --out-dir or config key out_dir)");
  fs::create_directories(config.out_dir);
}

std::string default_in_out(const cli::RunConfig& config, const std::string& given,
                           const std::string& name) {
  if (!given.empty()) return given;
  if (config.out_dir.empty())
    throw ConfigError(name + " path missing and no out_dir to look in");
  return (fs::path(config.out_dir) / name).string();
}

cli::Manifest make_manifest(const std::string& command, const cli::RunConfig& config) {
  cli::Manifest m;
  m.command = command;
  m.config_hash = hex64(fnv1a(config.canonical_text()));
  m.seed = config.seed;
  return m;
}

void write_training_log_csv(const std::string& path,
                            const std::vector<std::string>& header,
                            const std::vector<std::vector<double>>& rows) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write log: " + path);
  for (size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  for (const auto& row : rows) {
    for (size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      if (i == 0)
        out << static_cast<int64_t>(row[i]);
      else
        out << format_g17(row[i]);
    }
    out << '\n';
  }
}

data::ClassLabel resolve_class(const data::LabelMode& mode, const std::string& class_spec,
                               int64_t class_index) {
  if (!class_spec.empty()) {
    std::array<int, 5> bins{-1, -1, -1, -1, -1};
    for (const auto& part : split(class_spec, ',')) {
      const auto text = trim(part);
      if (text.size() < 3 || text[1] != '=')
        throw ConfigError("class spec entries look like O=2; got '" + std::string(text) + "'");
      const auto trait = data::trait_from_letter(text[0]);
      int64_t bin = 0;
      if (!parse_int(text.substr(2), bin) || bin < 0 || bin > 2)
        throw ConfigError("class spec bins must be 0, 1 or 2");
      bins[static_cast<size_t>(trait)] = static_cast<int>(bin);
    }
    if (mode.kind == data::LabelMode::Kind::single_dim) {
      const int bin = bins[static_cast<size_t>(mode.dim)];
      if (bin < 0)
        throw ConfigError("class spec must set the conditioned trait " +
                          std::string(1, data::trait_letter(mode.dim)));
      return {mode, bin};
    }
    data::PersonalityProfile profile;
    for (size_t i = 0; i < 5; ++i) {
      if (bins[i] < 0)
        throw ConfigError("all_dims class spec must set all five traits (O,C,E,A,N)");
      profile.bins[i] = bins[i];
    }
    return data::encode_label(profile, mode);
  }
  if (class_index < 0)
    throw ConfigError("give a class via --class or --class-index");
  if (class_index >= mode.class_count())
    throw ConfigError("class index " + std::to_string(class_index) + " outside [0, " +
                      std::to_string(mode.class_count()) + ")");
  return {mode, class_index};
}

std::vector<double> blink_column(const data::GazeWindow& window) {
  std::vector<double> blink(static_cast<size_t>(data::kWindowFrames));
  for (int64_t t = 0; t < data::kWindowFrames; ++t)
    blink[static_cast<size_t>(t)] = window.at(t, 3);
  return blink;
}

// --- subcommand bodies ----------------------------------------------------

int run_prepare(const cli::RunConfig& config) {
  if (config.data_dir.empty() || config.personality_file.empty())
    throw ConfigError("prepare needs data_dir and personality_file");
  require_out_dir(config);

  data::PrepareReport report;
  const auto dataset =
      data::build_dataset(config.data_dir, config.personality_file, config.label_mode(),
                          config.stride, config.test_fraction,
                          nn::Rng::derive(config.seed, kSeedSplit), &report);

  const auto windows_path = (fs::path(config.out_dir) / "windows.gwin").string();
  const auto stats_path = (fs::path(config.out_dir) / "stats.txt").string();
  data::save_dataset(dataset, windows_path);
  data::save_stats(dataset.stats, stats_path);

  std::cout << "prepare: " << report.participants << " participants, "
            << report.windows_total << " windows (" << report.windows_rejected
            << " rejected by the quality test)\n"
            << "train windows: " << dataset.train.size()
            << ", test windows: " << dataset.test.size() << "\n"
            << "pupil range: [" << format_g17(dataset.stats.pupil_min) << ", "
            << format_g17(dataset.stats.pupil_max) << "] mm"
            << (report.averaged_pupils ? " (left/right averaged)" : " (left pupil column)")
            << "\n";

  auto manifest = make_manifest("prepare", config);
  manifest.add(windows_path);
  manifest.add(stats_path);
  manifest.write(config.out_dir);
  return 0;
}

int run_train_ae(const cli::RunConfig& config, const std::string& windows_override) {
  require_out_dir(config);
  const auto dataset =
      data::load_dataset(default_in_out(config, windows_override, "windows.gwin"));
  if (dataset.train.empty()) throw ContractError("train-ae: dataset has no training windows");

  std::vector<std::vector<double>> blink_windows;
  blink_windows.reserve(dataset.train.size());
  for (const auto& w : dataset.train) blink_windows.push_back(blink_column(w));

  blink::CodecConfig codec_config;
  codec_config.hidden_dim = config.codec_hidden;
  codec_config.latent_dim = config.codec_latent;
  codec_config.lr = config.codec_lr;
  codec_config.beta1 = config.beta1;
  codec_config.beta2 = config.beta2;
  codec_config.batch_size = std::min<int64_t>(config.codec_batch_size,
                                              static_cast<int64_t>(blink_windows.size()));
  codec_config.epochs = config.codec_epochs;
  codec_config.seed = nn::Rng::derive(config.seed, kSeedCodec);

  std::vector<blink::CodecEpochLog> log;
  const auto codec = blink::train_autoencoder(blink_windows, codec_config, &log);

  const auto ckpt_path = (fs::path(config.out_dir) / "codec.ckpt").string();
  nn::save_checkpoint(blink::to_checkpoint(codec), ckpt_path);
  std::vector<std::vector<double>> rows;
  for (const auto& e : log) rows.push_back({static_cast<double>(e.epoch), e.loss});
  const auto log_path = (fs::path(config.out_dir) / "ae_log.csv").string();
  write_training_log_csv(log_path, {"epoch", "bce"}, rows);

  const double accuracy = blink::reconstruction_accuracy(codec, blink_windows);
  std::cout << "train-ae: " << log.size() << " epochs, final bce "
            << format_g17(log.back().loss) << ", train frame accuracy "
            << format_g17(accuracy) << "\n";

  auto manifest = make_manifest("train-ae", config);
  manifest.add(ckpt_path);
  manifest.add(log_path);
  manifest.write(config.out_dir);
  return 0;
}

gan::GanConfig gan_config_from(const cli::RunConfig& config, const data::LabelMode& mode) {
  gan::GanConfig gc;
  gc.batch_size = config.batch_size;
  gc.lr_g = config.lr_g;
  gc.lr_d = config.lr_d;
  gc.beta1 = config.beta1;
  gc.beta2 = config.beta2;
  gc.epochs = config.epochs;
  gc.seed = nn::Rng::derive(config.seed, kSeedGan);
  gc.mode = mode;
  gc.latent_dim = config.latent_dim;
  gc.embed_dim = config.embed_dim;
  gc.base_channels = config.base_channels;
  gc.checkpoint_interval = config.checkpoint_interval;
  gc.saturating_g_loss = config.g_loss == "saturating";
  gc.label_sampling = config.label_sampling == "empirical"
                          ? gan::GanConfig::LabelSampling::empirical
                          : gan::GanConfig::LabelSampling::uniform;
  gc.real_blink_through_codec = config.real_blink == "codec";
  return gc;
}

int run_train_gan(const cli::RunConfig& config, const std::string& windows_override,
                  const std::string& codec_override, bool resume) {
  require_out_dir(config);
  const auto dataset =
      data::load_dataset(default_in_out(config, windows_override, "windows.gwin"));
  const auto codec = blink::codec_from_checkpoint(
      nn::load_checkpoint(default_in_out(config, codec_override, "codec.ckpt")));

  const auto gc = gan_config_from(config, dataset.mode);

  gan::GanResume resume_state;
  const gan::GanResume* resume_ptr = nullptr;
  if (resume) {
    resume_state.generator =
        nn::load_checkpoint((fs::path(config.out_dir) / "generator.ckpt").string());
    resume_state.discriminator =
        nn::load_checkpoint((fs::path(config.out_dir) / "discriminator.ckpt").string());
    resume_ptr = &resume_state;
    std::cout << "train-gan: resuming from epoch " << resume_state.generator.epoch << "\n";
  }

  const auto result = gan::train_gan(dataset.train, codec, gc, config.out_dir, resume_ptr);

  std::vector<std::vector<double>> rows;
  for (const auto& e : result.log)
    rows.push_back({static_cast<double>(e.epoch), e.d_loss, e.g_loss});
  const auto log_path = (fs::path(config.out_dir) / "gan_log.csv").string();
  write_training_log_csv(log_path, {"epoch", "d_loss", "g_loss"}, rows);

  if (!result.log.empty())
    std::cout << "train-gan: " << result.log.size() << " epochs, final d_loss "
              << format_g17(result.log.back().d_loss) << ", g_loss "
              << format_g17(result.log.back().g_loss) << "\n";

  auto manifest = make_manifest("train-gan", config);
  manifest.add((fs::path(config.out_dir) / "generator.ckpt").string());
  manifest.add((fs::path(config.out_dir) / "discriminator.ckpt").string());
  manifest.add(log_path);
  manifest.write(config.out_dir);
  return 0;
}

int run_synth(const cli::RunConfig& config, const std::string& generator_path,
              const std::string& codec_path, const std::string& stats_path,
              const std::string& class_spec, int64_t class_index, int64_t count) {
  require_out_dir(config);
  const auto g = gan::GeneratorParams::from_checkpoint(
      nn::load_checkpoint(default_in_out(config, generator_path, "generator.ckpt")));
  const auto codec = blink::codec_from_checkpoint(
      nn::load_checkpoint(default_in_out(config, codec_path, "codec.ckpt")));
  const auto stats = data::load_stats(default_in_out(config, stats_path, "stats.txt"));

  const auto label = resolve_class(g.mode, class_spec, class_index);
  nn::Rng rng(nn::Rng::derive(config.seed, kSeedSynth));
  const auto windows = gan::synthesize_batch(count, label, g, codec, stats, rng);

  auto manifest = make_manifest("synth", config);
  for (size_t i = 0; i < windows.size(); ++i) {
    const auto path = (fs::path(config.out_dir) /
                       ("window_" + std::to_string(label.index) + "_" + std::to_string(i) +
                        ".csv"))
                          .string();
    data::save_window_csv(windows[i], path);
    manifest.add(path);
  }
  manifest.write(config.out_dir);
  std::cout << "synth: wrote " << windows.size() << " windows for class " << label.index
            << " (mode " << g.mode.str() << ")\n";
  return 0;
}

int run_eval(const cli::RunConfig& config, const std::string& windows_override,
             const std::string& generator_path, const std::string& codec_path,
             const std::string& classifier_path) {
  require_out_dir(config);
  const auto dataset =
      data::load_dataset(default_in_out(config, windows_override, "windows.gwin"));
  const auto g = gan::GeneratorParams::from_checkpoint(
      nn::load_checkpoint(default_in_out(config, generator_path, "generator.ckpt")));
  const auto codec = blink::codec_from_checkpoint(
      nn::load_checkpoint(default_in_out(config, codec_path, "codec.ckpt")));

  auto manifest = make_manifest("eval", config);

  // classifier: train on real training windows, or reuse a checkpoint
  eval::ClassifierParams classifier;
  double heldout_accuracy = 0.0;
  if (!classifier_path.empty()) {
    classifier = eval::classifier_from_checkpoint(nn::load_checkpoint(classifier_path));
    if (!dataset.test.empty())
      heldout_accuracy = eval::classification_accuracy(classifier, dataset.test);
  } else {
    eval::ClassifierConfig cc;
    cc.base_channels = config.classifier_channels;
    cc.lr = config.classifier_lr;
    cc.beta1 = config.beta1;
    cc.beta2 = config.beta2;
    cc.batch_size = std::min<int64_t>(config.classifier_batch_size,
                                      static_cast<int64_t>(dataset.train.size()));
    cc.epochs = config.classifier_epochs;
    cc.seed = nn::Rng::derive(config.seed, kSeedClassifier);
    classifier = eval::train_classifier(dataset.train, cc, dataset.test, &heldout_accuracy);
    const auto ckpt_path = (fs::path(config.out_dir) / "classifier.ckpt").string();
    nn::save_checkpoint(eval::classifier_checkpoint(classifier), ckpt_path);
    manifest.add(ckpt_path);
  }

  // synthesize per seen class; classifier consumes normalized copies, curves
  // use device space
  nn::Rng rng(nn::Rng::derive(config.seed, kSeedEvalSynth));
  std::vector<data::GazeWindow> synth_normalized;
  std::vector<eval::ClassCurve> trajectory_curves, pupil_curves;
  for (int64_t cls : classifier.class_map) {
    const data::ClassLabel label{dataset.mode, cls};
    const auto device_windows =
        gan::synthesize_batch(config.synth_per_class, label, g, codec, dataset.stats, rng);
    trajectory_curves.push_back(eval::average_trajectory(device_windows));
    pupil_curves.push_back(eval::average_pupil(device_windows));
    for (const auto& w : device_windows) {
      data::GazeWindow norm = w;
      norm.frames = data::normalize_window(w.frames, dataset.stats);
      synth_normalized.push_back(std::move(norm));
    }
  }

  const double synthetic_is = eval::inception_score(classifier, synth_normalized);
  const double real_is =
      dataset.test.empty() ? 0.0 : eval::inception_score(classifier, dataset.test);

  for (const auto& path :
       eval::emit_plot_data(trajectory_curves, dataset.mode, "trajectory", config.out_dir))
    manifest.add(path);
  for (const auto& path :
       eval::emit_plot_data(pupil_curves, dataset.mode, "pupil", config.out_dir))
    manifest.add(path);

  nlohmann::json scores;
  scores["mode"] = dataset.mode.str();
  scores["classes"] = classifier.class_map;
  scores["heldout_accuracy"] = heldout_accuracy;
  scores["real_test_inception_score"] = real_is;
  scores["synthetic_inception_score"] = synthetic_is;
  scores["synthetic_windows"] = synth_normalized.size();
  scores["real_test_windows"] = dataset.test.size();
  const auto scores_path = (fs::path(config.out_dir) / "scores.json").string();
  std::ofstream scores_out(scores_path);
  scores_out << scores.dump(2) << "\n";
  if (!scores_out) throw IoError("cannot write " + scores_path);
  manifest.add(scores_path);
  manifest.write(config.out_dir);

  std::cout << "eval: heldout accuracy " << format_g17(heldout_accuracy)
            << ", real-test IS " << format_g17(real_is) << ", synthetic IS "
            << format_g17(synthetic_is) << " over " << synth_normalized.size()
            << " windows\n";
  return 0;
}

int run_export_anim(const cli::RunConfig& config, const std::string& window_csv,
                    const std::string& stats_path, const std::string& windows_path,
                    std::string out_file) {
  if (window_csv.empty()) throw ConfigError("export-anim needs --window <csv>");
  require_out_dir(config);

  const auto samples = data::parse_recording(window_csv);
  if (static_cast<int64_t>(samples.size()) != data::kWindowFrames)
    throw ContractError("export-anim expects exactly 300 rows, got " +
                        std::to_string(samples.size()));
  data::GazeWindow window;
  auto frames = data::window_stream(samples, data::kWindowFrames, 1);
  window.frames = std::move(frames.front());

  double baseline = config.baseline_pupil;
  if (baseline <= 0.0) {
    const auto gwin = windows_path.empty()
                          ? (fs::path(config.out_dir) / "windows.gwin").string()
                          : windows_path;
    if (fs::exists(gwin)) {
      baseline = data::load_dataset(gwin).pupil_mean;
    } else {
      const auto stats =
          data::load_stats(default_in_out(config, stats_path, "stats.txt"));
      baseline = (stats.pupil_min + stats.pupil_max) / 2.0;
    }
  }

  anim::EyeRig rig;
  rig.eye_position = {config.eye_x, config.eye_y, config.eye_z};
  rig.viewing_distance = config.view_distance;
  rig.h_fov_deg = config.h_fov;
  rig.v_fov_deg = config.v_fov;
  anim::EyelidMap lid{config.eyelid_slope, config.eyelid_intercept};

  if (out_file.empty())
    out_file = (fs::path(config.out_dir) /
                (fs::path(window_csv).stem().string() + ".anim"))
                   .string();
  anim::export_animation(window, rig, baseline, out_file, lid);

  std::cout << "export-anim: wrote " << out_file << " (baseline pupil "
            << format_g17(baseline) << " mm)\n";
  auto manifest = make_manifest("export-anim", config);
  manifest.add(out_file);
  manifest.write(config.out_dir);
  return 0;
}

int run_make_fixture(const cli::RunConfig& config) {
  require_out_dir(config);
  fixture::ToyCorpusConfig fc;
  const auto mode = config.label_mode();
  if (mode.kind == data::LabelMode::Kind::single_dim) fc.trait = mode.dim;
  fc.participants_per_class = config.fixture_participants;
  fc.samples_per_participant = config.fixture_samples;
  fc.seed = config.seed;
  const auto personality = fixture::write_toy_corpus(config.out_dir, fc);
  std::cout << "make-fixture: wrote " << 3 * fc.participants_per_class
            << " recordings and " << personality << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"personality-conditioned gaze synthesis pipeline"};
  app.require_subcommand(1);

  CliState state;
  std::string windows_path, codec_path, generator_path, stats_path, classifier_path;
  std::string class_spec, window_csv, out_file;
  int64_t class_index = -1, synth_count = 1;
  bool resume = false;

  const std::vector<std::string> common_keys = {"out_dir", "seed", "mode"};

  auto* prepare = app.add_subcommand("prepare", "ingest recordings into windows + stats");
  prepare->add_option("--config", state.config_path, "flat key = value config file");
  add_key_flags(prepare, state,
                {"data_dir", "personality_file", "out_dir", "seed", "mode", "stride",
                 "test_fraction"});

  auto* train_ae = app.add_subcommand("train-ae", "pre-train the blink autoencoder");
  train_ae->add_option("--config", state.config_path, "flat key = value config file");
  train_ae->add_option("--windows", windows_path, "windows.gwin path [default: <out_dir>/windows.gwin]");
  add_key_flags(train_ae, state,
                {"out_dir", "seed", "codec_latent", "codec_hidden", "codec_epochs",
                 "codec_lr", "codec_batch_size", "beta1", "beta2"});

  auto* train_gan = app.add_subcommand("train-gan", "adversarial training");
  train_gan->add_option("--config", state.config_path, "flat key = value config file");
  train_gan->add_option("--windows", windows_path, "windows.gwin path [default: <out_dir>/windows.gwin]");
  train_gan->add_option("--codec", codec_path, "codec checkpoint [default: <out_dir>/codec.ckpt]");
  train_gan->add_flag("--resume", resume, "continue from <out_dir>/{generator,discriminator}.ckpt");
  add_key_flags(train_gan, state,
                {"out_dir", "seed", "batch_size", "lr_g", "lr_d", "beta1", "beta2", "epochs",
                 "latent_dim", "embed_dim", "base_channels", "checkpoint_interval", "g_loss",
                 "label_sampling", "real_blink"});

  auto* synth = app.add_subcommand("synth", "synthesize gaze windows for a class");
  synth->add_option("--config", state.config_path, "flat key = value config file");
  synth->add_option("--generator", generator_path, "generator checkpoint [default: <out_dir>/generator.ckpt]");
  synth->add_option("--codec", codec_path, "codec checkpoint [default: <out_dir>/codec.ckpt]");
  synth->add_option("--stats", stats_path, "stats file [default: <out_dir>/stats.txt]");
  synth->add_option("--class", class_spec, "named bins, e.g. O=2,C=1,E=0,A=1,N=2");
  synth->add_option("--class-index", class_index, "raw class index [default: unset]");
  synth->add_option("--n", synth_count, "number of windows [default: 1]");
  add_key_flags(synth, state, common_keys);

  auto* eval_cmd = app.add_subcommand("eval", "classifier + inception scores + plot data");
  eval_cmd->add_option("--config", state.config_path, "flat key = value config file");
  eval_cmd->add_option("--windows", windows_path, "windows.gwin path [default: <out_dir>/windows.gwin]");
  eval_cmd->add_option("--generator", generator_path, "generator checkpoint [default: <out_dir>/generator.ckpt]");
  eval_cmd->add_option("--codec", codec_path, "codec checkpoint [default: <out_dir>/codec.ckpt]");
  eval_cmd->add_option("--classifier", classifier_path, "reuse a classifier checkpoint instead of training");
  add_key_flags(eval_cmd, state,
                {"out_dir", "seed", "classifier_channels", "classifier_epochs",
                 "classifier_lr", "classifier_batch_size", "synth_per_class", "beta1",
                 "beta2"});

  auto* export_anim = app.add_subcommand("export-anim", "convert a window CSV to an animation file");
  export_anim->add_option("--config", state.config_path, "flat key = value config file");
  export_anim->add_option("--window", window_csv, "device-space window CSV (300 rows)");
  export_anim->add_option("--stats", stats_path, "stats file for the baseline fallback");
  export_anim->add_option("--windows", windows_path, "windows.gwin for the dataset pupil mean");
  export_anim->add_option("--out-file", out_file, "output path [default: <out_dir>/<window>.anim]");
  add_key_flags(export_anim, state,
                {"out_dir", "seed", "eye_x", "eye_y", "eye_z", "view_distance", "h_fov",
                 "v_fov", "baseline_pupil", "eyelid_slope", "eyelid_intercept"});

  auto* make_fixture = app.add_subcommand("make-fixture", "write a synthetic demo corpus");
  make_fixture->add_option("--config", state.config_path, "flat key = value config file");
  add_key_flags(make_fixture, state,
                {"out_dir", "seed", "mode", "fixture_participants", "fixture_samples"});

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    state.finalize();
    if (prepare->parsed()) return run_prepare(state.config);
    if (train_ae->parsed()) return run_train_ae(state.config, windows_path);
    if (train_gan->parsed())
      return run_train_gan(state.config, windows_path, codec_path, resume);
    if (synth->parsed())
      return run_synth(state.config, generator_path, codec_path, stats_path, class_spec,
                       class_index, synth_count);
    if (eval_cmd->parsed())
      return run_eval(state.config, windows_path, generator_path, codec_path, classifier_path);
    if (export_anim->parsed())
      return run_export_anim(state.config, window_csv, stats_path, windows_path, out_file);
    if (make_fixture->parsed()) return run_make_fixture(state.config);
    return 1;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
