// SPDX-License-Identifier: Apache-2.0
#include "cli_config.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>

#include <json.hpp>

#include "gazegan/error.hpp"
#include "gazegan/textio.hpp"

namespace gaze::cli {

namespace {

struct Field {
  std::string key;
  std::string description;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

void parse_or_throw(const std::string& key, const std::string& value, int64_t& out) {
  if (!parse_int(value, out))
    throw ConfigError("config key '" + key + "' needs an integer, got '" + value + "'");
}

void parse_or_throw(const std::string& key, const std::string& value, double& out) {
  if (!parse_double(value, out))
    throw ConfigError("config key '" + key + "' needs a number, got '" + value + "'");
}

void parse_or_throw(const std::string& key, const std::string& value, uint64_t& out) {
  int64_t v = 0;
  if (!parse_int(value, v) || v < 0)
    throw ConfigError("config key '" + key + "' needs a non-negative integer, got '" + value +
                      "'");
  out = static_cast<uint64_t>(v);
}

template <typename T>
Field field(const std::string& key, T RunConfig::* member, const std::string& desc) {
  return {key, desc,
          [key, member](RunConfig& c, const std::string& v) { parse_or_throw(key, v, c.*member); },
          [member](const RunConfig& c) {
            if constexpr (std::is_same_v<T, double>)
              return format_g17(c.*member);
            else
              return std::to_string(c.*member);
          }};
}

Field str_field(const std::string& key, std::string RunConfig::* member,
                const std::string& desc,
                std::vector<std::string> allowed = {}) {
  return {key, desc,
          [key, member, allowed](RunConfig& c, const std::string& v) {
            if (!allowed.empty() &&
                std::find(allowed.begin(), allowed.end(), v) == allowed.end()) {
              std::string options;
              for (const auto& a : allowed) options += (options.empty() ? "" : "|") + a;
              throw ConfigError("config key '" + key + "' must be one of " + options +
                                ", got '" + v + "'");
            }
            c.*member = v;
          },
          [member](const RunConfig& c) { return c.*member; }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      str_field("data_dir", &RunConfig::data_dir, "directory of <participant_id>.csv recordings"),
      str_field("personality_file", &RunConfig::personality_file,
                "personality CSV (participant_id,O,C,E,A,N)"),
      str_field("out_dir", &RunConfig::out_dir, "output directory for artifacts"),
      str_field("mode", &RunConfig::mode, "conditioning mode",
                {"all_dims", "O", "C", "E", "A", "N"}),
      field("stride", &RunConfig::stride, "sliding-window stride in samples"),
      field("test_fraction", &RunConfig::test_fraction, "participant fraction held out"),
      field("seed", &RunConfig::seed, "master seed for every stage"),
      field("batch_size", &RunConfig::batch_size, "GAN mini-batch size"),
      field("lr_g", &RunConfig::lr_g, "generator Adam learning rate"),
      field("lr_d", &RunConfig::lr_d, "discriminator Adam learning rate"),
      field("beta1", &RunConfig::beta1, "Adam beta1"),
      field("beta2", &RunConfig::beta2, "Adam beta2"),
      field("epochs", &RunConfig::epochs, "GAN training epochs"),
      field("latent_dim", &RunConfig::latent_dim, "generator noise dimension"),
      field("embed_dim", &RunConfig::embed_dim, "class embedding dimension"),
      field("base_channels", &RunConfig::base_channels, "network width (stage-1 channels)"),
      field("checkpoint_interval", &RunConfig::checkpoint_interval,
            "epochs between checkpoints, 0 = final only"),
      str_field("g_loss", &RunConfig::g_loss, "generator loss form",
                {"non_saturating", "saturating"}),
      str_field("label_sampling", &RunConfig::label_sampling, "fake-label distribution",
                {"uniform", "empirical"}),
      str_field("real_blink", &RunConfig::real_blink,
                "real blink channel seen by D: codec-bridged or raw",
                {"codec", "raw"}),
      field("codec_latent", &RunConfig::codec_latent, "blink codec latent dimension"),
      field("codec_hidden", &RunConfig::codec_hidden, "blink codec hidden width"),
      field("codec_epochs", &RunConfig::codec_epochs, "blink codec training epochs"),
      field("codec_lr", &RunConfig::codec_lr, "blink codec learning rate"),
      field("codec_batch_size", &RunConfig::codec_batch_size, "blink codec batch size"),
      field("classifier_channels", &RunConfig::classifier_channels, "classifier width"),
      field("classifier_epochs", &RunConfig::classifier_epochs, "classifier training epochs"),
      field("classifier_lr", &RunConfig::classifier_lr, "classifier learning rate"),
      field("classifier_batch_size", &RunConfig::classifier_batch_size, "classifier batch size"),
      field("synth_per_class", &RunConfig::synth_per_class,
            "windows synthesized per class during eval"),
      field("eye_x", &RunConfig::eye_x, "eye midpoint x (world units)"),
      field("eye_y", &RunConfig::eye_y, "eye midpoint y (world units)"),
      field("eye_z", &RunConfig::eye_z, "eye midpoint z (world units)"),
      field("view_distance", &RunConfig::view_distance, "viewing distance d"),
      field("h_fov", &RunConfig::h_fov, "horizontal field of view (degrees)"),
      field("v_fov", &RunConfig::v_fov, "vertical field of view (degrees)"),
      field("baseline_pupil", &RunConfig::baseline_pupil,
            "baseline pupil mm for the scale factor, 0 = dataset mean"),
      field("eyelid_slope", &RunConfig::eyelid_slope, "eyelid weight slope vs gaze y"),
      field("eyelid_intercept", &RunConfig::eyelid_intercept, "eyelid weight intercept"),
      field("fixture_participants", &RunConfig::fixture_participants,
            "make-fixture: participants per class"),
      field("fixture_samples", &RunConfig::fixture_samples,
            "make-fixture: samples per participant"),
  };
  return table;
}

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value) {
  for (const auto& f : fields()) {
    if (f.key == key) {
      f.set(*this, value);
      return;
    }
  }
  throw ConfigError("unknown config key '" + key + "'");
}

std::string RunConfig::canonical_text() const {
  std::map<std::string, std::string> kv;
  for (const auto& f : fields()) kv[f.key] = f.get(*this);
  // path fields do not affect pipeline behavior; leaving them out keeps the
  // hash comparable across workspaces
  kv.erase("data_dir");
  kv.erase("personality_file");
  kv.erase("out_dir");
  std::string text;
  for (const auto& [k, v] : kv) text += k + "=" + v + "\n";
  return text;
}

std::vector<RunConfig::KeyDoc> RunConfig::key_docs() {
  const RunConfig defaults;
  std::vector<KeyDoc> docs;
  for (const auto& f : fields())
    docs.push_back({f.key, f.get(defaults), f.description});
  return docs;
}

void load_config_file(RunConfig& config, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::string line;
  size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    auto text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    const auto pos = text.find('=');
    if (pos == std::string_view::npos)
      throw ConfigError("config line " + std::to_string(line_number) +
                        " is not 'key = value': " + std::string(text));
    config.set(std::string(trim(text.substr(0, pos))),
               std::string(trim(text.substr(pos + 1))));
  }
}

void apply_env_overrides(RunConfig& config) {
  if (const char* env = std::getenv("GAZE_GAN_SEED")) {
    int64_t seed = 0;
    if (!parse_int(env, seed) || seed < 0)
      throw ConfigError("GAZE_GAN_SEED must be a non-negative integer");
    config.seed = static_cast<uint64_t>(seed);
  }
}

void Manifest::write(const std::string& out_dir) const {
  nlohmann::json doc;
  doc["command"] = command;
  doc["config_hash"] = config_hash;
  doc["seed"] = seed;
  auto& list = doc["artifacts"] = nlohmann::json::array();
  for (const auto& path : artifacts) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("manifest: cannot read artifact " + path);
    const std::string bytes((std::istreambuf_iterator<char>(in)),
                            std::istreambuf_iterator<char>());
    list.push_back({{"path", std::filesystem::path(path).filename().string()},
                    {"fnv1a", hex64(fnv1a(bytes))}});
  }
  const auto manifest_path =
      std::filesystem::path(out_dir) / ("manifest_" + command + ".json");
  std::ofstream out(manifest_path);
  if (!out) throw IoError("cannot write manifest: " + manifest_path.string());
  out << doc.dump(2) << "\n";
}

}  // namespace gaze::cli
