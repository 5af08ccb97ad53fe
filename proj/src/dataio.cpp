// SPDX-License-Identifier: Apache-2.0
#include "gazegan/dataio.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>

#include "gazegan/blinkcodec.hpp"
#include "gazegan/error.hpp"
#include "gazegan/rng.hpp"
#include "gazegan/textio.hpp"

namespace gaze::data {

namespace {

constexpr int64_t kFrameValues = kWindowFrames * kChannels;

}  // namespace

char trait_letter(Trait trait) {
  switch (trait) {
    case Trait::openness: return 'O';
    case Trait::conscientiousness: return 'C';
    case Trait::extroversion: return 'E';
    case Trait::agreeableness: return 'A';
    case Trait::neuroticism: return 'N';
  }
  return '?';
}

Trait trait_from_letter(char letter) {
  switch (letter) {
    case 'O': return Trait::openness;
    case 'C': return Trait::conscientiousness;
    case 'E': return Trait::extroversion;
    case 'A': return Trait::agreeableness;
    case 'N': return Trait::neuroticism;
    default: throw ConfigError(std::string("unknown personality trait '") + letter + "'");
  }
}

LabelMode LabelMode::parse(const std::string& text) {
  if (text == "all_dims") return all_dims();
  if (text.size() == 1) return single(trait_from_letter(text[0]));
  throw ConfigError("mode must be 'all_dims' or one of O,C,E,A,N; got '" + text + "'");
}

std::string LabelMode::str() const {
  if (kind == Kind::all_dims) return "all_dims";
  return std::string(1, trait_letter(dim));
}

// --- parsing ------------------------------------------------------------

std::vector<GazeSample> parse_recording(const std::string& path, bool* averaged_pupils) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open recording: " + path);

  std::string line;
  if (!std::getline(in, line)) throw SchemaError("recording has no header: " + path);
  const auto header = split(std::string_view(trim(line)), ',');
  bool two_pupils = false;
  if (header.size() == 5) {
    if (header[0] != "t" || header[1] != "gaze_x" || header[2] != "gaze_y" ||
        header[3] != "pupil_left" || header[4] != "blink")
      throw SchemaError("unexpected recording header in " + path +
                        "; want t,gaze_x,gaze_y,pupil_left[,pupil_right],blink");
  } else if (header.size() == 6) {
    if (header[0] != "t" || header[1] != "gaze_x" || header[2] != "gaze_y" ||
        header[3] != "pupil_left" || header[4] != "pupil_right" || header[5] != "blink")
      throw SchemaError("unexpected recording header in " + path +
                        "; want t,gaze_x,gaze_y,pupil_left[,pupil_right],blink");
    two_pupils = true;
  } else {
    throw SchemaError("recording header must have 5 or 6 columns: " + path);
  }
  if (averaged_pupils) *averaged_pupils = two_pupils;

  std::vector<GazeSample> samples;
  size_t line_number = 1;
  double prev_t = -std::numeric_limits<double>::infinity();
  while (std::getline(in, line)) {
    ++line_number;
    const auto trimmed = trim(line);
    if (trimmed.empty()) continue;
    const auto fields = split(trimmed, ',');
    if (fields.size() != header.size())
      throw ParseError("wrong field count in " + path, line_number);

    GazeSample s;
    double pupil_right = 0.0, blink_raw = 0.0;
    const bool ok = parse_double(fields[0], s.t) && parse_double(fields[1], s.gaze_x) &&
                    parse_double(fields[2], s.gaze_y) && parse_double(fields[3], s.pupil) &&
                    (!two_pupils || parse_double(fields[4], pupil_right)) &&
                    parse_double(fields[two_pupils ? 5 : 4], blink_raw);
    if (!ok) throw ParseError("unparsable numeric field in " + path, line_number);
    if (two_pupils) s.pupil = 0.5 * (s.pupil + pupil_right);
    if (blink_raw != 0.0 && blink_raw != 1.0)
      throw ParseError("blink must be 0 or 1 in " + path, line_number);
    s.blink = static_cast<int>(blink_raw);
    if (s.pupil < 0.0)
      throw ParseError("negative pupil diameter in " + path, line_number);
    if (s.t < prev_t)
      throw ParseError("timestamps must be non-decreasing in " + path, line_number);
    prev_t = s.t;
    samples.push_back(s);
  }
  return samples;
}

std::map<std::string, PersonalityProfile> parse_personality_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open personality file: " + path);

  std::string line;
  if (!std::getline(in, line)) throw SchemaError("personality file has no header: " + path);
  const auto header = split(std::string_view(trim(line)), ',');
  const std::vector<std::string> want = {"participant_id", "O", "C", "E", "A", "N"};
  if (std::vector<std::string>(header.begin(), header.end()) != want)
    throw SchemaError("personality header must be participant_id,O,C,E,A,N: " + path);

  std::map<std::string, PersonalityProfile> profiles;
  size_t line_number = 1;
  while (std::getline(in, line)) {
    ++line_number;
    const auto trimmed = trim(line);
    if (trimmed.empty()) continue;
    const auto fields = split(trimmed, ',');
    if (fields.size() != 6)
      throw ParseError("wrong field count in " + path, line_number);
    PersonalityProfile p;
    for (int i = 0; i < 5; ++i) {
      int64_t bin = 0;
      if (!parse_int(fields[static_cast<size_t>(i + 1)], bin) || bin < 0 || bin > 2)
        throw ParseError("personality bins must be 0, 1 or 2 in " + path, line_number);
      p.bins[static_cast<size_t>(i)] = static_cast<int>(bin);
    }
    const std::string id(trim(fields[0]));
    if (id.empty()) throw ParseError("empty participant_id in " + path, line_number);
    if (!profiles.emplace(id, p).second)
      throw ParseError("duplicate participant_id '" + id + "' in " + path, line_number);
  }
  return profiles;
}

void save_window_csv(const GazeWindow& device_window, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write window CSV: " + path);
  out << "t,gaze_x,gaze_y,pupil_left,blink\n";
  const int64_t rows = static_cast<int64_t>(device_window.frames.size()) / kChannels;
  for (int64_t i = 0; i < rows; ++i) {
    out << format_g17(static_cast<double>(i) / kSampleRateHz) << ','
        << format_g17(device_window.at(i, 0)) << ',' << format_g17(device_window.at(i, 1))
        << ',' << format_g17(device_window.at(i, 2)) << ','
        << static_cast<int>(device_window.at(i, 3)) << '\n';
  }
  if (!out) throw IoError("window CSV write failed: " + path);
}

// --- windowing ----------------------------------------------------------

std::vector<std::vector<double>> window_stream(const std::vector<GazeSample>& samples,
                                               int64_t size, int64_t stride) {
  if (size < 1) throw ContractError("window size must be positive");
  if (stride < 1) throw ContractError("window stride must be positive");
  std::vector<std::vector<double>> windows;
  const int64_t n = static_cast<int64_t>(samples.size());
  for (int64_t start = 0; start + size <= n; start += stride) {
    std::vector<double> frames(static_cast<size_t>(size * kChannels));
    for (int64_t i = 0; i < size; ++i) {
      const auto& s = samples[static_cast<size_t>(start + i)];
      frames[static_cast<size_t>(i * kChannels + 0)] = s.gaze_x;
      frames[static_cast<size_t>(i * kChannels + 1)] = s.gaze_y;
      frames[static_cast<size_t>(i * kChannels + 2)] = s.pupil;
      frames[static_cast<size_t>(i * kChannels + 3)] = static_cast<double>(s.blink);
    }
    windows.push_back(std::move(frames));
  }
  return windows;
}

bool quality_filter(const std::vector<double>& frames) {
  const int64_t rows = static_cast<int64_t>(frames.size()) / kChannels;
  for (int64_t i = 0; i < rows; ++i) {
    const double x = frames[static_cast<size_t>(i * kChannels + 0)];
    const double y = frames[static_cast<size_t>(i * kChannels + 1)];
    const double pupil = frames[static_cast<size_t>(i * kChannels + 2)];
    if (x < 0.0 || x > 1.0 || y < 0.0 || y > 1.0 || pupil <= 0.0) return false;
  }
  return true;
}

// --- normalization ------------------------------------------------------

namespace {

void check_stats(const NormStats& stats) {
  if (!(stats.pupil_min < stats.pupil_max))
    throw StatsError("degenerate normalization stats: pupil_min " +
                     format_g17(stats.pupil_min) + " >= pupil_max " +
                     format_g17(stats.pupil_max));
}

}  // namespace

std::vector<double> normalize_window(const std::vector<double>& frames,
                                     const NormStats& stats) {
  check_stats(stats);
  if (static_cast<int64_t>(frames.size()) % kChannels != 0)
    throw ContractError("window frame buffer size must be a multiple of 4");
  std::vector<double> out(frames.size());
  const int64_t rows = static_cast<int64_t>(frames.size()) / kChannels;
  const double span = stats.pupil_max - stats.pupil_min;
  for (int64_t i = 0; i < rows; ++i) {
    const size_t base = static_cast<size_t>(i * kChannels);
    out[base + 0] = 2.0 * frames[base + 0] - 1.0;
    out[base + 1] = 2.0 * frames[base + 1] - 1.0;
    out[base + 2] = std::clamp(2.0 * (frames[base + 2] - stats.pupil_min) / span - 1.0,
                               -1.0, 1.0);
    out[base + 3] = frames[base + 3];  // blink stays {0,1}
  }
  return out;
}

std::vector<double> denormalize_window(const std::vector<double>& frames,
                                       const NormStats& stats) {
  check_stats(stats);
  std::vector<double> out(frames.size());
  const int64_t rows = static_cast<int64_t>(frames.size()) / kChannels;
  const double span = stats.pupil_max - stats.pupil_min;
  for (int64_t i = 0; i < rows; ++i) {
    const size_t base = static_cast<size_t>(i * kChannels);
    out[base + 0] = std::clamp((frames[base + 0] + 1.0) / 2.0, 0.0, 1.0);
    out[base + 1] = std::clamp((frames[base + 1] + 1.0) / 2.0, 0.0, 1.0);
    const double p = std::clamp(frames[base + 2], -1.0, 1.0);
    out[base + 2] = stats.pupil_min + (p + 1.0) / 2.0 * span;
    out[base + 3] = blink::binarize_value(frames[base + 3]);
  }
  return out;
}

NormStats compute_stats(const std::vector<std::vector<double>>& device_windows) {
  if (device_windows.empty()) throw ContractError("compute_stats: no windows");
  NormStats stats{std::numeric_limits<double>::infinity(),
                  -std::numeric_limits<double>::infinity()};
  for (const auto& frames : device_windows) {
    const int64_t rows = static_cast<int64_t>(frames.size()) / kChannels;
    for (int64_t i = 0; i < rows; ++i) {
      const double pupil = frames[static_cast<size_t>(i * kChannels + 2)];
      stats.pupil_min = std::min(stats.pupil_min, pupil);
      stats.pupil_max = std::max(stats.pupil_max, pupil);
    }
  }
  return stats;
}

void save_stats(const NormStats& stats, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write stats file: " + path);
  out << "pupil_min=" << format_g17(stats.pupil_min) << "\n";
  out << "pupil_max=" << format_g17(stats.pupil_max) << "\n";
  out << "format_version=1\n";
  if (!out) throw IoError("stats write failed: " + path);
}

NormStats load_stats(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open stats file: " + path);
  NormStats stats;
  bool have_min = false, have_max = false, have_version = false;
  std::string line;
  size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    const auto trimmed = trim(line);
    if (trimmed.empty()) continue;
    const auto pos = trimmed.find('=');
    if (pos == std::string_view::npos) throw ParseError("stats line needs key=value", line_number);
    const auto key = trim(trimmed.substr(0, pos));
    const auto value = trim(trimmed.substr(pos + 1));
    if (key == "pupil_min") {
      have_min = parse_double(value, stats.pupil_min);
      if (!have_min) throw ParseError("bad pupil_min", line_number);
    } else if (key == "pupil_max") {
      have_max = parse_double(value, stats.pupil_max);
      if (!have_max) throw ParseError("bad pupil_max", line_number);
    } else if (key == "format_version") {
      if (value != "1") throw SchemaError("unsupported stats format_version in " + path);
      have_version = true;
    } else {
      throw SchemaError("unknown stats key '" + std::string(key) + "' in " + path);
    }
  }
  if (!have_min || !have_max || !have_version)
    throw SchemaError("stats file incomplete: " + path);
  return stats;
}

// --- labels -------------------------------------------------------------

int64_t profile_index(const PersonalityProfile& profile) {
  int64_t index = 0;
  for (int bin : profile.bins) {
    if (bin < 0 || bin > 2) throw ContractError("personality bins must be 0, 1 or 2");
    index = index * 3 + bin;
  }
  return index;
}

PersonalityProfile profile_from_index(int64_t index) {
  if (index < 0 || index >= kAllDimsClasses)
    throw IndexError("profile index outside [0, 243)");
  PersonalityProfile p;
  for (int i = 4; i >= 0; --i) {
    p.bins[static_cast<size_t>(i)] = static_cast<int>(index % 3);
    index /= 3;
  }
  return p;
}

ClassLabel encode_label(const PersonalityProfile& profile, const LabelMode& mode) {
  ClassLabel label;
  label.mode = mode;
  if (mode.kind == LabelMode::Kind::all_dims) {
    label.index = profile_index(profile);
  } else {
    label.index = profile.bins[static_cast<size_t>(mode.dim)];
    if (label.index < 0 || label.index > 2)
      throw ContractError("personality bins must be 0, 1 or 2");
  }
  return label;
}

// --- dataset ------------------------------------------------------------

std::pair<std::vector<std::string>, std::vector<std::string>> split_participants(
    std::vector<std::string> ids, double test_fraction, uint64_t seed) {
  if (ids.size() < 2)
    throw ContractError("cannot split: need at least 2 participants, have " +
                        std::to_string(ids.size()));
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw ContractError("test_fraction must be in (0,1)");

  std::sort(ids.begin(), ids.end());
  nn::Rng rng(seed);
  nn::shuffle(ids, rng);

  const int64_t n = static_cast<int64_t>(ids.size());
  int64_t n_test = static_cast<int64_t>(std::floor(test_fraction * static_cast<double>(n)));
  n_test = std::clamp<int64_t>(n_test, 1, n - 1);

  std::vector<std::string> test(ids.begin(), ids.begin() + n_test);
  std::vector<std::string> train(ids.begin() + n_test, ids.end());
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {train, test};
}

std::vector<int64_t> Dataset::seen_classes() const {
  std::set<int64_t> seen;
  for (const auto& w : train) seen.insert(w.label.index);
  return {seen.begin(), seen.end()};
}

Dataset build_dataset(const std::string& data_dir, const std::string& personality_path,
                      const LabelMode& mode, int64_t stride, double test_fraction,
                      uint64_t seed, PrepareReport* report) {
  const auto profiles = parse_personality_file(personality_path);
  if (profiles.empty()) throw ContractError("personality file lists no participants");

  PrepareReport local;
  struct ParticipantWindows {
    std::string id;
    ClassLabel label;
    std::vector<std::vector<double>> device_windows;
  };
  std::vector<ParticipantWindows> per_participant;
  for (const auto& [id, profile] : profiles) {
    const auto path = std::filesystem::path(data_dir) / (id + ".csv");
    bool averaged = false;
    const auto samples = parse_recording(path.string(), &averaged);
    local.averaged_pupils |= averaged;

    ParticipantWindows pw;
    pw.id = id;
    pw.label = encode_label(profile, mode);
    for (auto& frames : window_stream(samples, kWindowFrames, stride)) {
      ++local.windows_total;
      if (quality_filter(frames))
        pw.device_windows.push_back(std::move(frames));
      else
        ++local.windows_rejected;
    }
    if (!pw.device_windows.empty()) per_participant.push_back(std::move(pw));
  }
  local.participants = static_cast<int64_t>(per_participant.size());
  if (per_participant.empty())
    throw ContractError("no windows survived the quality test");

  std::vector<std::string> ids;
  ids.reserve(per_participant.size());
  for (const auto& pw : per_participant) ids.push_back(pw.id);
  const auto [train_ids, test_ids] = split_participants(ids, test_fraction, seed);

  const auto in_set = [](const std::vector<std::string>& set, const std::string& id) {
    return std::binary_search(set.begin(), set.end(), id);
  };

  std::vector<std::vector<double>> train_device;
  for (const auto& pw : per_participant)
    if (in_set(train_ids, pw.id))
      for (const auto& w : pw.device_windows) train_device.push_back(w);
  if (train_device.empty()) throw ContractError("training split has no windows");

  Dataset ds;
  ds.mode = mode;
  ds.stride = stride;
  ds.stats = compute_stats(train_device);

  double pupil_sum = 0.0;
  int64_t pupil_count = 0;
  for (const auto& frames : train_device) {
    const int64_t rows = static_cast<int64_t>(frames.size()) / kChannels;
    for (int64_t i = 0; i < rows; ++i) {
      pupil_sum += frames[static_cast<size_t>(i * kChannels + 2)];
      ++pupil_count;
    }
  }
  ds.pupil_mean = pupil_sum / static_cast<double>(pupil_count);

  for (const auto& pw : per_participant) {
    auto& side = in_set(train_ids, pw.id) ? ds.train : ds.test;
    for (const auto& frames : pw.device_windows) {
      GazeWindow w;
      w.frames = normalize_window(frames, ds.stats);
      w.label = pw.label;
      w.participant_id = pw.id;
      side.push_back(std::move(w));
    }
  }

  if (report) *report = local;
  return ds;
}

// --- dataset file -------------------------------------------------------

namespace {

constexpr char kWindowsMagic[4] = {'G', 'W', 'I', 'N'};

static_assert(std::endian::native == std::endian::little,
              "dataset format assumes a little-endian host");

template <typename T>
void write_pod(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw IoError("dataset file truncated");
  return value;
}

void write_window(std::ostream& out, const GazeWindow& w) {
  write_pod<uint32_t>(out, static_cast<uint32_t>(w.participant_id.size()));
  out.write(w.participant_id.data(), static_cast<std::streamsize>(w.participant_id.size()));
  write_pod<int64_t>(out, w.label.index);
  out.write(reinterpret_cast<const char*>(w.frames.data()),
            static_cast<std::streamsize>(w.frames.size() * sizeof(double)));
}

GazeWindow read_window(std::istream& in, const LabelMode& mode) {
  GazeWindow w;
  const auto id_len = read_pod<uint32_t>(in);
  w.participant_id.resize(id_len);
  in.read(w.participant_id.data(), id_len);
  w.label.mode = mode;
  w.label.index = read_pod<int64_t>(in);
  w.frames.resize(static_cast<size_t>(kFrameValues));
  in.read(reinterpret_cast<char*>(w.frames.data()),
          static_cast<std::streamsize>(w.frames.size() * sizeof(double)));
  if (!in) throw IoError("dataset file truncated");
  return w;
}

}  // namespace

void save_dataset(const Dataset& dataset, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write dataset file: " + path);
  out.write(kWindowsMagic, 4);
  write_pod<uint32_t>(out, 1u);  // version
  write_pod<uint8_t>(out, static_cast<uint8_t>(dataset.mode.kind));
  write_pod<uint8_t>(out, static_cast<uint8_t>(dataset.mode.dim));
  write_pod<int64_t>(out, dataset.stride);
  write_pod<double>(out, dataset.stats.pupil_min);
  write_pod<double>(out, dataset.stats.pupil_max);
  write_pod<double>(out, dataset.pupil_mean);
  write_pod<uint64_t>(out, dataset.train.size());
  write_pod<uint64_t>(out, dataset.test.size());
  for (const auto& w : dataset.train) write_window(out, w);
  for (const auto& w : dataset.test) write_window(out, w);
  if (!out) throw IoError("dataset write failed: " + path);
}

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open dataset file: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kWindowsMagic, 4) != 0)
    throw IoError("not a GWIN dataset file: " + path);
  const auto version = read_pod<uint32_t>(in);
  if (version != 1) throw IoError("unsupported dataset version");

  Dataset ds;
  ds.mode.kind = static_cast<LabelMode::Kind>(read_pod<uint8_t>(in));
  ds.mode.dim = static_cast<Trait>(read_pod<uint8_t>(in));
  ds.stride = read_pod<int64_t>(in);
  ds.stats.pupil_min = read_pod<double>(in);
  ds.stats.pupil_max = read_pod<double>(in);
  ds.pupil_mean = read_pod<double>(in);
  const auto n_train = read_pod<uint64_t>(in);
  const auto n_test = read_pod<uint64_t>(in);
  ds.train.reserve(n_train);
  ds.test.reserve(n_test);
  for (uint64_t i = 0; i < n_train; ++i) ds.train.push_back(read_window(in, ds.mode));
  for (uint64_t i = 0; i < n_test; ++i) ds.test.push_back(read_window(in, ds.mode));
  return ds;
}

// --- batching -----------------------------------------------------------

nn::TensorPtr window_batch(const std::vector<GazeWindow>& windows,
                           const std::vector<int64_t>& indices) {
  const int64_t b_count = static_cast<int64_t>(indices.size());
  auto batch = nn::Tensor::zeros({b_count, kChannels, kWindowFrames});
  for (int64_t b = 0; b < b_count; ++b) {
    const auto& w = windows[static_cast<size_t>(indices[static_cast<size_t>(b)])];
    for (int64_t t = 0; t < kWindowFrames; ++t) {
      for (int64_t c = 0; c < 3; ++c)
        batch->data[static_cast<size_t>((b * kChannels + c) * kWindowFrames + t)] =
            w.at(t, c);
      // blink {0,1} -> {-1,1}, the scale generated windows use
      batch->data[static_cast<size_t>((b * kChannels + 3) * kWindowFrames + t)] =
          2.0 * w.at(t, 3) - 1.0;
    }
  }
  return batch;
}

}  // namespace gaze::data
