// SPDX-License-Identifier: Apache-2.0
//
// Eye-tracking data ingestion: recording/personality CSV parsing, sliding
// windows with the strict quality test, [-1,1] normalization, label encoding
// and the participant-level train/test split.
#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "gazegan/tensor.hpp"

namespace gaze::data {

inline constexpr int64_t kWindowFrames = 300;  // 5 s at 60 Hz
inline constexpr int64_t kChannels = 4;        // gaze_x, gaze_y, pupil, blink
inline constexpr double kSampleRateHz = 60.0;
inline constexpr int64_t kAllDimsClasses = 243;  // 3^5

enum class Trait : int {
  openness = 0,
  conscientiousness,
  extroversion,
  agreeableness,
  neuroticism,
};

char trait_letter(Trait trait);
Trait trait_from_letter(char letter);

// Conditioning mode: one class per full five-trait combination (0..242), or
// the three bins of a single trait (0..2).
struct LabelMode {
  enum class Kind : uint8_t { all_dims = 0, single_dim = 1 };
  Kind kind = Kind::all_dims;
  Trait dim = Trait::openness;

  static LabelMode all_dims() { return {}; }
  static LabelMode single(Trait trait) { return {Kind::single_dim, trait}; }
  static LabelMode parse(const std::string& text);  // "all_dims" or "O".."N"

  int64_t class_count() const { return kind == Kind::all_dims ? kAllDimsClasses : 3; }
  std::string str() const;
  bool operator==(const LabelMode&) const = default;
};

// One 60 Hz record. gaze_x/gaze_y are device-space with valid range [0,1]
// but may stray outside it (that is what the quality test is for).
struct GazeSample {
  double t = 0.0;
  double gaze_x = 0.0;
  double gaze_y = 0.0;
  double pupil = 0.0;  // millimeters
  int blink = 0;       // 0 or 1
};

struct PersonalityProfile {
  std::array<int, 5> bins{};  // O,C,E,A,N; each 0=low, 1=medium, 2=high
};

struct ClassLabel {
  LabelMode mode;
  int64_t index = 0;
  bool operator==(const ClassLabel&) const = default;
};

// 300x4 frame matrix (rows = time) plus its personality label.
struct GazeWindow {
  std::vector<double> frames;  // kWindowFrames * kChannels, row-major
  ClassLabel label;
  std::string participant_id;

  double at(int64_t frame, int64_t channel) const {
    return frames[static_cast<size_t>(frame * kChannels + channel)];
  }
  double& at(int64_t frame, int64_t channel) {
    return frames[static_cast<size_t>(frame * kChannels + channel)];
  }
};

struct NormStats {
  double pupil_min = 0.0;
  double pupil_max = 0.0;
};

// --- parsing ------------------------------------------------------------

// Recording CSV: header `t,gaze_x,gaze_y,pupil_left[,pupil_right],blink`.
// With two pupil columns the sample carries their average; *averaged_pupils
// reports which variant the file used.
std::vector<GazeSample> parse_recording(const std::string& path,
                                        bool* averaged_pupils = nullptr);

// Personality CSV: header `participant_id,O,C,E,A,N`, bins in {0,1,2}.
std::map<std::string, PersonalityProfile> parse_personality_file(const std::string& path);

// Device-space window out in the recording schema (single pupil column,
// t = k/60); parse_recording reads it back exactly.
void save_window_csv(const GazeWindow& device_window, const std::string& path);

// --- windowing ----------------------------------------------------------

// Maximal full windows at offsets 0, stride, 2*stride, ...; partial tails
// are dropped. Returns raw frame matrices.
std::vector<std::vector<double>> window_stream(const std::vector<GazeSample>& samples,
                                               int64_t size = kWindowFrames,
                                               int64_t stride = 60);

// Strict quality test: every row needs gaze_x, gaze_y in [0,1] and pupil > 0.
bool quality_filter(const std::vector<double>& frames);

// --- normalization ------------------------------------------------------

// Gaze channels map [0,1] -> [-1,1]; pupil maps [min,max] -> [-1,1] with
// clamping; blink stays {0,1}.
std::vector<double> normalize_window(const std::vector<double>& frames,
                                     const NormStats& stats);

// Exact inverse on non-clamped values; the blink channel is binarized at 0.5.
std::vector<double> denormalize_window(const std::vector<double>& frames,
                                       const NormStats& stats);

NormStats compute_stats(const std::vector<std::vector<double>>& device_windows);

// Stats file: `pupil_min=...`, `pupil_max=...`, `format_version=1`, with
// 17-significant-digit decimals so values round-trip exactly.
void save_stats(const NormStats& stats, const std::string& path);
NormStats load_stats(const std::string& path);

// --- labels -------------------------------------------------------------

// Base-3 positional encoding with openness most significant:
// 81*O + 27*C + 9*E + 3*A + N.
int64_t profile_index(const PersonalityProfile& profile);
PersonalityProfile profile_from_index(int64_t index);
ClassLabel encode_label(const PersonalityProfile& profile, const LabelMode& mode);

// --- dataset ------------------------------------------------------------

// Seeded participant-level split; the test side gets at least one and at
// most n-1 participants.
std::pair<std::vector<std::string>, std::vector<std::string>> split_participants(
    std::vector<std::string> ids, double test_fraction, uint64_t seed);

struct PrepareReport {
  int64_t windows_total = 0;
  int64_t windows_rejected = 0;
  int64_t participants = 0;
  bool averaged_pupils = false;
};

struct Dataset {
  LabelMode mode;
  int64_t stride = 60;
  NormStats stats;
  double pupil_mean = 0.0;  // device-space mean over training windows
  std::vector<GazeWindow> train;  // normalized
  std::vector<GazeWindow> test;   // normalized

  std::vector<int64_t> seen_classes() const;  // sorted distinct train labels
};

// Full ingest pipeline: parse every `<participant_id>.csv` under data_dir
// that the personality file lists, window, filter, label, split by
// participant, compute stats on the training side and normalize both sides.
Dataset build_dataset(const std::string& data_dir, const std::string& personality_path,
                      const LabelMode& mode, int64_t stride, double test_fraction,
                      uint64_t seed, PrepareReport* report = nullptr);

void save_dataset(const Dataset& dataset, const std::string& path);
Dataset load_dataset(const std::string& path);

// --- batching -----------------------------------------------------------

// Channel-major [B,4,T] batch for the networks. Expects normalized windows;
// the blink channel is mapped {0,1} -> {-1,1} so real and generated batches
// share one scale.
nn::TensorPtr window_batch(const std::vector<GazeWindow>& windows,
                           const std::vector<int64_t>& indices);

}  // namespace gaze::data
