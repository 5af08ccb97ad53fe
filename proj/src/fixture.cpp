// SPDX-License-Identifier: Apache-2.0
#include "gazegan/fixture.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "gazegan/error.hpp"
#include "gazegan/textio.hpp"

namespace gaze::fixture {

std::vector<double> random_blink_train(int64_t frames, double rate_hz, nn::Rng& rng) {
  std::vector<double> blink(static_cast<size_t>(frames), 0.0);
  const double start_prob = rate_hz / data::kSampleRateHz;
  int64_t i = 0;
  while (i < frames) {
    if (rng.uniform() < start_prob) {
      const int64_t duration = 3 + rng.below(8);  // 3..10 frames
      for (int64_t k = 0; k < duration && i + k < frames; ++k)
        blink[static_cast<size_t>(i + k)] = 1.0;
      i += duration;
    } else {
      ++i;
    }
  }
  return blink;
}

std::string write_toy_corpus(const std::string& dir, const ToyCorpusConfig& config) {
  std::filesystem::create_directories(dir);
  nn::Rng rng(config.seed);

  const auto personality_path = (std::filesystem::path(dir) / "personality.csv").string();
  std::ofstream personality(personality_path);
  if (!personality) throw IoError("cannot write " + personality_path);
  personality << "participant_id,O,C,E,A,N\n";

  int64_t participant = 0;
  for (int cls = 0; cls < 3; ++cls) {
    for (int64_t p = 0; p < config.participants_per_class; ++p, ++participant) {
      char id[8];
      std::snprintf(id, sizeof(id), "p%02d", static_cast<int>(participant));

      data::PersonalityProfile profile;
      profile.bins.fill(cls);
      personality << id;
      for (int bin : profile.bins) personality << ',' << bin;
      personality << '\n';

      const auto path = (std::filesystem::path(dir) / (std::string(id) + ".csv")).string();
      std::ofstream rec(path);
      if (!rec) throw IoError("cannot write " + path);
      rec << "t,gaze_x,gaze_y,pupil_left,blink\n";
      const auto blink =
          random_blink_train(config.samples_per_participant, config.blink_rate_hz, rng);
      for (int64_t i = 0; i < config.samples_per_participant; ++i) {
        const double x = std::clamp(
            config.mean_x[static_cast<size_t>(cls)] + rng.normal() * config.gaze_noise,
            0.005, 0.995);
        const double y = std::clamp(
            config.mean_y[static_cast<size_t>(cls)] + rng.normal() * config.gaze_noise,
            0.005, 0.995);
        const double pupil = std::max(
            0.5, config.mean_pupil[static_cast<size_t>(cls)] + rng.normal() * config.pupil_noise);
        rec << format_g17(static_cast<double>(i) / data::kSampleRateHz) << ','
            << format_g17(x) << ',' << format_g17(y) << ',' << format_g17(pupil) << ','
            << static_cast<int>(blink[static_cast<size_t>(i)]) << '\n';
      }
      if (!rec) throw IoError("recording write failed: " + path);
    }
  }
  if (!personality) throw IoError("personality write failed: " + personality_path);
  return personality_path;
}

}  // namespace gaze::fixture
