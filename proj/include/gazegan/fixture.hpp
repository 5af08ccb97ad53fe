// SPDX-License-Identifier: Apache-2.0
//
// Synthetic desk-scale corpus generator. Produces recording and personality
// CSVs in the external input format so the full pipeline can run without the
// (externally licensed) eye-tracking dataset; also used by the test suites.
#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "gazegan/dataio.hpp"
#include "gazegan/rng.hpp"

namespace gaze::fixture {

// Three-class corpus: class c draws gaze around class-specific constants
// plus noise, so conditional structure is known analytically.
struct ToyCorpusConfig {
  data::Trait trait = data::Trait::extroversion;
  int64_t participants_per_class = 3;
  int64_t samples_per_participant = 2400;  // 40 s at 60 Hz
  std::array<double, 3> mean_x{0.2, 0.5, 0.8};
  std::array<double, 3> mean_y{0.8, 0.5, 0.2};
  std::array<double, 3> mean_pupil{2.5, 3.5, 4.5};
  double gaze_noise = 0.02;
  double pupil_noise = 0.15;
  double blink_rate_hz = 0.3;
  uint64_t seed = 7;
};

// Blink train with runs of 3-10 frames at roughly rate_hz starts per second.
std::vector<double> random_blink_train(int64_t frames, double rate_hz, nn::Rng& rng);

// Writes p<k>.csv recordings plus personality.csv under dir. Returns the
// personality file path.
std::string write_toy_corpus(const std::string& dir, const ToyCorpusConfig& config);

}  // namespace gaze::fixture
