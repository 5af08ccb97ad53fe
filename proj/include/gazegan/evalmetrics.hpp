// SPDX-License-Identifier: Apache-2.0
//
// Quantitative evaluation: a 1D-CNN personality classifier trained on real
// windows, inception scores over its predictions, and per-class average
// trajectory/pupil curves.
#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "gazegan/checkpoint.hpp"
#include "gazegan/dataio.hpp"
#include "gazegan/tensor.hpp"

namespace gaze::eval {

struct ClassifierConfig {
  int64_t base_channels = 32;  // stage-2 channels; stage 1 halves
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  int64_t batch_size = 64;
  int64_t epochs = 30;
  uint64_t seed = 1;
};

// Two stride-2 conv stages plus a dense softmax head over the classes seen
// in training; class_map translates head outputs back to class indices.
struct ClassifierParams {
  data::LabelMode mode;
  int64_t c1 = 16;
  int64_t c2 = 32;
  nn::TensorPtr conv1_w, conv1_b;
  nn::TensorPtr conv2_w, conv2_b;
  nn::TensorPtr fc_w, fc_b;
  std::vector<int64_t> class_map;

  std::vector<std::pair<std::string, nn::TensorPtr>> named_params() const;
  int64_t head_index(int64_t class_index) const;  // -1 when the class is unmapped
};

struct ClassifierEpochLog {
  int64_t epoch = 0;
  double loss = 0.0;
};

// Cross-entropy training on normalized real windows. Every class present in
// the training set must appear at least twice. heldout_accuracy, when
// requested, is computed over the heldout set (classes missing from the map
// count as wrong).
ClassifierParams train_classifier(const std::vector<data::GazeWindow>& train_windows,
                                  const ClassifierConfig& config,
                                  const std::vector<data::GazeWindow>& heldout = {},
                                  double* heldout_accuracy = nullptr,
                                  std::vector<ClassifierEpochLog>* log = nullptr);

// Row-normalized class probabilities, one row per window.
std::vector<std::vector<double>> predict_probs(const ClassifierParams& params,
                                               const std::vector<data::GazeWindow>& windows);

// exp(mean_i KL(p(y|x_i) || mean_j p(y|x_j))); in [1, class count].
double inception_score_from_probs(const std::vector<std::vector<double>>& probs);
double inception_score(const ClassifierParams& params,
                       const std::vector<data::GazeWindow>& windows);

double classification_accuracy(const ClassifierParams& params,
                               const std::vector<data::GazeWindow>& windows);

// Per-timestep mean curve for a set of same-class windows.
struct ClassCurve {
  int64_t class_index = 0;
  int64_t sample_count = 0;
  int64_t channels = 0;                       // 2 = trajectory, 1 = pupil
  std::vector<double> means;                  // kWindowFrames x channels
};

// Means of device-space gaze x/y over the set; all windows must share a class.
ClassCurve average_trajectory(const std::vector<data::GazeWindow>& windows);
// Same for the pupil channel.
ClassCurve average_pupil(const std::vector<data::GazeWindow>& windows);

// One CSV per curve: header `t,mean_x,mean_y` or `t,mean_pupil`, 300 rows,
// t = k/60 in 17-significant-digit decimals. Returns the written paths.
std::vector<std::string> emit_plot_data(const std::vector<ClassCurve>& curves,
                                        const data::LabelMode& mode,
                                        const std::string& kind,
                                        const std::string& out_dir);

nn::Checkpoint classifier_checkpoint(const ClassifierParams& params);
ClassifierParams classifier_from_checkpoint(const nn::Checkpoint& ckpt);

}  // namespace gaze::eval
