// SPDX-License-Identifier: Apache-2.0
#include "gazegan/evalmetrics.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>

#include "gazegan/adam.hpp"
#include "gazegan/error.hpp"
#include "gazegan/ops.hpp"
#include "gazegan/rng.hpp"
#include "gazegan/textio.hpp"

namespace gaze::eval {

namespace {

constexpr double kLeakAlpha = 0.2;
constexpr double kInitStd = 0.02;
constexpr int64_t kKernel = 4;
constexpr int64_t kStride = 2;
constexpr int64_t kPad = 1;
constexpr int64_t kSeqBase = data::kWindowFrames / 4;  // 75 after two stride-2 stages

nn::TensorPtr init_weight(std::vector<int64_t> shape, nn::Rng& rng) {
  auto t = nn::Tensor::zeros(std::move(shape), true);
  rng.fill_normal(t->data, kInitStd);
  return t;
}

nn::TensorPtr classifier_logits(nn::Tape* tape, const ClassifierParams& p,
                                const nn::TensorPtr& batch) {
  auto h = nn::leaky_relu(tape, nn::conv1d(tape, batch, p.conv1_w, p.conv1_b, kStride, kPad),
                          kLeakAlpha);
  h = nn::leaky_relu(tape, nn::conv1d(tape, h, p.conv2_w, p.conv2_b, kStride, kPad),
                     kLeakAlpha);
  auto flat = nn::reshape(tape, h, {batch->dim(0), p.c2 * kSeqBase});
  return nn::dense(tape, flat, p.fc_w, p.fc_b);
}

}  // namespace

std::vector<std::pair<std::string, nn::TensorPtr>> ClassifierParams::named_params() const {
  return {{"conv1_w", conv1_w}, {"conv1_b", conv1_b}, {"conv2_w", conv2_w},
          {"conv2_b", conv2_b}, {"fc_w", fc_w},       {"fc_b", fc_b}};
}

int64_t ClassifierParams::head_index(int64_t class_index) const {
  const auto it = std::lower_bound(class_map.begin(), class_map.end(), class_index);
  if (it == class_map.end() || *it != class_index) return -1;
  return it - class_map.begin();
}

ClassifierParams train_classifier(const std::vector<data::GazeWindow>& train_windows,
                                  const ClassifierConfig& config,
                                  const std::vector<data::GazeWindow>& heldout,
                                  double* heldout_accuracy,
                                  std::vector<ClassifierEpochLog>* log) {
  if (train_windows.empty()) throw ContractError("train_classifier: empty training set");

  std::map<int64_t, int64_t> counts;
  for (const auto& w : train_windows) ++counts[w.label.index];
  for (const auto& [cls, count] : counts)
    if (count < 2)
      throw ContractError("train_classifier: class " + std::to_string(cls) +
                          " has fewer than 2 training samples");

  ClassifierParams p;
  p.mode = train_windows.front().label.mode;
  for (const auto& [cls, count] : counts) p.class_map.push_back(cls);
  const int64_t k_classes = static_cast<int64_t>(p.class_map.size());
  if (k_classes < 2) throw ContractError("train_classifier: need at least 2 classes");

  nn::Rng rng(config.seed);
  p.c1 = config.base_channels / 2;
  p.c2 = config.base_channels;
  p.conv1_w = init_weight({p.c1, data::kChannels, kKernel}, rng);
  p.conv1_b = nn::Tensor::zeros({p.c1}, true);
  p.conv2_w = init_weight({p.c2, p.c1, kKernel}, rng);
  p.conv2_b = nn::Tensor::zeros({p.c2}, true);
  p.fc_w = init_weight({k_classes, p.c2 * kSeqBase}, rng);
  p.fc_b = nn::Tensor::zeros({k_classes}, true);

  auto named = p.named_params();
  std::vector<nn::AdamState> opt;
  for (auto& [name, t] : named)
    opt.emplace_back(t->size(), config.lr, config.beta1, config.beta2);

  const int64_t n = static_cast<int64_t>(train_windows.size());
  std::vector<int64_t> order(static_cast<size_t>(n));

  nn::Tape tape;
  for (int64_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    nn::shuffle(order, rng);
    double epoch_loss = 0.0;
    int64_t batches = 0;
    for (int64_t begin = 0; begin < n; begin += config.batch_size) {
      const int64_t end = std::min(n, begin + config.batch_size);
      std::vector<int64_t> idx(order.begin() + begin, order.begin() + end);
      auto batch = data::window_batch(train_windows, idx);
      std::vector<int64_t> targets(idx.size());
      for (size_t b = 0; b < idx.size(); ++b)
        targets[b] = p.head_index(train_windows[static_cast<size_t>(idx[b])].label.index);
      auto logits = classifier_logits(&tape, p, batch);
      auto loss = nn::softmax_cross_entropy(&tape, logits, targets);
      tape.backward(loss);
      for (size_t i = 0; i < named.size(); ++i) nn::adam_step(*named[i].second, opt[i]);
      for (auto& [name, t] : named) t->zero_grad();
      tape.clear();
      epoch_loss += loss->item();
      ++batches;
    }
    if (log) log->push_back({epoch, epoch_loss / static_cast<double>(batches)});
  }

  if (heldout_accuracy) {
    *heldout_accuracy = heldout.empty() ? 0.0 : classification_accuracy(p, heldout);
  }
  return p;
}

std::vector<std::vector<double>> predict_probs(const ClassifierParams& params,
                                               const std::vector<data::GazeWindow>& windows) {
  if (windows.empty()) throw ContractError("predict_probs: empty window set");
  const int64_t n = static_cast<int64_t>(windows.size());
  const int64_t k_classes = static_cast<int64_t>(params.class_map.size());
  std::vector<std::vector<double>> probs;
  probs.reserve(static_cast<size_t>(n));

  constexpr int64_t kChunk = 256;
  for (int64_t begin = 0; begin < n; begin += kChunk) {
    const int64_t end = std::min(n, begin + kChunk);
    std::vector<int64_t> idx(static_cast<size_t>(end - begin));
    std::iota(idx.begin(), idx.end(), begin);
    auto batch = data::window_batch(windows, idx);
    auto soft = nn::softmax_probs(classifier_logits(nullptr, params, batch));
    for (int64_t b = 0; b < end - begin; ++b)
      probs.emplace_back(soft->data.begin() + b * k_classes,
                         soft->data.begin() + (b + 1) * k_classes);
  }
  return probs;
}

double inception_score_from_probs(const std::vector<std::vector<double>>& probs) {
  if (probs.empty()) throw ContractError("inception score needs at least one prediction");
  const size_t k_classes = probs.front().size();
  std::vector<double> marginal(k_classes, 0.0);
  for (const auto& row : probs) {
    if (row.size() != k_classes) throw ShapeError("prediction rows must agree in length");
    for (size_t k = 0; k < k_classes; ++k) marginal[k] += row[k];
  }
  for (auto& m : marginal) m /= static_cast<double>(probs.size());

  double mean_kl = 0.0;
  for (const auto& row : probs) {
    double kl = 0.0;
    for (size_t k = 0; k < k_classes; ++k)
      if (row[k] > 0.0) kl += row[k] * (std::log(row[k]) - std::log(marginal[k]));
    mean_kl += kl;
  }
  mean_kl /= static_cast<double>(probs.size());
  return std::exp(mean_kl);
}

double inception_score(const ClassifierParams& params,
                       const std::vector<data::GazeWindow>& windows) {
  return inception_score_from_probs(predict_probs(params, windows));
}

double classification_accuracy(const ClassifierParams& params,
                               const std::vector<data::GazeWindow>& windows) {
  if (windows.empty()) throw ContractError("classification_accuracy: empty window set");
  const auto probs = predict_probs(params, windows);
  int64_t hits = 0;
  for (size_t i = 0; i < probs.size(); ++i) {
    const auto& row = probs[i];
    const int64_t argmax = std::max_element(row.begin(), row.end()) - row.begin();
    const int64_t want = params.head_index(windows[i].label.index);
    hits += (want >= 0 && argmax == want) ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(windows.size());
}

namespace {

ClassCurve average_channels(const std::vector<data::GazeWindow>& windows,
                            const std::vector<int64_t>& channels) {
  if (windows.empty()) throw ContractError("average curve needs at least one window");
  const int64_t cls = windows.front().label.index;
  for (const auto& w : windows)
    if (w.label.index != cls)
      throw ContractError("average curve windows must share one class");

  ClassCurve curve;
  curve.class_index = cls;
  curve.sample_count = static_cast<int64_t>(windows.size());
  curve.channels = static_cast<int64_t>(channels.size());
  curve.means.assign(static_cast<size_t>(data::kWindowFrames * curve.channels), 0.0);
  for (const auto& w : windows)
    for (int64_t t = 0; t < data::kWindowFrames; ++t)
      for (size_t c = 0; c < channels.size(); ++c)
        curve.means[static_cast<size_t>(t * curve.channels) + c] +=
            w.at(t, channels[c]);
  for (auto& m : curve.means) m /= static_cast<double>(curve.sample_count);
  return curve;
}

std::string class_tag(const data::LabelMode& mode, int64_t class_index) {
  if (mode.kind == data::LabelMode::Kind::single_dim) {
    static const char* kBinNames[3] = {"low", "medium", "high"};
    if (class_index >= 0 && class_index < 3)
      return kBinNames[class_index];
  }
  return "c" + std::to_string(class_index);
}

}  // namespace

ClassCurve average_trajectory(const std::vector<data::GazeWindow>& windows) {
  return average_channels(windows, {0, 1});
}

ClassCurve average_pupil(const std::vector<data::GazeWindow>& windows) {
  return average_channels(windows, {2});
}

std::vector<std::string> emit_plot_data(const std::vector<ClassCurve>& curves,
                                        const data::LabelMode& mode,
                                        const std::string& kind,
                                        const std::string& out_dir) {
  std::vector<std::string> paths;
  for (const auto& curve : curves) {
    const auto path = std::filesystem::path(out_dir) /
                      (kind + "_" + mode.str() + "_" + class_tag(mode, curve.class_index) +
                       ".csv");
    std::ofstream out(path);
    if (!out) throw IoError("cannot write plot data: " + path.string());
    if (curve.channels == 2)
      out << "t,mean_x,mean_y\n";
    else if (curve.channels == 1)
      out << "t,mean_pupil\n";
    else
      throw ContractError("plot curves carry 1 or 2 channels");
    for (int64_t t = 0; t < data::kWindowFrames; ++t) {
      out << format_g17(static_cast<double>(t) / data::kSampleRateHz);
      for (int64_t c = 0; c < curve.channels; ++c)
        out << ',' << format_g17(curve.means[static_cast<size_t>(t * curve.channels + c)]);
      out << '\n';
    }
    if (!out) throw IoError("plot data write failed: " + path.string());
    paths.push_back(path.string());
  }
  return paths;
}

nn::Checkpoint classifier_checkpoint(const ClassifierParams& params) {
  nn::Checkpoint ckpt;
  ckpt.component = nn::ComponentTag::classifier;
  ckpt.mode_kind = static_cast<uint8_t>(params.mode.kind);
  ckpt.mode_dim = static_cast<uint8_t>(params.mode.dim);
  for (const auto& [name, t] : params.named_params()) ckpt.params.emplace_back(name, t);
  ckpt.class_map = params.class_map;
  return ckpt;
}

ClassifierParams classifier_from_checkpoint(const nn::Checkpoint& ckpt) {
  if (ckpt.component != nn::ComponentTag::classifier)
    throw IoError("checkpoint is not a classifier checkpoint");
  ClassifierParams p;
  p.mode.kind = static_cast<data::LabelMode::Kind>(ckpt.mode_kind);
  p.mode.dim = static_cast<data::Trait>(ckpt.mode_dim);
  p.conv1_w = ckpt.param("conv1_w");
  p.conv1_b = ckpt.param("conv1_b");
  p.conv2_w = ckpt.param("conv2_w");
  p.conv2_b = ckpt.param("conv2_b");
  p.fc_w = ckpt.param("fc_w");
  p.fc_b = ckpt.param("fc_b");
  p.c1 = p.conv1_w->dim(0);
  p.c2 = p.conv2_w->dim(0);
  p.class_map = ckpt.class_map;
  return p;
}

}  // namespace gaze::eval
