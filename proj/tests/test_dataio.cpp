// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <fstream>
#include <set>

#include "gazegan/dataio.hpp"
#include "gazegan/error.hpp"
#include "gazegan/fixture.hpp"
#include "gazegan/rng.hpp"
#include "support.hpp"

using namespace gaze;
using testsupport::TempDir;

namespace {

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  out << content;
}

std::vector<double> flat_window(double x, double y, double pupil, double blink) {
  std::vector<double> frames(static_cast<size_t>(data::kWindowFrames * data::kChannels));
  for (int64_t i = 0; i < data::kWindowFrames; ++i) {
    frames[static_cast<size_t>(i * 4 + 0)] = x;
    frames[static_cast<size_t>(i * 4 + 1)] = y;
    frames[static_cast<size_t>(i * 4 + 2)] = pupil;
    frames[static_cast<size_t>(i * 4 + 3)] = blink;
  }
  return frames;
}

}  // namespace

TEST_CASE("parse_recording maps fields directly") {
  TempDir dir("rec");
  write_file(dir.file("a.csv"),
             "t,gaze_x,gaze_y,pupil_left,blink\n"
             "0.0,0.5,0.5,3.2,0\n"
             "0.016,0.6,0.4,3.1,1\n");
  const auto samples = data::parse_recording(dir.file("a.csv"));
  REQUIRE(samples.size() == 2);
  CHECK(samples[0].t == 0.0);
  CHECK(samples[0].gaze_x == 0.5);
  CHECK(samples[0].gaze_y == 0.5);
  CHECK(samples[0].pupil == 3.2);
  CHECK(samples[0].blink == 0);
  CHECK(samples[1].blink == 1);
}

TEST_CASE("parse_recording rejects malformed rows") {
  TempDir dir("rec");
  write_file(dir.file("blink2.csv"),
             "t,gaze_x,gaze_y,pupil_left,blink\n0.0,0.5,0.5,3.2,2\n");
  CHECK_THROWS_AS(data::parse_recording(dir.file("blink2.csv")), ParseError);

  write_file(dir.file("text.csv"),
             "t,gaze_x,gaze_y,pupil_left,blink\n0.0,abc,0.5,3.2,0\n");
  CHECK_THROWS_AS(data::parse_recording(dir.file("text.csv")), ParseError);

  write_file(dir.file("negpupil.csv"),
             "t,gaze_x,gaze_y,pupil_left,blink\n0.0,0.5,0.5,-1.0,0\n");
  CHECK_THROWS_AS(data::parse_recording(dir.file("negpupil.csv")), ParseError);

  write_file(dir.file("backwards.csv"),
             "t,gaze_x,gaze_y,pupil_left,blink\n1.0,0.5,0.5,3.0,0\n0.5,0.5,0.5,3.0,0\n");
  CHECK_THROWS_AS(data::parse_recording(dir.file("backwards.csv")), ParseError);

  // line numbers point at the offending row
  try {
    data::parse_recording(dir.file("blink2.csv"));
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line_number == 2);
  }
}

TEST_CASE("parse_recording schema handling") {
  TempDir dir("rec");
  write_file(dir.file("missing.csv"), "t,gaze_x,pupil_left,blink\n");
  CHECK_THROWS_AS(data::parse_recording(dir.file("missing.csv")), SchemaError);

  write_file(dir.file("empty.csv"), "t,gaze_x,gaze_y,pupil_left,blink\n");
  CHECK(data::parse_recording(dir.file("empty.csv")).empty());

  // two pupil columns average
  write_file(dir.file("two.csv"),
             "t,gaze_x,gaze_y,pupil_left,pupil_right,blink\n0.0,0.5,0.5,3.0,4.0,0\n");
  bool averaged = false;
  const auto samples = data::parse_recording(dir.file("two.csv"), &averaged);
  CHECK(averaged);
  CHECK(samples[0].pupil == 3.5);
}

TEST_CASE("window_stream counts") {
  std::vector<data::GazeSample> samples(600);
  for (size_t i = 0; i < samples.size(); ++i)
    samples[i] = {static_cast<double>(i) / 60.0, 0.5, 0.5, 3.0, 0};

  CHECK(data::window_stream(samples, 300, 300).size() == 2);
  samples.resize(300);
  CHECK(data::window_stream(samples, 300, 1).size() == 1);
  samples.resize(299);
  CHECK(data::window_stream(samples, 300, 60).empty());
  CHECK_THROWS_AS(data::window_stream(samples, 300, 0), ContractError);
}

TEST_CASE("window_stream count property") {
  nn::Rng rng(77);
  for (int trial = 0; trial < 30; ++trial) {
    const int64_t n = rng.below(2000);
    const int64_t stride = 1 + rng.below(200);
    std::vector<data::GazeSample> samples(static_cast<size_t>(n));
    for (int64_t i = 0; i < n; ++i)
      samples[static_cast<size_t>(i)] = {static_cast<double>(i), 0.5, 0.5, 3.0, 0};
    const auto windows = data::window_stream(samples, 300, stride);
    const int64_t expected = n >= 300 ? (n - 300) / stride + 1 : 0;
    CHECK(static_cast<int64_t>(windows.size()) == expected);
  }
}

TEST_CASE("quality_filter") {
  CHECK(data::quality_filter(flat_window(0.5, 0.5, 3.0, 0)));

  auto bad_x = flat_window(0.5, 0.5, 3.0, 0);
  bad_x[40 * 4 + 0] = 1.2;
  CHECK_FALSE(data::quality_filter(bad_x));

  auto zero_pupil = flat_window(0.5, 0.5, 3.0, 0);
  zero_pupil[99 * 4 + 2] = 0.0;
  CHECK_FALSE(data::quality_filter(zero_pupil));

  auto neg_y = flat_window(0.5, 0.5, 3.0, 0);
  neg_y[0 * 4 + 1] = -0.01;
  CHECK_FALSE(data::quality_filter(neg_y));
}

TEST_CASE("normalize endpoints and round-trip") {
  const data::NormStats stats{2.0, 5.0};
  auto w = flat_window(0.5, 0.25, 2.0, 1);
  auto norm = data::normalize_window(w, stats);
  CHECK(norm[0] == 0.0);        // gaze_x 0.5 -> 0
  CHECK(norm[1] == -0.5);       // gaze_y 0.25 -> -0.5
  CHECK(norm[2] == -1.0);       // pupil at min -> -1
  CHECK(norm[3] == 1.0);        // blink unchanged

  nn::Rng rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    auto frames = flat_window(0, 0, 0, 0);
    for (int64_t i = 0; i < data::kWindowFrames; ++i) {
      frames[static_cast<size_t>(i * 4 + 0)] = rng.uniform();
      frames[static_cast<size_t>(i * 4 + 1)] = rng.uniform();
      frames[static_cast<size_t>(i * 4 + 2)] = 2.0 + 3.0 * rng.uniform();
      frames[static_cast<size_t>(i * 4 + 3)] = rng.uniform() < 0.1 ? 1.0 : 0.0;
    }
    const auto round = data::denormalize_window(data::normalize_window(frames, stats), stats);
    for (size_t i = 0; i < frames.size(); ++i)
      CHECK(std::abs(round[i] - frames[i]) < 1e-12);
  }

  CHECK_THROWS_AS(data::normalize_window(w, data::NormStats{3.0, 3.0}), StatsError);
}

TEST_CASE("denormalize endpoints") {
  const data::NormStats stats{2.0, 5.0};
  auto w = flat_window(0.0, 0.0, -1.0, 0.0);
  const auto device = data::denormalize_window(w, stats);
  CHECK(device[0] == 0.5);
  CHECK(device[2] == 2.0);
}

TEST_CASE("label encoding") {
  data::PersonalityProfile zeros;
  CHECK(data::encode_label(zeros, data::LabelMode::all_dims()).index == 0);

  data::PersonalityProfile max;
  max.bins = {2, 2, 2, 2, 2};
  CHECK(data::encode_label(max, data::LabelMode::all_dims()).index == 242);

  data::PersonalityProfile mixed;
  mixed.bins = {1, 0, 2, 0, 1};
  CHECK(data::encode_label(mixed, data::LabelMode::all_dims()).index == 100);

  CHECK(data::encode_label(mixed, data::LabelMode::single(data::Trait::extroversion)).index == 2);
  CHECK(data::encode_label(mixed, data::LabelMode::single(data::Trait::neuroticism)).index == 1);
}

TEST_CASE("label encoding is a bijection over all 243 profiles") {
  std::set<int64_t> seen;
  for (int o = 0; o < 3; ++o)
    for (int c = 0; c < 3; ++c)
      for (int e = 0; e < 3; ++e)
        for (int a = 0; a < 3; ++a)
          for (int n = 0; n < 3; ++n) {
            data::PersonalityProfile p;
            p.bins = {o, c, e, a, n};
            const int64_t index = data::profile_index(p);
            CHECK(index >= 0);
            CHECK(index < 243);
            CHECK(seen.insert(index).second);
            CHECK(data::profile_from_index(index).bins == p.bins);
          }
  CHECK(seen.size() == 243);
}

TEST_CASE("split_participants") {
  std::vector<std::string> ids;
  for (int i = 0; i < 10; ++i) ids.push_back("p" + std::to_string(i));

  const auto [train1, test1] = data::split_participants(ids, 0.2, 42);
  CHECK(test1.size() == 2);
  CHECK(train1.size() == 8);

  // stable across runs
  const auto [train2, test2] = data::split_participants(ids, 0.2, 42);
  CHECK(train1 == train2);
  CHECK(test1 == test2);

  // partition: union is the input, intersection empty
  std::set<std::string> all(train1.begin(), train1.end());
  for (const auto& id : test1) CHECK(all.insert(id).second);
  CHECK(all.size() == ids.size());

  // tiny fraction still yields one test participant
  const auto [train3, test3] = data::split_participants(ids, 0.01, 1);
  CHECK(test3.size() == 1);

  CHECK_THROWS_AS(data::split_participants({"solo"}, 0.2, 1), ContractError);
  CHECK_THROWS_AS(data::split_participants(ids, 0.0, 1), ContractError);
}

TEST_CASE("stats file round-trips exactly") {
  TempDir dir("stats");
  const data::NormStats stats{1.0 / 3.0, M_PI};
  data::save_stats(stats, dir.file("stats.txt"));
  const auto loaded = data::load_stats(dir.file("stats.txt"));
  CHECK(loaded.pupil_min == stats.pupil_min);
  CHECK(loaded.pupil_max == stats.pupil_max);

  write_file(dir.file("bad.txt"), "pupil_min=1\npupil_max=2\nformat_version=9\n");
  CHECK_THROWS_AS(data::load_stats(dir.file("bad.txt")), SchemaError);
  write_file(dir.file("unknown.txt"),
             "pupil_min=1\npupil_max=2\nformat_version=1\nwho=knows\n");
  CHECK_THROWS_AS(data::load_stats(dir.file("unknown.txt")), SchemaError);
}

TEST_CASE("build_dataset on a contaminated fixture") {
  TempDir dir("corpus");

  // Three participants, 900 samples each. p1 carries one bad gaze sample at
  // row 450, which taints windows starting in [180, 420]: 5 of its 11.
  for (int p = 0; p < 3; ++p) {
    std::ofstream rec(dir.file("q" + std::to_string(p) + ".csv"));
    rec << "t,gaze_x,gaze_y,pupil_left,blink\n";
    for (int i = 0; i < 900; ++i) {
      double x = 0.4 + 0.01 * p;
      if (p == 1 && i == 450) x = 1.5;
      rec << (i / 60.0) << ',' << x << ",0.5," << (3.0 + 0.001 * i) << ",0\n";
    }
  }
  std::ofstream pers(dir.file("personality.csv"));
  pers << "participant_id,O,C,E,A,N\nq0,0,0,0,0,0\nq1,1,1,1,1,1\nq2,2,2,2,2,2\n";
  pers.close();

  data::PrepareReport report;
  const auto ds = data::build_dataset(dir.str(), dir.file("personality.csv"),
                                      data::LabelMode::single(data::Trait::openness), 60,
                                      0.34, 7, &report);
  // 11 windows per participant at stride 60 from 900 samples
  CHECK(report.windows_total == 33);
  CHECK(report.windows_rejected == 5);
  CHECK(ds.train.size() + ds.test.size() == 28);

  // split is by participant
  std::set<std::string> train_ids, test_ids;
  for (const auto& w : ds.train) train_ids.insert(w.participant_id);
  for (const auto& w : ds.test) test_ids.insert(w.participant_id);
  for (const auto& id : test_ids) CHECK(train_ids.count(id) == 0);
  CHECK(test_ids.size() == 1);

  // train windows are normalized
  for (const auto& w : ds.train)
    for (int64_t t = 0; t < data::kWindowFrames; ++t) {
      CHECK(std::abs(w.at(t, 0)) <= 1.0);
      CHECK(std::abs(w.at(t, 2)) <= 1.0);
    }

  // dataset file round-trip
  data::save_dataset(ds, dir.file("windows.gwin"));
  const auto loaded = data::load_dataset(dir.file("windows.gwin"));
  CHECK(loaded.train.size() == ds.train.size());
  CHECK(loaded.test.size() == ds.test.size());
  CHECK(loaded.stats.pupil_min == ds.stats.pupil_min);
  CHECK(loaded.pupil_mean == ds.pupil_mean);
  CHECK(loaded.mode == ds.mode);
  CHECK(loaded.train.front().frames == ds.train.front().frames);
  CHECK(loaded.train.front().participant_id == ds.train.front().participant_id);
}

TEST_CASE("toy corpus fixture feeds the pipeline") {
  TempDir dir("toy");
  fixture::ToyCorpusConfig config;
  config.participants_per_class = 2;
  config.samples_per_participant = 360;
  const auto personality = fixture::write_toy_corpus(dir.str(), config);

  data::PrepareReport report;
  const auto ds = data::build_dataset(dir.str(), personality,
                                      data::LabelMode::single(config.trait), 60, 0.2, 3,
                                      &report);
  // 2 windows per participant from 360 samples at stride 60, nothing rejected
  CHECK(report.windows_total == 12);
  CHECK(report.windows_rejected == 0);
  const auto seen = ds.seen_classes();
  CHECK(seen.size() <= 3);
  for (int64_t cls : seen) CHECK(cls >= 0);
}

TEST_CASE("randomly corrupted recordings never leak bad windows") {
  nn::Rng rng(91);
  for (int trial = 0; trial < 10; ++trial) {
    TempDir dir("fuzz");
    const int64_t n = 400 + rng.below(600);
    const int64_t stride = 30 + rng.below(60);
    const int64_t n_bad = rng.below(6);
    std::set<int64_t> bad_rows;
    for (int64_t i = 0; i < n_bad; ++i) bad_rows.insert(rng.below(n));

    {
      std::ofstream rec(dir.file("f0.csv"));
      rec << "t,gaze_x,gaze_y,pupil_left,blink\n";
      for (int64_t i = 0; i < n; ++i) {
        double x = 0.2 + 0.6 * rng.uniform(), pupil = 2.0 + rng.uniform();
        if (bad_rows.count(i)) {
          if (rng.uniform() < 0.5)
            x = rng.uniform() < 0.5 ? -0.2 : 1.3;
          else
            pupil = 0.0;
        }
        rec << (static_cast<double>(i) / 60.0) << ',' << x << ",0.5," << pupil << ",0\n";
      }
      std::ofstream rec2(dir.file("f1.csv"));
      rec2 << "t,gaze_x,gaze_y,pupil_left,blink\n";
      for (int64_t i = 0; i < 400; ++i)
        rec2 << (static_cast<double>(i) / 60.0) << ",0.5,0.5," << (3.0 + 0.001 * i) << ",0\n";
      std::ofstream rec3(dir.file("f2.csv"));
      rec3 << "t,gaze_x,gaze_y,pupil_left,blink\n";
      for (int64_t i = 0; i < 400; ++i)
        rec3 << (static_cast<double>(i) / 60.0) << ",0.4,0.6," << (2.5 + 0.002 * i) << ",1\n";
      std::ofstream pers(dir.file("personality.csv"));
      pers << "participant_id,O,C,E,A,N\nf0,0,0,0,0,0\nf1,2,2,2,2,2\nf2,1,1,1,1,1\n";
    }

    // reference counts straight from the window definition
    int64_t expected_total = 0, expected_rejected = 0;
    for (int64_t start = 0; start + 300 <= n; start += stride) {
      ++expected_total;
      for (int64_t bad : bad_rows)
        if (bad >= start && bad < start + 300) {
          ++expected_rejected;
          break;
        }
    }
    expected_total += 2 * ((400 - 300) / stride + 1);

    data::PrepareReport report;
    const auto ds = data::build_dataset(dir.str(), dir.file("personality.csv"),
                                        data::LabelMode::all_dims(), stride, 0.5, trial,
                                        &report);
    CHECK(report.windows_total == expected_total);
    CHECK(report.windows_rejected == expected_rejected);
    // every surviving window still passes the filter after denormalization
    for (const auto& side : {ds.train, ds.test})
      for (const auto& w : side)
        CHECK(data::quality_filter(data::denormalize_window(w.frames, ds.stats)));
  }
}

TEST_CASE("window_batch maps blink to plus-minus one") {
  data::GazeWindow w;
  w.frames = flat_window(0.1, -0.2, 0.3, 1.0);
  w.label = {data::LabelMode::single(data::Trait::openness), 1};
  auto batch = data::window_batch({w}, {0});
  REQUIRE(batch->shape == std::vector<int64_t>{1, 4, 300});
  CHECK(batch->data[0 * 300 + 5] == 0.1);
  CHECK(batch->data[1 * 300 + 5] == -0.2);
  CHECK(batch->data[2 * 300 + 5] == 0.3);
  CHECK(batch->data[3 * 300 + 5] == 1.0);  // blink 1 -> +1

  w.frames = flat_window(0.1, -0.2, 0.3, 0.0);
  auto batch0 = data::window_batch({w}, {0});
  CHECK(batch0->data[3 * 300 + 5] == -1.0);  // blink 0 -> -1
}
