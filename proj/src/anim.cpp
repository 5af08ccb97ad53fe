// SPDX-License-Identifier: Apache-2.0
#include "gazegan/anim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "gazegan/error.hpp"
#include "gazegan/textio.hpp"

namespace gaze::anim {

namespace {

constexpr double kDegToRad = M_PI / 180.0;

void check_rig(const EyeRig& rig) {
  if (!(rig.viewing_distance > 0.0))
    throw ContractError("viewing distance must be positive");
  if (!(rig.h_fov_deg > 0.0 && rig.h_fov_deg < 180.0) ||
      !(rig.v_fov_deg > 0.0 && rig.v_fov_deg < 180.0))
    throw ContractError("field-of-view angles must be in (0, 180) degrees");
}

}  // namespace

std::array<double, 3> gaze_to_world(double x, double y, const EyeRig& rig) {
  check_rig(rig);
  x = std::clamp(x, 0.0, 1.0);
  y = std::clamp(y, 0.0, 1.0);
  const double d = rig.viewing_distance;
  const double half_h = std::abs(std::tan(rig.h_fov_deg / 2.0 * kDegToRad));
  const double half_v = std::abs(std::tan(rig.v_fov_deg / 2.0 * kDegToRad));
  return {(2.0 * x - 1.0) * d * half_h + rig.eye_position[0],
          (2.0 * y - 1.0) * d * half_v + rig.eye_position[1],
          d + rig.eye_position[2]};
}

double eyelid_weight(double y, bool blink, const EyelidMap& map) {
  if (blink) return 1.0;
  y = std::clamp(y, 0.0, 1.0);
  return std::clamp(map.intercept + map.slope * y, 0.0, 1.0);
}

double pupil_scale(double pupil_mm, double baseline_mm) {
  if (!(pupil_mm > 0.0) || !(baseline_mm > 0.0))
    throw ContractError("pupil_scale needs positive diameters");
  return pupil_mm / baseline_mm;
}

std::vector<std::pair<int64_t, int64_t>> blink_events(const std::vector<double>& blink) {
  std::vector<std::pair<int64_t, int64_t>> events;
  const int64_t n = static_cast<int64_t>(blink.size());
  int64_t i = 0;
  while (i < n) {
    const double v = blink[static_cast<size_t>(i)];
    if (v != 0.0 && v != 1.0) throw ContractError("blink channel must be binary");
    if (v == 1.0) {
      int64_t start = i;
      while (i < n && blink[static_cast<size_t>(i)] == 1.0) ++i;
      events.emplace_back(start, i - start);
    } else {
      ++i;
    }
  }
  return events;
}

std::vector<AnimFrame> build_animation(const data::GazeWindow& device_window,
                                       const EyeRig& rig, double baseline_mm,
                                       const EyelidMap& map) {
  check_rig(rig);
  if (static_cast<int64_t>(device_window.frames.size()) !=
      data::kWindowFrames * data::kChannels)
    throw ContractError("animation export expects a full 300x4 window");

  std::vector<AnimFrame> frames;
  frames.reserve(static_cast<size_t>(data::kWindowFrames));
  for (int64_t k = 0; k < data::kWindowFrames; ++k) {
    AnimFrame f;
    f.t = static_cast<double>(k) / data::kSampleRateHz;
    const double x = device_window.at(k, 0);
    const double y = device_window.at(k, 1);
    f.blink = device_window.at(k, 3) >= 0.5 ? 1 : 0;
    f.target = gaze_to_world(x, y, rig);
    f.eyelid_weight = eyelid_weight(y, f.blink == 1, map);
    f.pupil_scale = pupil_scale(device_window.at(k, 2), baseline_mm);
    frames.push_back(f);
  }
  return frames;
}

void export_animation(const data::GazeWindow& device_window, const EyeRig& rig,
                      double baseline_mm, const std::string& path, const EyelidMap& map) {
  const auto frames = build_animation(device_window, rig, baseline_mm, map);
  std::ofstream out(path);
  if (!out) throw IoError("cannot write animation: " + path);
  for (const auto& f : frames) {
    out << format_g17(f.t) << ' ' << format_g17(f.target[0]) << ' '
        << format_g17(f.target[1]) << ' ' << format_g17(f.target[2]) << ' '
        << format_g17(f.eyelid_weight) << ' ' << format_g17(f.pupil_scale) << ' '
        << f.blink << '\n';
  }
  if (!out) throw IoError("animation write failed: " + path);
}

std::vector<AnimFrame> read_animation(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open animation: " + path);
  std::vector<AnimFrame> frames;
  std::string line;
  size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    const auto trimmed = trim(line);
    if (trimmed.empty()) continue;
    const auto fields = split(trimmed, ' ');
    if (fields.size() != 7) throw ParseError("animation line needs 7 fields", line_number);
    AnimFrame f;
    int64_t blink = 0;
    const bool ok = parse_double(fields[0], f.t) && parse_double(fields[1], f.target[0]) &&
                    parse_double(fields[2], f.target[1]) &&
                    parse_double(fields[3], f.target[2]) &&
                    parse_double(fields[4], f.eyelid_weight) &&
                    parse_double(fields[5], f.pupil_scale) && parse_int(fields[6], blink);
    if (!ok || (blink != 0 && blink != 1))
      throw ParseError("unparsable animation record", line_number);
    f.blink = static_cast<int>(blink);
    frames.push_back(f);
  }
  return frames;
}

}  // namespace gaze::anim
