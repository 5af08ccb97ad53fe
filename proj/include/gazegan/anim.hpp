// SPDX-License-Identifier: Apache-2.0
//
// Device-space gaze to world-space animation: look-at targets from the
// tracker's field of view, eyelid blendshape weights, pupil scale and blink
// events, plus a line-delimited export format.
#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "gazegan/dataio.hpp"

namespace gaze::anim {

// Viewer rig: eye midpoint, viewing distance and the tracker field of view
// (defaults match 60 deg horizontal x 46 deg vertical glasses).
struct EyeRig {
  std::array<double, 3> eye_position{0.0, 0.0, 0.0};
  double viewing_distance = 1.0;
  double h_fov_deg = 60.0;
  double v_fov_deg = 46.0;
};

// Linear eyelid map with a blink override; weight 1 means closed.
struct EyelidMap {
  double slope = -1.0;
  double intercept = 1.0;
};

// target = ((2x-1) d |tan(h/2)| + eye_x, (2y-1) d |tan(v/2)| + eye_y, d + eye_z).
// x and y are clamped into [0,1]; the normalized viewing direction is
// independent of d.
std::array<double, 3> gaze_to_world(double x, double y, const EyeRig& rig);

// clamp(intercept + slope*y, 0, 1); a blink frame forces full closure.
double eyelid_weight(double y, bool blink, const EyelidMap& map = {});

// pupil_mm / baseline_mm; both must be positive.
double pupil_scale(double pupil_mm, double baseline_mm);

// Maximal runs of 1s as (start_frame, duration_frames).
std::vector<std::pair<int64_t, int64_t>> blink_events(const std::vector<double>& blink);

struct AnimFrame {
  double t = 0.0;
  std::array<double, 3> target{0.0, 0.0, 0.0};
  double eyelid_weight = 0.0;
  double pupil_scale = 1.0;
  int blink = 0;
};

std::vector<AnimFrame> build_animation(const data::GazeWindow& device_window,
                                       const EyeRig& rig, double baseline_mm,
                                       const EyelidMap& map = {});

// One frame per line: `t tx ty tz eyelid pupil_scale blink`, space-separated,
// 17-significant-digit decimals, '\n' terminated. Deterministic byte-for-byte.
void export_animation(const data::GazeWindow& device_window, const EyeRig& rig,
                      double baseline_mm, const std::string& path,
                      const EyelidMap& map = {});

std::vector<AnimFrame> read_animation(const std::string& path);

}  // namespace gaze::anim
