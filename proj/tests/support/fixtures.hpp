/* Copyright 2026 The latentprobe Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// Synthetic raster fixtures shared by unit and acceptance tests.

#pragma once

#include <random>
#include <vector>

#include "latentprobe/types.hpp"

namespace latentprobe::testing {

struct Rect {
  int x0, y0, w, h;
};

inline void paint(BinaryMask& m, const Rect& r, std::uint8_t value = 1) {
  m.block(r.y0, r.x0, r.h, r.w).setConstant(value);
}

/// Axis-aligned rectangle of random size in [min_side, max_side] placed at
/// least `margin` pixels away from the raster border.
///
/// Under the default refinement energy a background strip of width 1 or 2
/// between a rectangle and the border is cheaper to absorb than to keep, so
/// fixtures meant to survive refinement use margin >= 3.
inline Rect random_rect(std::mt19937_64& rng, int width, int height, int min_side, int max_side,
                        int margin = 0) {
  std::uniform_int_distribution<int> side(min_side, max_side);
  const int w = std::min(side(rng), width - 2 * margin);
  const int h = std::min(side(rng), height - 2 * margin);
  std::uniform_int_distribution<int> px(margin, width - margin - w), py(margin, height - margin - h);
  return {px(rng), py(rng), w, h};
}

/// Flips each pixel of a {0,1} probability raster independently with
/// probability `rate`. The same seed gives nested flip sets for increasing
/// rates, which keeps degradation ladders monotone.
inline ProbabilityMap flip_noise(const ProbabilityMap& clean, double rate, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ProbabilityMap out = clean;
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    if (u(rng) < rate) out.data()[i] = 1.0f - out.data()[i];
  }
  return out;
}

/// Several separated buildings of varied size on a 96x96 tile.
inline BinaryMask building_scene() {
  BinaryMask m = BinaryMask::Zero(96, 96);
  const std::vector<Rect> rects = {{4, 4, 20, 14},   {32, 6, 12, 24},  {54, 4, 36, 16},
                                   {6, 34, 14, 14},  {30, 40, 26, 18}, {66, 30, 22, 30},
                                   {8, 66, 30, 22},  {46, 70, 16, 16}, {70, 70, 20, 20}};
  for (const auto& r : rects) paint(m, r);
  return m;
}

}  // namespace latentprobe::testing
