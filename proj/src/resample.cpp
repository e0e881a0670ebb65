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

#include <algorithm>
#include <stdexcept>
#include <string>

#include "latentprobe/raster_io.hpp"

namespace latentprobe {

double edge_ramp_weight(int i, int n, double overlap_fraction) {
  const double band = overlap_fraction * n;
  if (band <= 0.0) return 1.0;
  const double d = std::min(i + 0.5, n - i - 0.5);
  return std::min(1.0, d / band);
}

ProbabilityMap merge_patches(std::span<const Patch> patches, int width, int height,
                             double overlap_fraction) {
  if (!(overlap_fraction >= 0.0 && overlap_fraction < 1.0)) {
    throw std::invalid_argument("overlap_fraction must lie in [0,1)");
  }
  Raster<double> weighted = Raster<double>::Zero(height, width);
  Raster<double> total = Raster<double>::Zero(height, width);

  for (const auto& patch : patches) {
    const int ph = static_cast<int>(patch.values.rows());
    const int pw = static_cast<int>(patch.values.cols());
    Eigen::ArrayXd wy(ph), wx(pw);
    for (int y = 0; y < ph; ++y) wy(y) = edge_ramp_weight(y, ph, overlap_fraction);
    for (int x = 0; x < pw; ++x) wx(x) = edge_ramp_weight(x, pw, overlap_fraction);

    for (int y = 0; y < ph; ++y) {
      const int ty = patch.y0 + y;
      if (ty < 0 || ty >= height) continue;
      for (int x = 0; x < pw; ++x) {
        const int tx = patch.x0 + x;
        if (tx < 0 || tx >= width) continue;
        const double w = wy(y) * wx(x);
        weighted(ty, tx) += w * patch.values(y, x);
        total(ty, tx) += w;
      }
    }
  }

  ProbabilityMap out(height, width);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      if (total(y, x) <= 0.0) {
        throw std::invalid_argument("uncovered pixel (" + std::to_string(x) + "," +
                                    std::to_string(y) + ")");
      }
      out(y, x) = static_cast<float>(std::clamp(weighted(y, x) / total(y, x), 0.0, 1.0));
    }
  }
  return out;
}

namespace {

void check_factor(int factor) {
  if (factor < 1) throw std::invalid_argument("down-sampling factor must be >= 1");
}

int blocks(Eigen::Index extent, int factor) {
  return static_cast<int>((extent + factor - 1) / factor);
}

template <typename Derived>
ProbabilityMap block_mean(const Eigen::ArrayBase<Derived>& in, int factor) {
  const auto h = in.rows(), w = in.cols();
  ProbabilityMap out(blocks(h, factor), blocks(w, factor));
  for (Eigen::Index by = 0; by < out.rows(); ++by) {
    for (Eigen::Index bx = 0; bx < out.cols(); ++bx) {
      const auto y0 = by * factor, x0 = bx * factor;
      const auto bh = std::min<Eigen::Index>(factor, h - y0);
      const auto bw = std::min<Eigen::Index>(factor, w - x0);
      const double sum = in.block(y0, x0, bh, bw).template cast<double>().sum();
      out(by, bx) = static_cast<float>(sum / static_cast<double>(bh * bw));
    }
  }
  return out;
}

}  // namespace

ProbabilityMap downsample_mean(const ProbabilityMap& map, int factor) {
  check_factor(factor);
  if (factor == 1) return map;
  return block_mean(map, factor);
}

ActivationStack downsample_mean(const ActivationStack& acts, int factor) {
  check_factor(factor);
  if (factor == 1) return acts;
  ActivationStack out(acts.maps(), blocks(acts.height(), factor), blocks(acts.width(), factor));
  for (int k = 0; k < acts.maps(); ++k) {
    const ProbabilityMap reduced = block_mean(acts.map(k), factor);
    out.values().row(k) = Eigen::Map<const Eigen::RowVectorXf>(reduced.data(), reduced.size());
  }
  return out;
}

LabelMap downsample_majority(const LabelMap& labels, int factor) {
  check_factor(factor);
  if (factor == 1) return labels;
  const auto h = labels.rows(), w = labels.cols();
  const Label max_label = labels.size() > 0 ? labels.maxCoeff() : 0;
  std::vector<int> counts(static_cast<std::size_t>(max_label) + 1);
  LabelMap out(blocks(h, factor), blocks(w, factor));
  for (Eigen::Index by = 0; by < out.rows(); ++by) {
    for (Eigen::Index bx = 0; bx < out.cols(); ++bx) {
      std::fill(counts.begin(), counts.end(), 0);
      for (Eigen::Index y = by * factor; y < std::min<Eigen::Index>(h, (by + 1) * factor); ++y) {
        for (Eigen::Index x = bx * factor; x < std::min<Eigen::Index>(w, (bx + 1) * factor); ++x) {
          ++counts[labels(y, x)];
        }
      }
      // max_element returns the first maximum, i.e. the lowest label id.
      out(by, bx) = static_cast<Label>(std::max_element(counts.begin(), counts.end()) - counts.begin());
    }
  }
  return out;
}

}  // namespace latentprobe
