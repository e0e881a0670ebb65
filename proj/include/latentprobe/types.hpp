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

// Raster and tensor types shared by every module.
//
// Rasters are row-major Eigen arrays: rows() is the image height and cols()
// the width, so raster(y, x) addresses pixel (x, y) and the linear pixel
// index is y * width + x, matching the C-order layout of NPY payloads.

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace latentprobe {

template <typename T>
using Raster = Eigen::Array<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using Label = std::int32_t;

/// Per-pixel building probability in [0,1].
using ProbabilityMap = Raster<float>;
/// Per-pixel {0,1}.
using BinaryMask = Raster<std::uint8_t>;
/// Per-pixel label id in [0, L).
using LabelMap = Raster<Label>;

/// Excitation weights of the final SE block, one per probed feature map.
using SEWeightVector = Eigen::VectorXf;

/// K feature maps of a single layer, stored (K, H*W) row-major so that each
/// feature map is one contiguous row, identical to an NPY (K,H,W) payload.
class ActivationStack {
 public:
  using Storage =
      Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using MapView = Eigen::Map<const Raster<float>>;

  ActivationStack() = default;
  ActivationStack(int maps, int height, int width)
      : height_(height), width_(width), values_(Storage::Zero(maps, height * width)) {}

  int maps() const { return static_cast<int>(values_.rows()); }
  int height() const { return height_; }
  int width() const { return width_; }
  Eigen::Index pixels() const { return values_.cols(); }

  float operator()(int k, int y, int x) const { return values_(k, y * width_ + x); }
  float& operator()(int k, int y, int x) { return values_(k, y * width_ + x); }

  /// Feature map k viewed as an H x W raster.
  MapView map(int k) const { return MapView(values_.row(k).data(), height_, width_); }

  const Storage& values() const { return values_; }
  Storage& values() { return values_; }

 private:
  int height_ = 0;
  int width_ = 0;
  Storage values_;
};

using Rgb = std::array<std::uint8_t, 3>;

struct PaletteEntry {
  Label id;
  Rgb color;
  std::string name;
};

/// Ordered label <-> color table. Label ids are contiguous from 0.
class ColorPalette {
 public:
  explicit ColorPalette(std::vector<PaletteEntry> entries);

  /// building, road, car, tree, low vegetation, clutter (ids 0..5).
  static ColorPalette isprs();

  int size() const { return static_cast<int>(entries_.size()); }
  const PaletteEntry& operator[](Label id) const { return entries_.at(id); }
  const std::vector<PaletteEntry>& entries() const { return entries_; }

  std::optional<Label> lookup(const Rgb& color) const;
  std::vector<std::string> names() const;

 private:
  std::vector<PaletteEntry> entries_;
};

inline constexpr Label kBuildingLabel = 0;

}  // namespace latentprobe
