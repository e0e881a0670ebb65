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

// Loading and saving of rasters, activation tensors and tile manifests, plus
// the two raster resampling helpers (patch merging and GSD down-sampling).

#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "latentprobe/types.hpp"

namespace latentprobe {

// ---------------------------------------------------------------------------
// PNG

/// Reads an 8-bit RGB PNG and maps every pixel through `palette`.
/// Throws FormatError("unknown color (r,g,b) at (x,y)") for colors outside
/// the palette and IoError when the file cannot be decoded.
LabelMap load_label_png(const std::filesystem::path& path, const ColorPalette& palette);

/// Writes `labels` as an 8-bit RGB PNG. Label ids outside the palette throw
/// std::out_of_range before anything is written.
void save_label_png(const LabelMap& labels, const ColorPalette& palette,
                    const std::filesystem::path& path);

/// Grayscale mask PNG: 0 <-> 0, 255 <-> 1. Any nonzero gray loads as 1.
BinaryMask load_mask_png(const std::filesystem::path& path);
void save_mask_png(const BinaryMask& mask, const std::filesystem::path& path);

/// True when the PNG stores color channels (as opposed to grayscale).
bool png_has_color(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// NPY v1.0, '<f4', C order

/// Raw decoded payload.
struct NpyArray {
  std::vector<std::size_t> shape;
  std::vector<float> data;
};

NpyArray read_npy(const std::filesystem::path& path);
void write_npy(const std::filesystem::path& path, std::span<const std::size_t> shape,
               std::span<const float> data);

using NpyTensor = std::variant<ActivationStack, ProbabilityMap, SEWeightVector>;

/// Shape (K,H,W) -> ActivationStack, (H,W) -> ProbabilityMap, (K,) -> SE weights.
/// Non-finite values are rejected; probability and SE payloads must lie in
/// [0,1].
NpyTensor load_npy_f32(const std::filesystem::path& path);

ActivationStack load_activations(const std::filesystem::path& path);
ProbabilityMap load_probability(const std::filesystem::path& path);
SEWeightVector load_se_weights(const std::filesystem::path& path);

void save_npy(const std::filesystem::path& path, const ActivationStack& acts);
void save_npy(const std::filesystem::path& path, const ProbabilityMap& prob);
void save_npy(const std::filesystem::path& path, const SEWeightVector& weights);

// ---------------------------------------------------------------------------
// Tile manifests

/// One tile. Paths are absolute after loading (resolved against the
/// manifest's directory); keys absent from the JSON stay empty.
struct TileEntry {
  std::string name;
  std::filesystem::path image;
  std::filesystem::path labels;
  std::filesystem::path activations;
  std::filesystem::path se_weights;
  std::filesystem::path probability;
  std::optional<double> gsd_cm;
};

using TileManifest = std::vector<TileEntry>;

/// Accepts a single tile object or an array of tile objects. The tile name
/// defaults to the manifest file stem (suffixed with the index for arrays).
TileManifest load_manifest(const std::filesystem::path& path);
void save_manifest(const TileManifest& manifest, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Resampling

struct Patch {
  ProbabilityMap values;
  int x0 = 0;
  int y0 = 0;
};

/// Weight of pixel `i` in a patch of extent `n` along one axis: a linear ramp
/// over the overlap band, min(1, d / band) where d is the distance from the
/// pixel center to the nearest patch edge.
double edge_ramp_weight(int i, int n, double overlap_fraction);

/// Weighted average of overlapping patches into a tile of width x height.
/// Throws std::invalid_argument for overlap_fraction outside [0,1) or for a
/// tile pixel that no patch covers.
ProbabilityMap merge_patches(std::span<const Patch> patches, int width, int height,
                             double overlap_fraction);

/// Block mean; edge blocks that do not fill a whole factor x factor cell are
/// averaged over the pixels they do contain.
ProbabilityMap downsample_mean(const ProbabilityMap& map, int factor);
ActivationStack downsample_mean(const ActivationStack& acts, int factor);
/// Block majority; ties go to the lowest label id.
LabelMap downsample_majority(const LabelMap& labels, int factor);

}  // namespace latentprobe
