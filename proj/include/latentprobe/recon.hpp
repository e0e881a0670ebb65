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

// Classification-to-reconstruction pipeline: thresholding, MRF refinement of
// binary and multi-label maps, and per-pixel / per-building accuracy.

#pragma once

#include <span>
#include <utility>
#include <vector>

#include "latentprobe/graphcut.hpp"
#include "latentprobe/types.hpp"
#include "latentprobe/vectorize.hpp"

namespace latentprobe {

/// Pixel is 1 iff value >= tau.
BinaryMask threshold(const ProbabilityMap& prob, double tau);

struct SweepPoint {
  double tau;
  double iou;
};

/// tau = 0.05, 0.10, ..., 0.95.
std::vector<double> default_tau_grid();

std::vector<SweepPoint> threshold_sweep(const ProbabilityMap& prob, const BinaryMask& truth,
                                        std::span<const double> taus);

struct RefineParams {
  double data_cost = 10.0;
  double smooth_cost = 20.0;
  /// Charge smooth_cost only where the observed labels of the two pixels
  /// agree and the new labels differ. With this form the observed labeling
  /// always has zero energy, so refinement never changes anything.
  bool literal_smoothness = false;
  int max_sweeps = 10;
};

/// Data term: data_cost for every pixel whose new label differs from the
/// observed one. Smoothness: Potts smooth_cost on 4-neighbors, or the literal
/// form above.
EnergyModel<double> refinement_model(const LabelMap& observed, int num_labels,
                                     const RefineParams& params = {});

BinaryMask refine_binary(const BinaryMask& mask, const RefineParams& params = {});
LabelMap refine_multilabel(const LabelMap& labels, int num_labels, const RefineParams& params = {});

/// |a & b| / |a | b|, 1 when both are empty.
double iou_per_pixel(const BinaryMask& a, const BinaryMask& b);

struct ReconMetrics {
  double per_pixel_iou = 0.0;
  double per_building_iou = 0.0;
  int tp = 0;
  int fp = 0;
  int fn = 0;
  double pixel_accuracy = 0.0;
};

/// Per-building scoring. Candidate pairs are visited by descending overlap
/// |P & G|; the first unmatched prediction a ground-truth building meets is
/// its best one, and the pair is a true positive when |P & G| / |G| reaches
/// `overlap_threshold`, otherwise that building is a miss. Leftover
/// predictions are false positives. Per-pixel IoU and accuracy are filled
/// in as well.
ReconMetrics iou_per_building(const BinaryMask& pred, const BinaryMask& truth,
                              double overlap_threshold = 0.75);

struct ReconParams {
  double tau = 0.4;
  double dp_tolerance = 0.5;
  double overlap_threshold = 0.75;
  RefineParams refine;
};

/// Refine -> trace -> simplify -> rasterize.
BinaryMask reconstruct(const BinaryMask& mask, const ReconParams& params = {});

struct ReconstructionReport {
  ReconMetrics classification;
  ReconMetrics reconstruction;
  BinaryMask reconstructed;
};

ReconstructionReport reconstruction_analysis(const ProbabilityMap& prob, const BinaryMask& truth,
                                             const ReconParams& params = {});

}  // namespace latentprobe
