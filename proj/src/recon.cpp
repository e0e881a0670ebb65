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

#include "latentprobe/recon.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>
#include <string>
#include <tuple>

#include "latentprobe/errors.hpp"

namespace latentprobe {
namespace {

template <typename A, typename B>
void require_same_size(const A& a, const B& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(what) + ": " + std::to_string(a.cols()) + "x" +
                         std::to_string(a.rows()) + " vs " + std::to_string(b.cols()) + "x" +
                         std::to_string(b.rows()));
  }
}

}  // namespace

BinaryMask threshold(const ProbabilityMap& prob, double tau) {
  const float t = static_cast<float>(tau);
  return (prob >= t).cast<std::uint8_t>();
}

std::vector<double> default_tau_grid() {
  std::vector<double> grid;
  for (int i = 1; i <= 19; ++i) grid.push_back(i / 20.0);
  return grid;
}

std::vector<SweepPoint> threshold_sweep(const ProbabilityMap& prob, const BinaryMask& truth,
                                        std::span<const double> taus) {
  require_same_size(prob, truth, "threshold_sweep");
  std::vector<double> sorted(taus.begin(), taus.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<SweepPoint> out;
  out.reserve(sorted.size());
  for (double tau : sorted) out.push_back({tau, iou_per_pixel(threshold(prob, tau), truth)});
  return out;
}

EnergyModel<double> refinement_model(const LabelMap& observed, int num_labels,
                                     const RefineParams& params) {
  const int h = static_cast<int>(observed.rows());
  const int w = static_cast<int>(observed.cols());
  EnergyModel<double> model(w, h, num_labels);
  auto& unary = model.unary();
  unary.setConstant(params.data_cost);
  for (Eigen::Index p = 0; p < observed.size(); ++p) {
    const Label l = observed.data()[p];
    if (l < 0 || l >= num_labels) throw std::invalid_argument("observed label outside [0, L)");
    unary(l, p) = 0.0;
  }
  const double smooth = params.smooth_cost;
  if (params.literal_smoothness) {
    model.set_pairwise([observed, smooth](Eigen::Index p, Eigen::Index q, Label a, Label b) {
      return (observed.data()[p] == observed.data()[q] && a != b) ? smooth : 0.0;
    });
  } else {
    model.set_pairwise(potts(smooth));
  }
  return model;
}

BinaryMask refine_binary(const BinaryMask& mask, const RefineParams& params) {
  const LabelMap observed = mask.cast<Label>();
  return min_cut_binary(refinement_model(observed, 2, params)).cast<std::uint8_t>();
}

LabelMap refine_multilabel(const LabelMap& labels, int num_labels, const RefineParams& params) {
  const auto model = refinement_model(labels, num_labels, params);
  return alpha_expansion(model, labels, params.max_sweeps).labeling;
}

double iou_per_pixel(const BinaryMask& a, const BinaryMask& b) {
  require_same_size(a, b, "iou_per_pixel");
  const auto fa = a != 0;
  const auto fb = b != 0;
  const auto inter = (fa && fb).count();
  const auto uni = (fa || fb).count();
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

ReconMetrics iou_per_building(const BinaryMask& pred, const BinaryMask& truth,
                              double overlap_threshold) {
  require_same_size(pred, truth, "iou_per_building");
  ReconMetrics m;
  m.per_pixel_iou = iou_per_pixel(pred, truth);
  const auto agree = ((pred != 0) == (truth != 0)).count();
  m.pixel_accuracy = pred.size() == 0 ? 1.0 : static_cast<double>(agree) / pred.size();

  const BuildingSet ps = connected_components(pred);
  const BuildingSet gs = connected_components(truth);

  std::map<std::pair<int, int>, long> overlap;  // (gt id, pred id) -> |P & G|
  for (Eigen::Index i = 0; i < pred.size(); ++i) {
    const int g = gs.ids.data()[i], p = ps.ids.data()[i];
    if (g >= 0 && p >= 0) ++overlap[{g, p}];
  }
  std::vector<std::tuple<long, int, int>> pairs;
  pairs.reserve(overlap.size());
  for (const auto& [key, count] : overlap) pairs.emplace_back(count, key.first, key.second);
  std::sort(pairs.begin(), pairs.end(), [](const auto& a, const auto& b) {
    if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) > std::get<0>(b);
    return std::make_pair(std::get<1>(a), std::get<2>(a)) < std::make_pair(std::get<1>(b), std::get<2>(b));
  });

  std::vector<bool> gt_done(gs.components.size(), false);
  std::vector<bool> pred_used(ps.components.size(), false);
  for (const auto& [count, g, p] : pairs) {
    if (gt_done[g] || pred_used[p]) continue;
    gt_done[g] = true;
    const double ratio = static_cast<double>(count) / gs.components[g].pixels.size();
    if (ratio >= overlap_threshold) {
      pred_used[p] = true;
      ++m.tp;
    }
  }
  m.fn = static_cast<int>(gs.components.size()) - m.tp;
  m.fp = static_cast<int>(ps.components.size()) - m.tp;
  const int denom = m.tp + m.fp + m.fn;
  m.per_building_iou = denom == 0 ? 1.0 : static_cast<double>(m.tp) / denom;
  return m;
}

BinaryMask reconstruct(const BinaryMask& mask, const ReconParams& params) {
  const BinaryMask refined = refine_binary(mask, params.refine);
  const BuildingSet buildings = connected_components(refined);
  std::vector<Polygon> rings;
  for (const auto& component : buildings.components) {
    for (const auto& ring : trace_boundary(component).rings()) {
      rings.push_back(douglas_peucker(ring, params.dp_tolerance));
    }
  }
  return rasterize(rings, static_cast<int>(mask.cols()), static_cast<int>(mask.rows()));
}

ReconstructionReport reconstruction_analysis(const ProbabilityMap& prob, const BinaryMask& truth,
                                             const ReconParams& params) {
  require_same_size(prob, truth, "reconstruction_analysis");
  ReconstructionReport report;
  const BinaryMask classified = threshold(prob, params.tau);
  report.classification = iou_per_building(classified, truth, params.overlap_threshold);
  report.reconstructed = reconstruct(classified, params);
  report.reconstruction = iou_per_building(report.reconstructed, truth, params.overlap_threshold);
  return report;
}

}  // namespace latentprobe
