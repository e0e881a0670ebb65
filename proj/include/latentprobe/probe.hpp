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

// Latent-knowledge probe for a binary segmentation network: per-(label,
// feature map) Gaussian models fitted on penultimate-layer activations,
// per-map sub-classification (maximum likelihood or MAP-MRF), SE-weighted
// aggregation across maps, and F1 evaluation.

#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "latentprobe/graphcut.hpp"
#include "latentprobe/recon.hpp"
#include "latentprobe/types.hpp"

namespace latentprobe {

double gaussian_density(double v, double mu, double sigma);

/// Activation values per (label, feature map).
class ActivationSamples {
 public:
  ActivationSamples(int labels, int maps)
      : labels_(labels), maps_(maps), cells_(static_cast<std::size_t>(labels) * maps) {}

  int labels() const { return labels_; }
  int maps() const { return maps_; }
  std::vector<float>& cell(Label l, int k) { return cells_[static_cast<std::size_t>(l) * maps_ + k]; }
  const std::vector<float>& cell(Label l, int k) const {
    return cells_[static_cast<std::size_t>(l) * maps_ + k];
  }

  /// Concatenates `other` cell by cell.
  void append(const ActivationSamples& other);

 private:
  int labels_;
  int maps_;
  std::vector<std::vector<float>> cells_;
};

/// Collects acts[k](y, x) into cell (truth(y, x), k) for every pixel.
ActivationSamples gather_activations(const ActivationStack& acts, const LabelMap& truth,
                                     int num_labels);

/// Drops values with |v| <= 1e-12 (ReLU zeros).
std::vector<float> remove_zero_outliers(std::span<const float> samples);
ActivationSamples remove_zero_outliers(const ActivationSamples& samples);

struct GaussianCell {
  double mu = 0.0;
  double sigma = 0.0;
  long n = 0;
  bool valid = false;
};

/// Gaussian model per (label, feature map).
class ClassPDFTable {
 public:
  ClassPDFTable(std::vector<std::string> label_names, int maps);

  int labels() const { return static_cast<int>(names_.size()); }
  int maps() const { return maps_; }
  const std::vector<std::string>& names() const { return names_; }

  GaussianCell& cell(Label l, int k) { return cells_[static_cast<std::size_t>(l) * maps_ + k]; }
  const GaussianCell& cell(Label l, int k) const {
    return cells_[static_cast<std::size_t>(l) * maps_ + k];
  }

  /// Density of label l on map k at v; 0 for invalid cells.
  double density(Label l, int k, double v) const {
    const auto& c = cell(l, k);
    return c.valid ? gaussian_density(v, c.mu, c.sigma) : 0.0;
  }

  bool any_valid() const;
  bool any_valid(int k) const;

  /// {"labels": [...], "maps": K, "cells": [[{"mu","sigma","n","valid"}, ...], ...]}
  std::string to_json() const;
  static ClassPDFTable from_json(const std::string& text);
  void save(const std::filesystem::path& path) const;
  static ClassPDFTable load(const std::filesystem::path& path);

 private:
  std::vector<std::string> names_;
  int maps_;
  std::vector<GaussianCell> cells_;
};

struct FitOptions {
  int min_samples = 10;
  double sigma_floor = 1e-6;
};

/// Mean and population standard deviation (floored) per cell; cells with
/// fewer than min_samples values are marked invalid.
ClassPDFTable fit_gaussians(const ActivationSamples& samples, std::vector<std::string> label_names,
                            const FitOptions& options = {});

/// One classification image per feature map: best label and its density.
/// `present` is false when no label has a valid model on that map.
struct ClassificationImage {
  LabelMap labels;
  Raster<double> probability;
  bool present = true;
};

/// Per pixel and map: the valid label of highest density, lowest id on ties.
std::vector<ClassificationImage> mlc_classify(const ActivationStack& acts,
                                              const ClassPDFTable& table, int workers = 1);

/// MRF for feature map k: unary 1/(1 + density); pairwise w * 40 when labels
/// differ, else w * |density_l(p) - density_l(q)|. Labels without a valid
/// model get unary 2 so they never beat a valid one.
EnergyModel<double> map_mrf_model(const ActivationStack& acts, const ClassPDFTable& table, int k,
                                  double w);

/// Alpha-expansion on map_mrf_model per map, started from the MLC labeling.
std::vector<ClassificationImage> map_mrf_classify(const ActivationStack& acts,
                                                  const ClassPDFTable& table, double w,
                                                  int workers = 1, int max_sweeps = 10);

/// Per pixel: vec[label_k] += se[k] * probability_k over present maps, then
/// argmax with ties to the lowest label id.
LabelMap aggregate(std::span<const ClassificationImage> images, const SEWeightVector& se,
                   int num_labels);

LabelMap overlay_buildings(const LabelMap& sub, const BinaryMask& building_pred,
                           Label building_label = kBuildingLabel);

struct EvalReport {
  /// rows = ground truth, cols = prediction.
  Eigen::Matrix<long, Eigen::Dynamic, Eigen::Dynamic> confusion;
  Eigen::VectorXd precision;
  Eigen::VectorXd recall;
  Eigen::VectorXd f1;
  double accuracy = 0.0;
};

EvalReport evaluate_f1(const LabelMap& pred, const LabelMap& truth, int num_labels);

enum class Classifier { kMlc, kMapMrf };

struct ProbeOptions {
  Classifier classifier = Classifier::kMlc;
  double w = 0.0;
  bool refine = false;
  RefineParams refine_params;
  FitOptions fit;
  int workers = 1;
};

/// Inputs for one image. `building` is the network's binary building map.
struct ProbeTile {
  std::string name;
  ActivationStack acts;
  SEWeightVector se;
  LabelMap truth;
  BinaryMask building;
};

struct ProbeOutput {
  std::string name;
  LabelMap subclassification;
  LabelMap overlay;
  EvalReport report;
};

struct ProbeResult {
  ClassPDFTable table;
  std::vector<ProbeOutput> outputs;
};

/// Gathers activations over every tile of `fit_set`, drops zero outliers and
/// fits the table. Throws when every fitted cell is invalid.
ClassPDFTable fit_probe(std::span<const ProbeTile> fit_set, std::vector<std::string> label_names,
                        const FitOptions& options = {});

/// Classify, aggregate, optionally refine, overlay and score one tile.
ProbeOutput run_probe(const ClassPDFTable& table, const ProbeTile& tile,
                      const ProbeOptions& options = {});

/// Fit on `fit_set`, then classify, aggregate, optionally refine, overlay and
/// score every tile of `eval_set`. Throws when every fitted cell is invalid.
ProbeResult probe_pipeline(std::span<const ProbeTile> fit_set, std::span<const ProbeTile> eval_set,
                           std::vector<std::string> label_names, const ProbeOptions& options = {});

}  // namespace latentprobe
