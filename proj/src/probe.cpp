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

#include "latentprobe/probe.hpp"

#include <cmath>
#include <fstream>
#include <memory>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "latentprobe/errors.hpp"
#include "latentprobe/parallel.hpp"

namespace latentprobe {
namespace {

constexpr double kZeroEpsilon = 1e-12;
constexpr double kDifferentLabelCost = 40.0;
// Above the largest valid unary 1/(1 + 0) = 1.
constexpr double kInvalidUnary = 2.0;

void require_same_size(const ActivationStack& acts, const LabelMap& labels) {
  if (acts.height() != labels.rows() || acts.width() != labels.cols()) {
    throw DimensionError("activation stack is " + std::to_string(acts.width()) + "x" +
                         std::to_string(acts.height()) + " but label map is " +
                         std::to_string(labels.cols()) + "x" + std::to_string(labels.rows()));
  }
}

void require_maps(const ActivationStack& acts, const ClassPDFTable& table) {
  if (acts.maps() != table.maps()) {
    throw DimensionError("activation stack has " + std::to_string(acts.maps()) +
                         " maps but the PDF table covers " + std::to_string(table.maps()));
  }
}

// densities(l, p) for map k; 0 where the cell is invalid.
Eigen::MatrixXd density_matrix(const ActivationStack& acts, const ClassPDFTable& table, int k) {
  Eigen::MatrixXd d(table.labels(), acts.pixels());
  const auto values = acts.values().row(k);
  for (Label l = 0; l < table.labels(); ++l) {
    for (Eigen::Index p = 0; p < acts.pixels(); ++p) d(l, p) = table.density(l, k, values(p));
  }
  return d;
}

ClassificationImage absent_image(const ActivationStack& acts) {
  return {LabelMap::Zero(acts.height(), acts.width()),
          Raster<double>::Zero(acts.height(), acts.width()), false};
}

ClassificationImage mlc_map(const ActivationStack& acts, const ClassPDFTable& table, int k) {
  if (!table.any_valid(k)) return absent_image(acts);
  const Eigen::MatrixXd d = density_matrix(acts, table, k);
  ClassificationImage out{LabelMap(acts.height(), acts.width()),
                          Raster<double>(acts.height(), acts.width()), true};
  for (Eigen::Index p = 0; p < acts.pixels(); ++p) {
    Label best = -1;
    double best_d = -1.0;
    for (Label l = 0; l < table.labels(); ++l) {
      if (table.cell(l, k).valid && d(l, p) > best_d) {
        best = l;
        best_d = d(l, p);
      }
    }
    out.labels.data()[p] = best;
    out.probability.data()[p] = best_d;
  }
  return out;
}

}  // namespace

double gaussian_density(double v, double mu, double sigma) {
  const double z = (v - mu) / sigma;
  return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * std::numbers::pi));
}

void ActivationSamples::append(const ActivationSamples& other) {
  if (other.labels_ != labels_ || other.maps_ != maps_) {
    throw DimensionError("cannot merge samples of shape " + std::to_string(other.labels_) + "x" +
                         std::to_string(other.maps_) + " into " + std::to_string(labels_) + "x" +
                         std::to_string(maps_));
  }
  for (std::size_t i = 0; i < cells_.size(); ++i) {
    cells_[i].insert(cells_[i].end(), other.cells_[i].begin(), other.cells_[i].end());
  }
}

ActivationSamples gather_activations(const ActivationStack& acts, const LabelMap& truth,
                                     int num_labels) {
  require_same_size(acts, truth);
  ActivationSamples out(num_labels, acts.maps());
  for (Eigen::Index p = 0; p < acts.pixels(); ++p) {
    const Label l = truth.data()[p];
    if (l < 0 || l >= num_labels) {
      throw std::invalid_argument("label " + std::to_string(l) + " at pixel " + std::to_string(p) +
                                  " outside [0, " + std::to_string(num_labels) + ")");
    }
  }
  for (int k = 0; k < acts.maps(); ++k) {
    const auto values = acts.values().row(k);
    for (Eigen::Index p = 0; p < acts.pixels(); ++p) {
      out.cell(truth.data()[p], k).push_back(values(p));
    }
  }
  return out;
}

std::vector<float> remove_zero_outliers(std::span<const float> samples) {
  std::vector<float> out;
  out.reserve(samples.size());
  for (float v : samples) {
    if (std::abs(static_cast<double>(v)) > kZeroEpsilon) out.push_back(v);
  }
  return out;
}

ActivationSamples remove_zero_outliers(const ActivationSamples& samples) {
  ActivationSamples out(samples.labels(), samples.maps());
  for (Label l = 0; l < samples.labels(); ++l) {
    for (int k = 0; k < samples.maps(); ++k) out.cell(l, k) = remove_zero_outliers(samples.cell(l, k));
  }
  return out;
}

ClassPDFTable::ClassPDFTable(std::vector<std::string> label_names, int maps)
    : names_(std::move(label_names)), maps_(maps), cells_(names_.size() * static_cast<std::size_t>(maps)) {
  if (maps < 0) throw std::invalid_argument("negative map count");
}

bool ClassPDFTable::any_valid() const {
  for (const auto& c : cells_) {
    if (c.valid) return true;
  }
  return false;
}

bool ClassPDFTable::any_valid(int k) const {
  for (Label l = 0; l < labels(); ++l) {
    if (cell(l, k).valid) return true;
  }
  return false;
}

std::string ClassPDFTable::to_json() const {
  nlohmann::ordered_json j;
  j["labels"] = names_;
  j["maps"] = maps_;
  auto cells = nlohmann::ordered_json::array();
  for (Label l = 0; l < labels(); ++l) {
    auto row = nlohmann::ordered_json::array();
    for (int k = 0; k < maps_; ++k) {
      const auto& c = cell(l, k);
      nlohmann::ordered_json e;
      e["mu"] = c.mu;
      e["sigma"] = c.sigma;
      e["n"] = c.n;
      e["valid"] = c.valid;
      row.push_back(std::move(e));
    }
    cells.push_back(std::move(row));
  }
  j["cells"] = std::move(cells);
  return j.dump(2) + "\n";
}

ClassPDFTable ClassPDFTable::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
    ClassPDFTable table(j.at("labels").get<std::vector<std::string>>(), j.at("maps").get<int>());
    const auto& cells = j.at("cells");
    if (cells.size() != static_cast<std::size_t>(table.labels())) {
      throw FormatError("PDF table has " + std::to_string(cells.size()) + " cell rows for " +
                        std::to_string(table.labels()) + " labels");
    }
    for (Label l = 0; l < table.labels(); ++l) {
      if (cells[l].size() != static_cast<std::size_t>(table.maps())) {
        throw FormatError("PDF table row " + std::to_string(l) + " does not cover every map");
      }
      for (int k = 0; k < table.maps(); ++k) {
        const auto& e = cells[l][k];
        auto& c = table.cell(l, k);
        c.mu = e.at("mu").get<double>();
        c.sigma = e.at("sigma").get<double>();
        c.n = e.at("n").get<long>();
        c.valid = e.at("valid").get<bool>();
        if (c.valid && !(c.sigma > 0.0)) {
          throw FormatError("valid PDF cell (" + std::to_string(l) + ", " + std::to_string(k) +
                            ") has nonpositive sigma");
        }
      }
    }
    return table;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed PDF table: ") + e.what());
  }
}

void ClassPDFTable::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << to_json();
  if (!out) throw IoError("failed writing " + path.string());
}

ClassPDFTable ClassPDFTable::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

ClassPDFTable fit_gaussians(const ActivationSamples& samples, std::vector<std::string> label_names,
                            const FitOptions& options) {
  if (label_names.size() != static_cast<std::size_t>(samples.labels())) {
    throw DimensionError("got " + std::to_string(label_names.size()) + " label names for " +
                         std::to_string(samples.labels()) + " labels");
  }
  ClassPDFTable table(std::move(label_names), samples.maps());
  for (Label l = 0; l < samples.labels(); ++l) {
    for (int k = 0; k < samples.maps(); ++k) {
      const auto& values = samples.cell(l, k);
      auto& c = table.cell(l, k);
      c.n = static_cast<long>(values.size());
      if (values.empty()) continue;
      double sum = 0.0;
      for (float v : values) sum += v;
      const double mu = sum / values.size();
      double ss = 0.0;
      for (float v : values) ss += (v - mu) * (v - mu);
      c.mu = mu;
      c.sigma = std::max(std::sqrt(ss / values.size()), options.sigma_floor);
      c.valid = c.n >= options.min_samples;
    }
  }
  return table;
}

std::vector<ClassificationImage> mlc_classify(const ActivationStack& acts,
                                              const ClassPDFTable& table, int workers) {
  require_maps(acts, table);
  std::vector<ClassificationImage> out(acts.maps());
  parallel_for(out.size(), workers, [&](std::size_t k) { out[k] = mlc_map(acts, table, static_cast<int>(k)); });
  return out;
}

EnergyModel<double> map_mrf_model(const ActivationStack& acts, const ClassPDFTable& table, int k,
                                  double w) {
  require_maps(acts, table);
  if (k < 0 || k >= acts.maps()) throw std::out_of_range("map index " + std::to_string(k));
  if (!(w >= 0.0)) throw std::invalid_argument("MRF weight must be nonnegative");
  auto d = std::make_shared<const Eigen::MatrixXd>(density_matrix(acts, table, k));
  EnergyModel<double> model(acts.width(), acts.height(), table.labels());
  for (Label l = 0; l < table.labels(); ++l) {
    if (table.cell(l, k).valid) {
      model.unary().row(l) = (1.0 + d->row(l).array()).inverse().matrix();
    } else {
      model.unary().row(l).setConstant(kInvalidUnary);
    }
  }
  model.set_pairwise([d, w](Eigen::Index p, Eigen::Index q, Label lp, Label lq) {
    if (lp != lq) return w * kDifferentLabelCost;
    return w * std::abs((*d)(lp, p) - (*d)(lq, q));
  });
  return model;
}

std::vector<ClassificationImage> map_mrf_classify(const ActivationStack& acts,
                                                  const ClassPDFTable& table, double w,
                                                  int workers, int max_sweeps) {
  require_maps(acts, table);
  if (!(w >= 0.0)) throw std::invalid_argument("MRF weight must be nonnegative");
  std::vector<ClassificationImage> out(acts.maps());
  parallel_for(out.size(), workers, [&](std::size_t i) {
    const int k = static_cast<int>(i);
    ClassificationImage init = mlc_map(acts, table, k);
    if (!init.present) {
      out[i] = std::move(init);
      return;
    }
    const auto model = map_mrf_model(acts, table, k, w);
    auto result = alpha_expansion(model, init.labels, max_sweeps);
    const auto values = acts.values().row(k);
    for (Eigen::Index p = 0; p < acts.pixels(); ++p) {
      init.probability.data()[p] = table.density(result.labeling.data()[p], k, values(p));
    }
    init.labels = std::move(result.labeling);
    out[i] = std::move(init);
  });
  return out;
}

LabelMap aggregate(std::span<const ClassificationImage> images, const SEWeightVector& se,
                   int num_labels) {
  if (static_cast<Eigen::Index>(images.size()) != se.size()) {
    throw DimensionError("got " + std::to_string(images.size()) + " classification images but " +
                         std::to_string(se.size()) + " SE weights");
  }
  if (images.empty()) throw std::invalid_argument("nothing to aggregate");
  const Eigen::Index h = images.front().labels.rows();
  const Eigen::Index wd = images.front().labels.cols();
  for (const auto& im : images) {
    if (im.labels.rows() != h || im.labels.cols() != wd || im.probability.rows() != h ||
        im.probability.cols() != wd) {
      throw DimensionError("classification images differ in size");
    }
  }
  LabelMap out(h, wd);
  Eigen::VectorXd votes(num_labels);
  for (Eigen::Index p = 0; p < h * wd; ++p) {
    votes.setZero();
    for (std::size_t k = 0; k < images.size(); ++k) {
      if (!images[k].present) continue;
      const Label l = images[k].labels.data()[p];
      if (l < 0 || l >= num_labels) throw std::out_of_range("label " + std::to_string(l));
      votes(l) += se(static_cast<Eigen::Index>(k)) * images[k].probability.data()[p];
    }
    Label best = 0;
    for (Label l = 1; l < num_labels; ++l) {
      if (votes(l) > votes(best)) best = l;
    }
    out.data()[p] = best;
  }
  return out;
}

LabelMap overlay_buildings(const LabelMap& sub, const BinaryMask& building_pred,
                           Label building_label) {
  if (sub.rows() != building_pred.rows() || sub.cols() != building_pred.cols()) {
    throw DimensionError("building mask does not match the sub-classification size");
  }
  return (building_pred.array() != 0).select(LabelMap::Constant(sub.rows(), sub.cols(), building_label), sub);
}

EvalReport evaluate_f1(const LabelMap& pred, const LabelMap& truth, int num_labels) {
  if (pred.rows() != truth.rows() || pred.cols() != truth.cols()) {
    throw DimensionError("prediction and ground truth differ in size");
  }
  EvalReport r;
  r.confusion.setZero(num_labels, num_labels);
  for (Eigen::Index p = 0; p < pred.size(); ++p) {
    const Label g = truth.data()[p];
    const Label f = pred.data()[p];
    if (g < 0 || g >= num_labels || f < 0 || f >= num_labels) {
      throw std::out_of_range("label outside [0, " + std::to_string(num_labels) + ") at pixel " +
                              std::to_string(p));
    }
    ++r.confusion(g, f);
  }
  r.precision.setZero(num_labels);
  r.recall.setZero(num_labels);
  r.f1.setZero(num_labels);
  for (Label l = 0; l < num_labels; ++l) {
    const double tp = static_cast<double>(r.confusion(l, l));
    const double predicted = static_cast<double>(r.confusion.col(l).sum());
    const double actual = static_cast<double>(r.confusion.row(l).sum());
    const double p = predicted > 0 ? tp / predicted : 0.0;
    const double rc = actual > 0 ? tp / actual : 0.0;
    r.precision(l) = p;
    r.recall(l) = rc;
    r.f1(l) = p + rc > 0 ? 2.0 * p * rc / (p + rc) : 0.0;
  }
  const long total = r.confusion.sum();
  r.accuracy = total > 0 ? static_cast<double>(r.confusion.trace()) / total : 0.0;
  return r;
}

ClassPDFTable fit_probe(std::span<const ProbeTile> fit_set, std::vector<std::string> label_names,
                        const FitOptions& options) {
  if (fit_set.empty()) throw std::invalid_argument("empty fit set");
  const int num_labels = static_cast<int>(label_names.size());
  ActivationSamples samples(num_labels, fit_set.front().acts.maps());
  for (const auto& tile : fit_set) {
    try {
      samples.append(gather_activations(tile.acts, tile.truth, num_labels));
    } catch (const std::exception& e) {
      throw std::runtime_error(tile.name + ": " + e.what());
    }
  }
  ClassPDFTable table = fit_gaussians(remove_zero_outliers(samples), std::move(label_names), options);
  if (!table.any_valid()) throw std::runtime_error("invalid PDF table: every cell is invalid");
  return table;
}

ProbeOutput run_probe(const ClassPDFTable& table, const ProbeTile& tile, const ProbeOptions& options) {
  const int num_labels = table.labels();
  try {
    const auto images = options.classifier == Classifier::kMlc
                            ? mlc_classify(tile.acts, table, options.workers)
                            : map_mrf_classify(tile.acts, table, options.w, options.workers);
    LabelMap sub = aggregate(images, tile.se, num_labels);
    if (options.refine) sub = refine_multilabel(sub, num_labels, options.refine_params);
    LabelMap overlay = overlay_buildings(sub, tile.building);
    EvalReport report = evaluate_f1(overlay, tile.truth, num_labels);
    return {tile.name, std::move(sub), std::move(overlay), std::move(report)};
  } catch (const std::exception& e) {
    throw std::runtime_error(tile.name + ": " + e.what());
  }
}

ProbeResult probe_pipeline(std::span<const ProbeTile> fit_set, std::span<const ProbeTile> eval_set,
                           std::vector<std::string> label_names, const ProbeOptions& options) {
  ProbeResult result{fit_probe(fit_set, std::move(label_names), options.fit), {}};
  result.outputs.reserve(eval_set.size());
  for (const auto& tile : eval_set) result.outputs.push_back(run_probe(result.table, tile, options));
  return result;
}

}  // namespace latentprobe
