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

// Pairwise MRF energies on a 4-connected pixel grid and their minimization:
// exact binary min-cut and multi-label alpha-expansion.

#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "latentprobe/errors.hpp"
#include "latentprobe/max_flow.hpp"
#include "latentprobe/types.hpp"

namespace latentprobe {

/// Unary costs for every (label, pixel) plus a pairwise cost for each
/// 4-neighbor pair. Pixels are indexed row-major (p = y * width + x) and the
/// pairwise function is always called with p < q.
template <typename Scalar = double>
class EnergyModel {
 public:
  using Index = Eigen::Index;
  using UnaryMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Pairwise = std::function<Scalar(Index p, Index q, Label lp, Label lq)>;

  EnergyModel(int width, int height, int labels)
      : width_(width), height_(height), labels_(labels),
        unary_(UnaryMatrix::Zero(labels, static_cast<Index>(width) * height)) {
    if (width < 0 || height < 0 || labels < 1) {
      throw std::invalid_argument("EnergyModel needs nonnegative size and at least one label");
    }
  }

  int width() const { return width_; }
  int height() const { return height_; }
  int labels() const { return labels_; }
  Index pixels() const { return unary_.cols(); }

  /// labels x pixels.
  UnaryMatrix& unary() { return unary_; }
  const UnaryMatrix& unary() const { return unary_; }
  Scalar unary(Label l, Index p) const { return unary_(l, p); }

  void set_pairwise(Pairwise fn) { pairwise_ = std::move(fn); }
  bool has_pairwise() const { return static_cast<bool>(pairwise_); }
  Scalar pairwise(Index p, Index q, Label lp, Label lq) const {
    return pairwise_ ? pairwise_(p, q, lp, lq) : Scalar(0);
  }

  /// Calls fn(p, q, dir) for every neighbor pair, row-major, right before down.
  template <typename Fn>
  void for_each_pair(Fn&& fn) const {
    for (int y = 0; y < height_; ++y) {
      for (int x = 0; x < width_; ++x) {
        const Index p = static_cast<Index>(y) * width_ + x;
        if (x + 1 < width_) fn(p, p + 1, GridDir::kRight);
        if (y + 1 < height_) fn(p, p + width_, GridDir::kDown);
      }
    }
  }

 private:
  int width_;
  int height_;
  int labels_;
  UnaryMatrix unary_;
  Pairwise pairwise_;
};

/// Potts smoothness: `weight` whenever the two labels differ.
template <typename Scalar = double>
typename EnergyModel<Scalar>::Pairwise potts(Scalar weight) {
  return [weight](Eigen::Index, Eigen::Index, Label a, Label b) {
    return a == b ? Scalar(0) : weight;
  };
}

class NonSubmodularError : public std::invalid_argument {
 public:
  NonSubmodularError(Eigen::Index p, Eigen::Index q)
      : std::invalid_argument("pairwise term between pixels " + std::to_string(p) + " and " +
                              std::to_string(q) + " is not submodular"),
        p_(p), q_(q) {}
  Eigen::Index p() const { return p_; }
  Eigen::Index q() const { return q_; }

 private:
  Eigen::Index p_;
  Eigen::Index q_;
};

template <typename Scalar>
void check_labeling(const EnergyModel<Scalar>& model, const LabelMap& f) {
  if (f.rows() != model.height() || f.cols() != model.width()) {
    throw DimensionError("labeling is " + std::to_string(f.cols()) + "x" +
                         std::to_string(f.rows()) + ", model is " + std::to_string(model.width()) +
                         "x" + std::to_string(model.height()));
  }
  if (f.size() > 0 && (f.minCoeff() < 0 || f.maxCoeff() >= model.labels())) {
    throw std::invalid_argument("labeling uses a label outside [0, L)");
  }
}

template <typename Scalar>
Scalar total_energy(const EnergyModel<Scalar>& model, const LabelMap& f) {
  check_labeling(model, f);
  const Label* labels = f.data();
  Scalar energy(0);
  for (Eigen::Index p = 0; p < model.pixels(); ++p) energy += model.unary(labels[p], p);
  if (model.has_pairwise()) {
    model.for_each_pair([&](Eigen::Index p, Eigen::Index q, GridDir) {
      energy += model.pairwise(p, q, labels[p], labels[q]);
    });
  }
  return energy;
}

namespace detail {

template <typename Scalar>
void check_cost(Scalar value, const char* what) {
  if (!std::isfinite(static_cast<double>(value)) || value < Scalar(0)) {
    throw std::invalid_argument(std::string(what) + " cost must be finite and nonnegative");
  }
}

template <typename Scalar>
bool violates_submodularity(Scalar e00, Scalar e01, Scalar e10, Scalar e11) {
  const Scalar cross = e01 + e10;
  const Scalar slack = Scalar(1e-12) * std::max(Scalar(1), std::abs(cross));
  return e00 + e11 > cross + slack;
}

/// One binary pairwise term: cost table indexed by (x_p, x_q).
template <typename Scalar>
struct BinaryTerm {
  Eigen::Index p;
  GridDir dir;
  Scalar e00, e01, e10, e11;
};

/// Minimizes sum_p cost_x(p) + sum terms over x in {0,1}^N for submodular
/// terms. Returns x; ambiguous pixels get 0.
template <typename Scalar>
std::vector<std::uint8_t> solve_binary_grid(int width, int height, std::vector<Scalar> cost0,
                                            std::vector<Scalar> cost1,
                                            const std::vector<BinaryTerm<Scalar>>& terms) {
  GridMaxFlow<Scalar> graph(width, height);
  for (const auto& t : terms) {
    // E = e00 + (e10-e00) x_p + (e11-e10) x_q + (e01+e10-e00-e11) (1-x_p) x_q
    const Eigen::Index q = t.dir == GridDir::kRight ? t.p + 1 : t.p + width;
    cost1[t.p] += t.e10 - t.e00;
    cost1[q] += t.e11 - t.e10;
    const Scalar cross = std::max(Scalar(0), t.e01 + t.e10 - t.e00 - t.e11);
    if (cross > Scalar(0)) graph.add_edge(t.p, t.dir, cross, Scalar(0));
  }
  for (std::size_t p = 0; p < cost0.size(); ++p) {
    const Scalar diff = cost1[p] - cost0[p];
    // Source capacity is paid when the pixel ends on the sink side (x = 1).
    if (diff > Scalar(0)) {
      graph.add_terminal(static_cast<Eigen::Index>(p), diff, Scalar(0));
    } else if (diff < Scalar(0)) {
      graph.add_terminal(static_cast<Eigen::Index>(p), Scalar(0), -diff);
    }
  }
  graph.solve();
  std::vector<std::uint8_t> x(cost0.size());
  for (std::size_t p = 0; p < x.size(); ++p) x[p] = graph.sink_side(static_cast<Eigen::Index>(p));
  return x;
}

template <typename Scalar>
void check_unary(const EnergyModel<Scalar>& model) {
  if (!model.unary().allFinite() || (model.pixels() > 0 && model.unary().minCoeff() < Scalar(0))) {
    throw std::invalid_argument("unary costs must be finite and nonnegative");
  }
}

}  // namespace detail

/// True when every neighbor pair of a two-label model satisfies
/// c(0,0) + c(1,1) <= c(0,1) + c(1,0).
template <typename Scalar>
bool is_submodular(const EnergyModel<Scalar>& model) {
  if (model.labels() != 2) return false;
  bool ok = true;
  model.for_each_pair([&](Eigen::Index p, Eigen::Index q, GridDir) {
    if (ok && detail::violates_submodularity(model.pairwise(p, q, 0, 0), model.pairwise(p, q, 0, 1),
                                             model.pairwise(p, q, 1, 0),
                                             model.pairwise(p, q, 1, 1))) {
      ok = false;
    }
  });
  return ok;
}

/// Global minimizer of a two-label submodular model. Every pair is validated
/// before solving; pixels that may take either label in some minimizer get 0.
template <typename Scalar>
LabelMap min_cut_binary(const EnergyModel<Scalar>& model) {
  if (model.labels() != 2) throw std::invalid_argument("min_cut_binary needs exactly two labels");
  detail::check_unary(model);

  std::vector<detail::BinaryTerm<Scalar>> terms;
  if (model.has_pairwise()) {
    terms.reserve(2 * static_cast<std::size_t>(model.pixels()));
    model.for_each_pair([&](Eigen::Index p, Eigen::Index q, GridDir dir) {
      const Scalar e00 = model.pairwise(p, q, 0, 0), e01 = model.pairwise(p, q, 0, 1),
                   e10 = model.pairwise(p, q, 1, 0), e11 = model.pairwise(p, q, 1, 1);
      for (Scalar e : {e00, e01, e10, e11}) detail::check_cost(e, "pairwise");
      if (detail::violates_submodularity(e00, e01, e10, e11)) throw NonSubmodularError(p, q);
      terms.push_back({p, dir, e00, e01, e10, e11});
    });
  }

  std::vector<Scalar> cost0(model.pixels()), cost1(model.pixels());
  for (Eigen::Index p = 0; p < model.pixels(); ++p) {
    cost0[p] = model.unary(0, p);
    cost1[p] = model.unary(1, p);
  }
  const auto x = detail::solve_binary_grid(model.width(), model.height(), std::move(cost0),
                                           std::move(cost1), terms);
  LabelMap f(model.height(), model.width());
  for (Eigen::Index p = 0; p < f.size(); ++p) f.data()[p] = x[p];
  return f;
}

/// Proposes the labeling reachable from `f` by letting any pixel switch to
/// `alpha`, solved exactly by one min-cut. Pair terms that are not submodular
/// for this move have their (alpha, alpha) cost lowered to the largest
/// submodular value; the caller re-scores the proposal with the true energy.
template <typename Scalar>
LabelMap expansion_move(const EnergyModel<Scalar>& model, const LabelMap& f, Label alpha) {
  const Label* labels = f.data();
  std::vector<Scalar> cost0(model.pixels()), cost1(model.pixels());
  for (Eigen::Index p = 0; p < model.pixels(); ++p) {
    cost0[p] = model.unary(labels[p], p);
    cost1[p] = model.unary(alpha, p);
  }
  std::vector<detail::BinaryTerm<Scalar>> terms;
  if (model.has_pairwise()) {
    terms.reserve(2 * static_cast<std::size_t>(model.pixels()));
    model.for_each_pair([&](Eigen::Index p, Eigen::Index q, GridDir dir) {
      const Label fp = labels[p], fq = labels[q];
      if (fp == alpha && fq == alpha) return;  // constant under the move
      const Scalar e00 = model.pairwise(p, q, fp, fq), e01 = model.pairwise(p, q, fp, alpha),
                   e10 = model.pairwise(p, q, alpha, fq);
      Scalar e11 = model.pairwise(p, q, alpha, alpha);
      for (Scalar e : {e00, e01, e10, e11}) detail::check_cost(e, "pairwise");
      if (e00 + e11 > e01 + e10) e11 = e01 + e10 - e00;
      terms.push_back({p, dir, e00, e01, e10, e11});
    });
  }
  const auto x = detail::solve_binary_grid(model.width(), model.height(), std::move(cost0),
                                           std::move(cost1), terms);
  LabelMap out = f;
  for (Eigen::Index p = 0; p < out.size(); ++p) {
    if (x[p]) out.data()[p] = alpha;
  }
  return out;
}

template <typename Scalar = double>
struct ExpansionResult {
  LabelMap labeling;
  /// Energy of the initial labeling followed by the energy after each sweep.
  std::vector<Scalar> sweep_energies;
  int sweeps = 0;
  int accepted_moves = 0;
};

/// Alpha-expansion from `init`. A move is accepted only if it strictly lowers
/// the true energy, so the energy trace is non-increasing and the initial
/// labeling is kept wherever nothing beats it. Stops after a sweep over all
/// labels without improvement or after `max_sweeps` sweeps.
///
/// Two-label submodular models are solved in one exact min-cut instead.
template <typename Scalar>
ExpansionResult<Scalar> alpha_expansion(const EnergyModel<Scalar>& model, const LabelMap& init,
                                        int max_sweeps = 10) {
  check_labeling(model, init);
  detail::check_unary(model);

  ExpansionResult<Scalar> result;
  result.labeling = init;
  Scalar energy = total_energy(model, init);
  result.sweep_energies.push_back(energy);
  if (model.labels() < 2) return result;

  if (model.labels() == 2 && is_submodular(model)) {
    LabelMap candidate = min_cut_binary(model);
    const Scalar e = total_energy(model, candidate);
    if (e < energy) {
      result.labeling = std::move(candidate);
      energy = e;
      ++result.accepted_moves;
    }
    result.sweeps = 1;
    result.sweep_energies.push_back(energy);
    return result;
  }

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    bool improved = false;
    for (Label alpha = 0; alpha < model.labels(); ++alpha) {
      LabelMap candidate = expansion_move(model, result.labeling, alpha);
      const Scalar e = total_energy(model, candidate);
      if (e < energy) {
        result.labeling = std::move(candidate);
        energy = e;
        improved = true;
        ++result.accepted_moves;
      }
    }
    ++result.sweeps;
    result.sweep_energies.push_back(energy);
    if (!improved) break;
  }
  return result;
}

}  // namespace latentprobe
