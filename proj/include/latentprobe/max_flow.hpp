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

// Augmenting-path max-flow on a 4-connected pixel grid, after Boykov and
// Kolmogorov: two search trees grown from the terminals, path augmentation,
// and orphan adoption with the timestamp/distance heuristic.
//
// Arcs are visited in a fixed order (right, down, left, up) and nodes enter
// the active queue in row-major order, so a solve is fully deterministic.

#pragma once

#include <cstdint>
#include <deque>
#include <limits>
#include <vector>

#include <Eigen/Core>

namespace latentprobe {

enum class GridDir : int { kRight = 0, kDown = 1, kLeft = 2, kUp = 3 };

template <typename Scalar = double>
class GridMaxFlow {
 public:
  using Index = Eigen::Index;

  GridMaxFlow(int width, int height)
      : width_(width),
        height_(height),
        tr_cap_(static_cast<std::size_t>(width) * height, Scalar(0)),
        r_cap_(4 * tr_cap_.size(), Scalar(0)) {}

  Index nodes() const { return static_cast<Index>(tr_cap_.size()); }

  /// Adds capacity source->p and p->sink.
  void add_terminal(Index p, Scalar source_cap, Scalar sink_cap) {
    tr_cap_[p] += source_cap - sink_cap;
    flow_ += std::min(source_cap, sink_cap);
  }

  /// Adds capacity on arc p->q and q->p, where q is the neighbor of p in
  /// direction `dir`. The neighbor must exist.
  void add_edge(Index p, GridDir dir, Scalar cap_pq, Scalar cap_qp) {
    const int d = static_cast<int>(dir);
    const Index q = neighbor(p, d);
    r_cap_[arc(p, d)] += cap_pq;
    r_cap_[arc(q, reverse(d))] += cap_qp;
  }

  /// Runs to completion and returns the max-flow value (including the
  /// constant part of terminal links that cancels out).
  Scalar solve();

  /// After solve(): true if p can still reach the sink through residual arcs.
  /// Nodes that cannot are on the source side, which makes the source set
  /// the largest of all minimum cuts.
  bool sink_side(Index p) const { return sink_side_[p] != 0; }

  Scalar flow() const { return flow_; }

 private:
  enum Tree : std::uint8_t { kFree = 0, kSource = 1, kSink = 2 };
  static constexpr int kTerminal = -1;
  static constexpr int kOrphan = -2;
  static constexpr int kNone = -3;
  static constexpr int kInfiniteDist = std::numeric_limits<int>::max();

  static int reverse(int d) { return (d + 2) & 3; }
  static std::size_t arc(Index p, int d) { return static_cast<std::size_t>(4 * p + d); }

  Index neighbor(Index p, int d) const {
    const Index x = p % width_;
    const Index y = p / width_;
    switch (d) {
      case 0: return x + 1 < width_ ? p + 1 : -1;
      case 1: return y + 1 < height_ ? p + width_ : -1;
      case 2: return x > 0 ? p - 1 : -1;
      default: return y > 0 ? p - width_ : -1;
    }
  }

  void set_active(Index p) {
    if (!active_[p]) {
      active_[p] = 1;
      queue_.push_back(p);
    }
  }

  Index next_active() {
    while (!queue_.empty()) {
      const Index p = queue_.front();
      queue_.pop_front();
      active_[p] = 0;
      if (tree_[p] != kFree) return p;
    }
    return -1;
  }

  void augment(Index s_node, int s_dir);
  void process_orphan(Index p);
  void mark_sink_side();

  int width_;
  int height_;
  std::vector<Scalar> tr_cap_;
  std::vector<Scalar> r_cap_;
  Scalar flow_ = Scalar(0);

  std::vector<std::uint8_t> tree_;
  std::vector<int> parent_;
  std::vector<std::int64_t> ts_;
  std::vector<int> dist_;
  std::vector<std::uint8_t> active_;
  std::deque<Index> queue_;
  std::deque<Index> orphans_;
  std::int64_t time_ = 0;
  std::vector<std::uint8_t> sink_side_;
};

template <typename Scalar>
Scalar GridMaxFlow<Scalar>::solve() {
  const Index n = nodes();
  tree_.assign(n, kFree);
  parent_.assign(n, kNone);
  ts_.assign(n, 0);
  dist_.assign(n, 0);
  active_.assign(n, 0);
  queue_.clear();
  orphans_.clear();
  time_ = 0;

  for (Index p = 0; p < n; ++p) {
    if (tr_cap_[p] > 0) {
      tree_[p] = kSource;
    } else if (tr_cap_[p] < 0) {
      tree_[p] = kSink;
    } else {
      continue;
    }
    parent_[p] = kTerminal;
    dist_[p] = 1;
    set_active(p);
  }

  Index current = -1;
  for (;;) {
    Index p = current;
    if (p < 0 || tree_[p] == kFree) {
      p = next_active();
      if (p < 0) break;
    }
    current = -1;

    // Grow the tree of p until it touches the other tree.
    Index s_node = -1;
    int s_dir = -1;
    if (tree_[p] == kSource) {
      for (int d = 0; d < 4; ++d) {
        const Index q = neighbor(p, d);
        if (q < 0 || !(r_cap_[arc(p, d)] > 0)) continue;
        if (tree_[q] == kFree) {
          tree_[q] = kSource;
          parent_[q] = reverse(d);
          ts_[q] = ts_[p];
          dist_[q] = dist_[p] + 1;
          set_active(q);
        } else if (tree_[q] == kSink) {
          s_node = p;
          s_dir = d;
          break;
        } else if (ts_[q] <= ts_[p] && dist_[q] > dist_[p]) {
          parent_[q] = reverse(d);
          ts_[q] = ts_[p];
          dist_[q] = dist_[p] + 1;
        }
      }
    } else {
      for (int d = 0; d < 4; ++d) {
        const Index q = neighbor(p, d);
        if (q < 0 || !(r_cap_[arc(q, reverse(d))] > 0)) continue;
        if (tree_[q] == kFree) {
          tree_[q] = kSink;
          parent_[q] = reverse(d);
          ts_[q] = ts_[p];
          dist_[q] = dist_[p] + 1;
          set_active(q);
        } else if (tree_[q] == kSource) {
          s_node = q;
          s_dir = reverse(d);
          break;
        } else if (ts_[q] <= ts_[p] && dist_[q] > dist_[p]) {
          parent_[q] = reverse(d);
          ts_[q] = ts_[p];
          dist_[q] = dist_[p] + 1;
        }
      }
    }

    ++time_;
    if (s_node >= 0) {
      current = p;  // p may still have unexplored arcs
      augment(s_node, s_dir);
      while (!orphans_.empty()) {
        const Index o = orphans_.front();
        orphans_.pop_front();
        process_orphan(o);
      }
    }
  }

  mark_sink_side();
  return flow_;
}

template <typename Scalar>
void GridMaxFlow<Scalar>::augment(Index s_node, int s_dir) {
  const Index t_node = neighbor(s_node, s_dir);

  // Bottleneck along source tree, bridge arc and sink tree.
  Scalar bottleneck = r_cap_[arc(s_node, s_dir)];
  Index x = s_node;
  while (parent_[x] != kTerminal) {
    const int d = parent_[x];
    const Index up = neighbor(x, d);
    bottleneck = std::min(bottleneck, r_cap_[arc(up, reverse(d))]);
    x = up;
  }
  bottleneck = std::min(bottleneck, tr_cap_[x]);
  x = t_node;
  while (parent_[x] != kTerminal) {
    const int d = parent_[x];
    bottleneck = std::min(bottleneck, r_cap_[arc(x, d)]);
    x = neighbor(x, d);
  }
  bottleneck = std::min(bottleneck, -tr_cap_[x]);

  r_cap_[arc(s_node, s_dir)] -= bottleneck;
  r_cap_[arc(t_node, reverse(s_dir))] += bottleneck;

  x = s_node;
  while (parent_[x] != kTerminal) {
    const int d = parent_[x];
    const Index up = neighbor(x, d);
    r_cap_[arc(x, d)] += bottleneck;
    r_cap_[arc(up, reverse(d))] -= bottleneck;
    if (!(r_cap_[arc(up, reverse(d))] > 0)) {
      parent_[x] = kOrphan;
      orphans_.push_front(x);
    }
    x = up;
  }
  tr_cap_[x] -= bottleneck;
  if (!(tr_cap_[x] > 0)) {
    parent_[x] = kOrphan;
    orphans_.push_front(x);
  }

  x = t_node;
  while (parent_[x] != kTerminal) {
    const int d = parent_[x];
    const Index up = neighbor(x, d);
    r_cap_[arc(up, reverse(d))] += bottleneck;
    r_cap_[arc(x, d)] -= bottleneck;
    if (!(r_cap_[arc(x, d)] > 0)) {
      parent_[x] = kOrphan;
      orphans_.push_front(x);
    }
    x = up;
  }
  tr_cap_[x] += bottleneck;
  if (!(tr_cap_[x] < 0)) {
    parent_[x] = kOrphan;
    orphans_.push_front(x);
  }

  flow_ += bottleneck;
}

template <typename Scalar>
void GridMaxFlow<Scalar>::process_orphan(Index p) {
  const std::uint8_t tree = tree_[p];
  int best_dir = -1;
  int best_dist = kInfiniteDist;

  for (int d = 0; d < 4; ++d) {
    const Index q = neighbor(p, d);
    if (q < 0 || tree_[q] != tree || parent_[q] == kNone) continue;
    const Scalar cap = tree == kSource ? r_cap_[arc(q, reverse(d))] : r_cap_[arc(p, d)];
    if (!(cap > 0)) continue;

    // Does q still hang from a terminal?
    Index j = q;
    int dist = 0;
    for (;;) {
      if (ts_[j] == time_) {
        dist += dist_[j];
        break;
      }
      const int pa = parent_[j];
      ++dist;
      if (pa == kTerminal) {
        ts_[j] = time_;
        dist_[j] = 1;
        break;
      }
      if (pa == kOrphan) {
        dist = kInfiniteDist;
        break;
      }
      j = neighbor(j, pa);
    }
    if (dist == kInfiniteDist) continue;
    if (dist < best_dist) {
      best_dir = d;
      best_dist = dist;
    }
    int mark = dist;
    for (j = q; ts_[j] != time_; j = neighbor(j, parent_[j])) {
      ts_[j] = time_;
      dist_[j] = mark--;
    }
  }

  if (best_dir >= 0) {
    parent_[p] = best_dir;
    ts_[p] = time_;
    dist_[p] = best_dist + 1;
    return;
  }

  // No valid parent: p becomes free and its children become orphans.
  for (int d = 0; d < 4; ++d) {
    const Index q = neighbor(p, d);
    if (q < 0 || tree_[q] != tree || parent_[q] == kNone) continue;
    const Scalar cap = tree == kSource ? r_cap_[arc(q, reverse(d))] : r_cap_[arc(p, d)];
    if (cap > 0) set_active(q);
    if (parent_[q] == reverse(d)) {
      parent_[q] = kOrphan;
      orphans_.push_back(q);
    }
  }
  tree_[p] = kFree;
  parent_[p] = kNone;
}

template <typename Scalar>
void GridMaxFlow<Scalar>::mark_sink_side() {
  const Index n = nodes();
  sink_side_.assign(n, 0);
  std::vector<Index> stack;
  for (Index p = 0; p < n; ++p) {
    if (tr_cap_[p] < 0) {
      sink_side_[p] = 1;
      stack.push_back(p);
    }
  }
  while (!stack.empty()) {
    const Index v = stack.back();
    stack.pop_back();
    for (int d = 0; d < 4; ++d) {
      const Index u = neighbor(v, d);
      if (u < 0 || sink_side_[u]) continue;
      if (r_cap_[arc(u, reverse(d))] > 0) {
        sink_side_[u] = 1;
        stack.push_back(u);
      }
    }
  }
}

}  // namespace latentprobe
