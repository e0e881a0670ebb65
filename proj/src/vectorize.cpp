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

#include "latentprobe/vectorize.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace latentprobe {

double Polygon::signed_area() const {
  double twice = 0.0;
  const std::size_t n = vertices.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point& a = vertices[i];
    const Point& b = vertices[(i + 1) % n];
    twice += a.x() * b.y() - b.x() * a.y();
  }
  return 0.5 * twice;
}

std::vector<Polygon> BuildingOutline::rings() const {
  std::vector<Polygon> out;
  out.reserve(1 + holes.size());
  out.push_back(outer);
  out.insert(out.end(), holes.begin(), holes.end());
  return out;
}

BuildingSet connected_components(const BinaryMask& mask) {
  const int h = static_cast<int>(mask.rows());
  const int w = static_cast<int>(mask.cols());
  BuildingSet set;
  set.ids = Raster<int>::Constant(h, w, -1);

  std::vector<PixelCoord> stack;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!mask(y, x) || set.ids(y, x) >= 0) continue;
      Component comp;
      comp.id = static_cast<int>(set.components.size());
      comp.bbox = {x, y, x + 1, y + 1};
      set.ids(y, x) = comp.id;
      stack.push_back({x, y});
      while (!stack.empty()) {
        const PixelCoord c = stack.back();
        stack.pop_back();
        comp.pixels.push_back(c);
        comp.bbox.x0 = std::min(comp.bbox.x0, c.x);
        comp.bbox.y0 = std::min(comp.bbox.y0, c.y);
        comp.bbox.x1 = std::max(comp.bbox.x1, c.x + 1);
        comp.bbox.y1 = std::max(comp.bbox.y1, c.y + 1);
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = c.x + dx, ny = c.y + dy;
            if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
            if (mask(ny, nx) && set.ids(ny, nx) < 0) {
              set.ids(ny, nx) = comp.id;
              stack.push_back({nx, ny});
            }
          }
        }
      }
      std::sort(comp.pixels.begin(), comp.pixels.end(), [](const PixelCoord& a, const PixelCoord& b) {
        return a.y != b.y ? a.y < b.y : a.x < b.x;
      });
      set.components.push_back(std::move(comp));
    }
  }
  return set;
}

namespace {

// Lattice directions, clockwise on screen: east, south, west, north.
constexpr std::array<int, 4> kDx = {1, 0, -1, 0};
constexpr std::array<int, 4> kDy = {0, 1, 0, -1};

int turn_left(int d) { return (d + 3) & 3; }
int turn_right(int d) { return (d + 1) & 3; }

}  // namespace

BuildingOutline trace_boundary(const Component& component) {
  if (component.pixels.empty()) throw std::invalid_argument("cannot trace an empty component");
  const BoundingBox& box = component.bbox;
  const int bw = box.x1 - box.x0;
  const int bh = box.y1 - box.y0;

  // Local membership with a one-pixel background border.
  Raster<std::uint8_t> inside = Raster<std::uint8_t>::Zero(bh + 2, bw + 2);
  for (const auto& c : component.pixels) inside(c.y - box.y0 + 1, c.x - box.x0 + 1) = 1;
  auto member = [&](int lx, int ly) { return inside(ly + 1, lx + 1) != 0; };

  // Directed boundary edges with the component on the right-hand side of the
  // walk (screen orientation), giving positive shoelace area for outer rings.
  const int vw = bw + 1;
  const int vh = bh + 1;
  std::vector<std::uint8_t> out_edges(static_cast<std::size_t>(vw) * vh, 0);
  auto vertex = [vw](int vx, int vy) { return static_cast<std::size_t>(vy) * vw + vx; };
  std::size_t edge_count = 0;
  for (int ly = 0; ly < bh; ++ly) {
    for (int lx = 0; lx < bw; ++lx) {
      if (!member(lx, ly)) continue;
      if (!member(lx, ly - 1)) { out_edges[vertex(lx, ly)] |= 1 << 0; ++edge_count; }
      if (!member(lx + 1, ly)) { out_edges[vertex(lx + 1, ly)] |= 1 << 1; ++edge_count; }
      if (!member(lx, ly + 1)) { out_edges[vertex(lx + 1, ly + 1)] |= 1 << 2; ++edge_count; }
      if (!member(lx - 1, ly)) { out_edges[vertex(lx, ly + 1)] |= 1 << 3; ++edge_count; }
    }
  }

  // Successor of an edge arriving at a vertex heading `d`: left turn first,
  // which joins diagonally touching pixels, then straight, then right.
  auto successor = [&](std::size_t v, int d) {
    for (int cand : {turn_left(d), d, turn_right(d)}) {
      if (out_edges[v] & (1 << cand)) return cand;
    }
    throw std::logic_error("boundary edge has no successor");
  };

  std::vector<std::uint8_t> used(out_edges.size(), 0);
  std::vector<Polygon> rings;
  std::size_t consumed = 0;
  for (int vy = 0; vy < vh && consumed < edge_count; ++vy) {
    for (int vx = 0; vx < vw; ++vx) {
      const std::size_t v0 = vertex(vx, vy);
      for (int d0 = 0; d0 < 4; ++d0) {
        if (!(out_edges[v0] & (1 << d0)) || (used[v0] & (1 << d0))) continue;

        // Follow successors until the first edge comes round again.
        std::vector<std::array<int, 3>> walk;  // (vx, vy, dir)
        int cx = vx, cy = vy, d = d0;
        do {
          used[vertex(cx, cy)] |= 1 << d;
          ++consumed;
          walk.push_back({cx, cy, d});
          cx += kDx[d];
          cy += kDy[d];
          d = successor(vertex(cx, cy), d);
        } while (!(cx == vx && cy == vy && d == d0));

        Polygon ring;
        for (std::size_t i = 0; i < walk.size(); ++i) {
          const int prev_dir = walk[(i + walk.size() - 1) % walk.size()][2];
          if (walk[i][2] == prev_dir) continue;  // collinear
          ring.vertices.emplace_back(walk[i][0] + box.x0, walk[i][1] + box.y0);
        }
        ring.hole = ring.signed_area() < 0.0;
        rings.push_back(std::move(ring));
      }
    }
  }

  BuildingOutline outline;
  auto outer = std::max_element(rings.begin(), rings.end(), [](const Polygon& a, const Polygon& b) {
    return a.signed_area() < b.signed_area();
  });
  outline.outer = std::move(*outer);
  for (auto it = rings.begin(); it != rings.end(); ++it) {
    if (it != outer) outline.holes.push_back(std::move(*it));
  }
  return outline;
}

namespace {

double segment_distance(const Point& p, const Point& a, const Point& b) {
  const Point ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 == 0.0) return (p - a).norm();
  const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

}  // namespace

std::vector<std::size_t> simplify_chain(std::span<const Point> chain, double tolerance) {
  if (tolerance < 0.0) throw std::invalid_argument("Douglas-Peucker tolerance must be >= 0");
  const std::size_t n = chain.size();
  std::vector<std::size_t> out;
  if (n <= 2) {
    for (std::size_t i = 0; i < n; ++i) out.push_back(i);
    return out;
  }
  std::vector<bool> keep(n, false);
  keep.front() = keep.back() = true;
  std::vector<std::pair<std::size_t, std::size_t>> stack = {{0, n - 1}};
  while (!stack.empty()) {
    const auto [first, last] = stack.back();
    stack.pop_back();
    double max_dist = -1.0;
    std::size_t index = first;
    for (std::size_t i = first + 1; i < last; ++i) {
      const double d = segment_distance(chain[i], chain[first], chain[last]);
      if (d > max_dist) {
        max_dist = d;
        index = i;
      }
    }
    if (index != first && max_dist > tolerance) {
      keep[index] = true;
      stack.emplace_back(first, index);
      stack.emplace_back(index, last);
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (keep[i]) out.push_back(i);
  }
  return out;
}

Polygon douglas_peucker(const Polygon& ring, double tolerance) {
  if (tolerance < 0.0) throw std::invalid_argument("Douglas-Peucker tolerance must be >= 0");
  const auto& v = ring.vertices;
  const std::size_t n = v.size();
  if (n <= 3) return ring;

  // Mutually farthest pair, first in (i, j) order on ties.
  std::size_t a = 0, b = 1;
  double best = -1.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = (v[i] - v[j]).squaredNorm();
      if (d > best) {
        best = d;
        a = i;
        b = j;
      }
    }
  }

  std::vector<bool> keep(n, false);
  keep[a] = keep[b] = true;
  auto simplify_half = [&](std::size_t from, std::size_t to) {
    std::vector<Point> chain;
    std::vector<std::size_t> index;
    for (std::size_t i = from;; i = (i + 1) % n) {
      chain.push_back(v[i]);
      index.push_back(i);
      if (i == to) break;
    }
    for (std::size_t k : simplify_chain(chain, tolerance)) keep[index[k]] = true;
  };
  simplify_half(a, b);
  simplify_half(b, a);

  Polygon out;
  out.hole = ring.hole;
  for (std::size_t i = 0; i < n; ++i) {
    if (keep[i]) out.vertices.push_back(v[i]);
  }
  if (out.vertices.size() >= 3) return out;

  // Degenerate result: fall back to the largest triangle of input vertices.
  std::array<std::size_t, 3> tri = {0, 1, 2};
  double best_area = -1.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      for (std::size_t k = j + 1; k < n; ++k) {
        const Point u = v[j] - v[i], w = v[k] - v[i];
        const double area = std::abs(u.x() * w.y() - u.y() * w.x());
        if (area > best_area) {
          best_area = area;
          tri = {i, j, k};
        }
      }
    }
  }
  out.vertices = {v[tri[0]], v[tri[1]], v[tri[2]]};
  return out;
}

BinaryMask rasterize(std::span<const Polygon> rings, int width, int height) {
  BinaryMask mask = BinaryMask::Zero(height, width);
  std::vector<double> xs;
  for (int y = 0; y < height; ++y) {
    const double yc = y + 0.5;
    xs.clear();
    for (const auto& ring : rings) {
      const std::size_t n = ring.vertices.size();
      for (std::size_t i = 0; i < n; ++i) {
        const Point& a = ring.vertices[i];
        const Point& b = ring.vertices[(i + 1) % n];
        if ((a.y() > yc) != (b.y() > yc)) {
          xs.push_back(a.x() + (yc - a.y()) * (b.x() - a.x()) / (b.y() - a.y()));
        }
      }
    }
    std::sort(xs.begin(), xs.end());
    for (std::size_t i = 0; i + 1 < xs.size(); i += 2) {
      // Centers strictly between the two crossings.
      const int x_begin = std::max(0, static_cast<int>(std::floor(xs[i] - 0.5)) + 1);
      const int x_end = std::min(width - 1, static_cast<int>(std::ceil(xs[i + 1] - 0.5)) - 1);
      for (int x = x_begin; x <= x_end; ++x) mask(y, x) = 1;
    }
  }
  return mask;
}

}  // namespace latentprobe
