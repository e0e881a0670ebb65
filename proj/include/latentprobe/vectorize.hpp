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

// Building footprint vectorization: connected components, boundary tracing on
// the pixel-corner lattice, Douglas-Peucker ring simplification and
// even-odd rasterization back to a mask.

#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "latentprobe/types.hpp"

namespace latentprobe {

using Point = Eigen::Vector2d;

/// Closed ring in pixel-corner coordinates (x right, y down). The closing
/// edge from the last vertex back to the first is implicit.
///
/// Outer rings have positive shoelace area, holes negative.
struct Polygon {
  std::vector<Point> vertices;
  bool hole = false;

  double signed_area() const;
};

struct BoundingBox {
  int x0 = 0, y0 = 0;  // inclusive
  int x1 = 0, y1 = 0;  // exclusive
};

struct PixelCoord {
  int x = 0, y = 0;
  friend bool operator==(const PixelCoord&, const PixelCoord&) = default;
};

struct Component {
  int id = 0;
  std::vector<PixelCoord> pixels;  // row-major order
  BoundingBox bbox;
};

/// 8-connected foreground components. ids follow the row-major order of each
/// component's first pixel; `ids` holds the component id per pixel, -1 for
/// background.
struct BuildingSet {
  std::vector<Component> components;
  Raster<int> ids;
};

BuildingSet connected_components(const BinaryMask& mask);

struct BuildingOutline {
  Polygon outer;
  std::vector<Polygon> holes;

  /// outer followed by holes.
  std::vector<Polygon> rings() const;
};

/// Traces the pixel-edge boundary of a nonempty component. Rings start at
/// their top-left corner and carry no collinear vertices. Where two pixels
/// of the component touch only diagonally the ring passes through the shared
/// corner twice, keeping 8-connected pixels in one ring.
BuildingOutline trace_boundary(const Component& component);

/// Douglas-Peucker on an open chain. Returns indices of the retained points
/// (always including both endpoints). Distances are point-to-segment, a point
/// is kept when its distance exceeds `tolerance`, and the first point of
/// maximal distance splits the chain.
std::vector<std::size_t> simplify_chain(std::span<const Point> chain, double tolerance);

/// Ring simplification: the ring is cut at its two mutually farthest vertices
/// and each half is simplified as an open chain. Retained vertices keep their
/// original cyclic order and start. If fewer than three vertices survive, the
/// largest-area triangle of input vertices is returned instead.
Polygon douglas_peucker(const Polygon& ring, double tolerance);

/// Pixel is 1 iff its center lies strictly inside the even-odd fill of all
/// rings together (so holes subtract).
BinaryMask rasterize(std::span<const Polygon> rings, int width, int height);

}  // namespace latentprobe
