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

#include <random>

#include <gtest/gtest.h>

#include "support/oracles.hpp"

namespace latentprobe {
namespace {

std::vector<Point> pts(std::initializer_list<std::pair<double, double>> xy) {
  std::vector<Point> out;
  for (auto [x, y] : xy) out.emplace_back(x, y);
  return out;
}

BinaryMask component_mask(const Component& c, int w, int h) {
  BinaryMask m = BinaryMask::Zero(h, w);
  for (const auto& p : c.pixels) m(p.y, p.x) = 1;
  return m;
}

BinaryMask random_blobs(std::mt19937_64& rng, int w, int h, double density) {
  std::bernoulli_distribution on(density);
  BinaryMask m(h, w);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = on(rng);
  return m;
}

TEST(ConnectedComponentsTest, EmptyMask) {
  EXPECT_TRUE(connected_components(BinaryMask::Zero(4, 4)).components.empty());
}

TEST(ConnectedComponentsTest, DiagonalNeighborsJoin) {
  BinaryMask m = BinaryMask::Zero(2, 2);
  m(0, 0) = m(1, 1) = 1;
  const auto set = connected_components(m);
  ASSERT_EQ(set.components.size(), 1u);
  EXPECT_EQ(set.components[0].pixels.size(), 2u);
}

TEST(ConnectedComponentsTest, ZeroColumnSeparatesBlocks) {
  BinaryMask m(3, 5);
  m << 1, 1, 0, 1, 1,
       1, 1, 0, 1, 1,
       0, 0, 0, 1, 0;
  const auto set = connected_components(m);
  ASSERT_EQ(set.components.size(), 2u);
  EXPECT_EQ(set.components[0].pixels.size(), 4u);
  EXPECT_EQ(set.components[1].pixels.size(), 5u);
  EXPECT_EQ(set.ids(0, 0), 0);
  EXPECT_EQ(set.ids(2, 3), 1);
  EXPECT_EQ(set.ids(0, 2), -1);
  const BoundingBox& b = set.components[1].bbox;
  EXPECT_EQ(std::tie(b.x0, b.y0, b.x1, b.y1), std::make_tuple(3, 0, 5, 3));
}

TEST(ConnectedComponentsTest, PartitionsForeground) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const BinaryMask m = random_blobs(rng, 17, 13, 0.45);
    const auto set = connected_components(m);
    BinaryMask covered = BinaryMask::Zero(13, 17);
    for (const auto& c : set.components) {
      for (const auto& p : c.pixels) {
        EXPECT_EQ(covered(p.y, p.x), 0);
        covered(p.y, p.x) = 1;
      }
    }
    EXPECT_TRUE((covered == m).all());
  }
}

TEST(TraceBoundaryTest, SinglePixelIsUnitSquare) {
  BinaryMask m = BinaryMask::Zero(3, 3);
  m(0, 0) = 1;
  const auto outline = trace_boundary(connected_components(m).components[0]);
  EXPECT_EQ(outline.outer.vertices, pts({{0, 0}, {1, 0}, {1, 1}, {0, 1}}));
  EXPECT_FALSE(outline.outer.hole);
  EXPECT_DOUBLE_EQ(outline.outer.signed_area(), 1.0);
  EXPECT_TRUE(outline.holes.empty());
}

TEST(TraceBoundaryTest, HorizontalBarElidesCollinearVertices) {
  BinaryMask m = BinaryMask::Zero(2, 3);
  m(0, 1) = m(0, 2) = 1;
  const auto outline = trace_boundary(connected_components(m).components[0]);
  EXPECT_EQ(outline.outer.vertices, pts({{1, 0}, {3, 0}, {3, 1}, {1, 1}}));
}

TEST(TraceBoundaryTest, BlockWithCenterHole) {
  BinaryMask m = BinaryMask::Ones(3, 3);
  m(1, 1) = 0;
  const auto outline = trace_boundary(connected_components(m).components[0]);
  EXPECT_EQ(outline.outer.vertices, pts({{0, 0}, {3, 0}, {3, 3}, {0, 3}}));
  ASSERT_EQ(outline.holes.size(), 1u);
  EXPECT_TRUE(outline.holes[0].hole);
  EXPECT_DOUBLE_EQ(outline.holes[0].signed_area(), -1.0);
  EXPECT_EQ(outline.holes[0].vertices.size(), 4u);
}

TEST(TraceBoundaryTest, DiagonalPixelsShareOneRing) {
  BinaryMask m = BinaryMask::Zero(2, 2);
  m(0, 0) = m(1, 1) = 1;
  const auto outline = trace_boundary(connected_components(m).components[0]);
  EXPECT_TRUE(outline.holes.empty());
  EXPECT_EQ(outline.outer.vertices.size(), 8u);
  EXPECT_DOUBLE_EQ(outline.outer.signed_area(), 2.0);
}

TEST(TraceBoundaryTest, RasterizeRoundTripIsExact) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    const int w = 8 + trial % 11, h = 6 + trial % 7;
    const BinaryMask m = random_blobs(rng, w, h, 0.3 + 0.004 * trial);
    for (const auto& c : connected_components(m).components) {
      const auto outline = trace_boundary(c);
      EXPECT_GT(outline.outer.signed_area(), 0.0);
      for (const auto& hole : outline.holes) EXPECT_LT(hole.signed_area(), 0.0);
      const auto rings = outline.rings();
      EXPECT_TRUE((rasterize(rings, w, h) == component_mask(c, w, h)).all()) << "trial " << trial;
    }
  }
}

TEST(DouglasPeuckerTest, CollinearChainKeepsEndpoints) {
  const auto chain = pts({{0, 0}, {1, 1}, {2, 2}, {3, 3}, {4, 4}});
  EXPECT_EQ(simplify_chain(chain, 0.1), (std::vector<std::size_t>{0, 4}));
}

TEST(DouglasPeuckerTest, OffsetBelowToleranceIsRemoved) {
  EXPECT_EQ(simplify_chain(pts({{0, 0}, {2, 0.49}, {4, 0}}), 0.5),
            (std::vector<std::size_t>{0, 2}));
  EXPECT_EQ(simplify_chain(pts({{0, 0}, {2, 0.51}, {4, 0}}), 0.5),
            (std::vector<std::size_t>{0, 1, 2}));
}

TEST(DouglasPeuckerTest, LatticeSquareKeepsCorners) {
  // Every unit lattice point on the boundary of a 3x3 square.
  Polygon ring;
  for (int x = 0; x < 3; ++x) ring.vertices.emplace_back(x, 0);
  for (int y = 0; y < 3; ++y) ring.vertices.emplace_back(3, y);
  for (int x = 3; x > 0; --x) ring.vertices.emplace_back(x, 3);
  for (int y = 3; y > 0; --y) ring.vertices.emplace_back(0, y);
  const Polygon out = douglas_peucker(ring, 0.5);
  EXPECT_EQ(out.vertices, pts({{0, 0}, {3, 0}, {3, 3}, {0, 3}}));
}

TEST(DouglasPeuckerTest, DegenerateRingFallsBackToLargestTriangle) {
  Polygon sliver;
  sliver.vertices = pts({{0, 0}, {5, 0.1}, {10, 0}, {5, -0.1}});
  const Polygon out = douglas_peucker(sliver, 0.5);
  ASSERT_EQ(out.vertices.size(), 3u);
  EXPECT_EQ(out.vertices, pts({{0, 0}, {5, 0.1}, {10, 0}}));
}

TEST(DouglasPeuckerTest, RandomChainsMatchRecursiveOracle) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> coord(0.0, 6.0);
  std::uniform_int_distribution<int> size(2, 12);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<Point> chain(size(rng));
    for (auto& p : chain) p = Point(coord(rng), coord(rng));
    const double tol = 0.25 * (trial % 8);
    const auto got = simplify_chain(chain, tol);
    const auto expected = testing::dp_oracle_indices(chain, tol);
    EXPECT_EQ(std::vector<int>(got.begin(), got.end()), expected) << "trial " << trial;
  }
}

TEST(DouglasPeuckerTest, RingPropertiesHold) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> jitter(-1.5, 1.5);
  for (int trial = 0; trial < 200; ++trial) {
    Polygon ring;
    const int n = 4 + trial % 60;
    for (int i = 0; i < n; ++i) {
      const double angle = 2 * M_PI * i / n;
      const double r = 10 + jitter(rng);
      ring.vertices.emplace_back(r * std::cos(angle), r * std::sin(angle));
    }
    const double tol = 0.5 + 0.1 * (trial % 5);
    const Polygon out = douglas_peucker(ring, tol);
    ASSERT_GE(out.vertices.size(), 3u);

    // Subset, in cyclic order, with every dropped vertex near its spanning segment.
    std::vector<std::size_t> idx;
    for (const auto& v : out.vertices) {
      const auto it = std::find(ring.vertices.begin(), ring.vertices.end(), v);
      ASSERT_NE(it, ring.vertices.end());
      idx.push_back(it - ring.vertices.begin());
    }
    EXPECT_TRUE(std::is_sorted(idx.begin(), idx.end()));
    for (std::size_t k = 0; k < idx.size(); ++k) {
      const std::size_t a = idx[k], b = idx[(k + 1) % idx.size()];
      for (std::size_t i = (a + 1) % n; i != b; i = (i + 1) % n) {
        const Point& p = ring.vertices[i];
        const Point& pa = ring.vertices[a];
        const Point ab = ring.vertices[b] - pa;
        const double t = std::clamp((p - pa).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
        EXPECT_LE((p - (pa + t * ab)).norm(), tol + 1e-12);
      }
    }
    EXPECT_EQ(douglas_peucker(out, tol).vertices, out.vertices);
  }
}

TEST(RasterizeTest, UnitSquare) {
  Polygon sq;
  sq.vertices = pts({{0, 0}, {1, 0}, {1, 1}, {0, 1}});
  const std::vector<Polygon> rings = {sq};
  EXPECT_TRUE((rasterize(rings, 1, 1) == 1).all());
}

TEST(RasterizeTest, TriangleMatchesPointInPolygonOracle) {
  Polygon tri;
  tri.vertices = pts({{0, 0}, {4, 0}, {0, 4}});
  const std::vector<Polygon> rings = {tri};
  const BinaryMask m = rasterize(rings, 4, 4);
  BinaryMask expected(4, 4);
  for (int y = 0; y < 4; ++y) {
    for (int x = 0; x < 4; ++x) {
      expected(y, x) = testing::inside_even_odd({tri.vertices}, x + 0.5, y + 0.5);
    }
  }
  EXPECT_TRUE((m == expected).all());
  // Centers on the hypotenuse (x + y = 3) are excluded.
  EXPECT_EQ(m.cast<int>().sum(), 6);
}

TEST(RasterizeTest, RandomPolygonsMatchOracle) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> coord(0.0, 10.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Polygon> rings(1 + trial % 2);
    std::vector<std::vector<Point>> raw;
    for (auto& r : rings) {
      for (int i = 0; i < 3 + trial % 6; ++i) r.vertices.emplace_back(coord(rng), coord(rng));
      raw.push_back(r.vertices);
    }
    const BinaryMask m = rasterize(rings, 10, 10);
    for (int y = 0; y < 10; ++y) {
      for (int x = 0; x < 10; ++x) {
        EXPECT_EQ(m(y, x) != 0, testing::inside_even_odd(raw, x + 0.5, y + 0.5))
            << "trial " << trial << " pixel " << x << "," << y;
      }
    }
  }
}

}  // namespace
}  // namespace latentprobe
