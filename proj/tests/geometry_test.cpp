#include "geoweak/geometry.hpp"

#include <cmath>

#include <gtest/gtest.h>

#include "geoweak/rng.hpp"
#include "support/oracles.hpp"

using namespace geoweak;

TEST(Iou, IdenticalBoxes) {
  const BBox b{0, 0, 10, 10};
  EXPECT_DOUBLE_EQ(iou(b, b), 1.0);
}

TEST(Iou, DisjointBoxes) {
  EXPECT_DOUBLE_EQ(iou({0, 0, 1, 1}, {5, 5, 6, 6}), 0.0);
  // edge-touching counts as disjoint
  EXPECT_DOUBLE_EQ(iou({0, 0, 1, 1}, {1, 0, 2, 1}), 0.0);
}

TEST(Iou, OneSeventhWorkedExample) {
  const BBox a{0, 0, 2, 2};
  const BBox b{1, 1, 3, 3};
  EXPECT_NEAR(iou(a, b), 1.0 / 7.0, 1e-12);
  EXPECT_DOUBLE_EQ(iou(a, b), oracles::raster_iou(a, b));
}

TEST(Iou, PropertiesOnRandomIntegerBoxes) {
  Rng rng(12345);
  for (int trial = 0; trial < 300; ++trial) {
    auto random_box = [&rng]() -> BBox {
      const double x1 = static_cast<double>(rng.below(100));
      const double y1 = static_cast<double>(rng.below(100));
      const double x2 = x1 + 1.0 + static_cast<double>(rng.below(40));
      const double y2 = y1 + 1.0 + static_cast<double>(rng.below(40));
      return {x1, y1, x2, y2};
    };
    const BBox a = random_box();
    const BBox b = random_box();
    const double v = iou(a, b);
    EXPECT_DOUBLE_EQ(v, iou(b, a));
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
    EXPECT_DOUBLE_EQ(iou(a, a), 1.0);
    EXPECT_NEAR(v, oracles::raster_iou(a, b, 160), 0.02);
  }
}

TEST(Mbr, AxisAlignedRectangleIsItself) {
  const OrientedBox o{{PixelPoint{1, 2}, {5, 2}, {5, 8}, {1, 8}}};
  EXPECT_EQ(mbr(o), (BBox{1, 2, 5, 8}));
}

TEST(Mbr, UnitSquareRotated45Degrees) {
  // corners computed independently of mbr()
  const double c = 0.5, s = std::sqrt(2.0) / 2.0;
  OrientedBox o;
  const PixelPoint base[4] = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  double xmin = 1e9, ymin = 1e9, xmax = -1e9, ymax = -1e9;
  for (int i = 0; i < 4; ++i) {
    const double dx = base[i].x - c, dy = base[i].y - c;
    const double rx = c + dx * s - dy * s;
    const double ry = c + dx * s + dy * s;
    o.corners[i] = {rx, ry};
    xmin = std::min(xmin, rx);
    ymin = std::min(ymin, ry);
    xmax = std::max(xmax, rx);
    ymax = std::max(ymax, ry);
  }
  const BBox got = mbr(o);
  EXPECT_DOUBLE_EQ(got.xmin, xmin);
  EXPECT_DOUBLE_EQ(got.ymin, ymin);
  EXPECT_DOUBLE_EQ(got.xmax, xmax);
  EXPECT_DOUBLE_EQ(got.ymax, ymax);
  EXPECT_NEAR(got.xmin, 0.5 - s, 1e-12);
  EXPECT_NEAR(got.ymin, 0.5 - s, 1e-12);
  EXPECT_NEAR(got.xmax, 0.5 + s, 1e-12);
  EXPECT_NEAR(got.ymax, 0.5 + s, 1e-12);
}

TEST(Mbr, CollinearCornersThrow) {
  const OrientedBox o{{PixelPoint{0, 0}, {1, 1}, {2, 2}, {3, 3}}};
  EXPECT_THROW(mbr(o), validation_error);
  const OrientedBox same{{PixelPoint{2, 2}, {2, 2}, {2, 2}, {2, 2}}};
  EXPECT_THROW(mbr(same), validation_error);
}

TEST(Mbr, IdempotentAndContainsCorners) {
  Rng rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    OrientedBox o;
    const double cx = rng.uniform_in(-50, 50), cy = rng.uniform_in(-50, 50);
    const double w = rng.uniform_in(1, 30), h = rng.uniform_in(1, 30);
    const double angle = rng.uniform_in(0, 2 * M_PI);
    const double ca = std::cos(angle), sa = std::sin(angle);
    const double hw = w / 2, hh = h / 2;
    const double dx[4] = {-hw, hw, hw, -hw};
    const double dy[4] = {-hh, -hh, hh, hh};
    for (int i = 0; i < 4; ++i) {
      o.corners[i] = {cx + dx[i] * ca - dy[i] * sa, cy + dx[i] * sa + dy[i] * ca};
    }
    const BBox b = mbr(o);
    for (const auto& corner : o.corners) {
      EXPECT_TRUE(contains(b, corner));
    }
    const OrientedBox rect{{PixelPoint{b.xmin, b.ymin},
                            {b.xmax, b.ymin},
                            {b.xmax, b.ymax},
                            {b.xmin, b.ymax}}};
    EXPECT_EQ(mbr(rect), b);
  }
}

TEST(BoxCenter, Examples) {
  EXPECT_EQ(box_center({0, 0, 10, 20}), (PixelPoint{5, 10}));
  EXPECT_EQ(box_center({-2, -2, 2, 2}), (PixelPoint{0, 0}));
  EXPECT_EQ(box_center({1, 1, 2, 4}), (PixelPoint{1.5, 2.5}));
}

TEST(Contains, BoundaryInclusive) {
  const BBox b{0, 0, 10, 10};
  EXPECT_TRUE(contains(b, box_center(b)));
  EXPECT_TRUE(contains(b, {0, 0}));
  EXPECT_TRUE(contains(b, {10, 10}));
  EXPECT_TRUE(contains(b, {10, 5}));
  EXPECT_FALSE(contains(b, {11, 5}));
  EXPECT_FALSE(contains(b, {5, -1}));
}
