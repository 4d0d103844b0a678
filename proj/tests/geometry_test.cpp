#include "detpost/geometry.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "test_util.hpp"

using detpost::Box;
using detpost::BoxWH;

TEST(BoxTest, ValidatesCorners) {
    EXPECT_NO_THROW(Box(0, 0, 2, 2));
    EXPECT_NO_THROW(Box(1, 1, 1, 5));  // zero width is degenerate but legal
    EXPECT_THROW(Box(2, 0, 0, 2), std::invalid_argument);
    EXPECT_THROW(Box(0, 2, 2, 0), std::invalid_argument);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const double inf = std::numeric_limits<double>::infinity();
    EXPECT_THROW(Box(nan, 0, 1, 1), std::invalid_argument);
    EXPECT_THROW(Box(0, 0, inf, 1), std::invalid_argument);
}

TEST(BoxTest, WidthHeight) {
    const Box b(1, 2, 4, 8);
    EXPECT_DOUBLE_EQ(b.width(), 3.0);
    EXPECT_DOUBLE_EQ(b.height(), 6.0);
}

TEST(BoxWHTest, RequiresPositiveDims) {
    EXPECT_NO_THROW(BoxWH(10, 20));
    EXPECT_THROW(BoxWH(0, 20), std::invalid_argument);
    EXPECT_THROW(BoxWH(10, -1), std::invalid_argument);
    EXPECT_THROW(BoxWH(std::numeric_limits<double>::infinity(), 1),
                 std::invalid_argument);
}

TEST(AreaTest, HandValues) {
    EXPECT_DOUBLE_EQ(detpost::area(Box(0, 0, 2, 2)), 4.0);
    EXPECT_DOUBLE_EQ(detpost::area(Box(1, 1, 1, 5)), 0.0);
    EXPECT_DOUBLE_EQ(detpost::area(Box(0, 0, 3, 4)), 12.0);
}

TEST(IntersectionAreaTest, HandValues) {
    EXPECT_DOUBLE_EQ(detpost::intersection_area(Box(0, 0, 2, 2), Box(1, 1, 3, 3)), 1.0);
    EXPECT_DOUBLE_EQ(detpost::intersection_area(Box(0, 0, 1, 1), Box(5, 5, 6, 6)), 0.0);
    EXPECT_DOUBLE_EQ(detpost::intersection_area(Box(0, 0, 2, 2), Box(0, 0, 2, 2)), 4.0);
}

TEST(IouTest, HandValues) {
    EXPECT_DOUBLE_EQ(detpost::iou(Box(0, 0, 2, 2), Box(0, 0, 2, 2)), 1.0);
    EXPECT_DOUBLE_EQ(detpost::iou(Box(0, 0, 1, 1), Box(5, 5, 6, 6)), 0.0);
    EXPECT_DOUBLE_EQ(detpost::iou(Box(0, 0, 2, 2), Box(1, 0, 3, 2)), 1.0 / 3.0);
}

TEST(IouTest, ZeroUnionDefinedAsZero) {
    const Box point(1, 1, 1, 1);
    EXPECT_DOUBLE_EQ(detpost::iou(point, point), 0.0);
    EXPECT_DOUBLE_EQ(detpost::iou(point, Box(0, 0, 2, 2)), 0.0);
}

TEST(EnclosingBoxTest, HandValues) {
    EXPECT_EQ(detpost::enclosing_box(Box(0, 0, 1, 1), Box(2, 2, 3, 3)), Box(0, 0, 3, 3));
    const Box b(1, 2, 3, 4);
    EXPECT_EQ(detpost::enclosing_box(b, b), b);
    EXPECT_EQ(detpost::enclosing_box(Box(0, 0, 2, 4), Box(1, 1, 3, 2)), Box(0, 0, 3, 4));
}

TEST(CenterTest, HandValues) {
    EXPECT_EQ(detpost::center(Box(0, 0, 2, 2)), (std::pair<double, double>{1, 1}));
    EXPECT_EQ(detpost::center(Box(0, 0, 0, 0)), (std::pair<double, double>{0, 0}));
    EXPECT_EQ(detpost::center(Box(1, 2, 3, 6)), (std::pair<double, double>{2, 4}));
}

TEST(GeometryProperties, RandomizedInvariants) {
    std::mt19937_64 rng(20240811);
    for (int trial = 0; trial < 2000; ++trial) {
        const Box a = testutil::random_box(rng);
        const Box b = testutil::random_box(rng);
        const double v = detpost::iou(a, b);

        EXPECT_DOUBLE_EQ(v, detpost::iou(b, a));
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
        EXPECT_DOUBLE_EQ(detpost::iou(a, a), 1.0);
        EXPECT_LE(detpost::intersection_area(a, b),
                  std::min(detpost::area(a), detpost::area(b)) + 1e-12);

        const Box hull = detpost::enclosing_box(a, b);
        EXPECT_LE(hull.x1, std::min(a.x1, b.x1));
        EXPECT_GE(hull.x2, std::max(a.x2, b.x2));
        EXPECT_LE(hull.y1, std::min(a.y1, b.y1));
        EXPECT_GE(hull.y2, std::max(a.y2, b.y2));

        const double tx = testutil::uniform(rng, -50.0, 50.0);
        const double ty = testutil::uniform(rng, -50.0, 50.0);
        const Box at(a.x1 + tx, a.y1 + ty, a.x2 + tx, a.y2 + ty);
        const Box bt(b.x1 + tx, b.y1 + ty, b.x2 + tx, b.y2 + ty);
        EXPECT_NEAR(detpost::iou(at, bt), v, 1e-12);

        const double s = testutil::uniform(rng, 0.1, 10.0);
        const Box as(a.x1 * s, a.y1 * s, a.x2 * s, a.y2 * s);
        const Box bs(b.x1 * s, b.y1 * s, b.x2 * s, b.y2 * s);
        EXPECT_NEAR(detpost::iou(as, bs), v, 1e-9 * std::max(1.0, v));
    }
}
