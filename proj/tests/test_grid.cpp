#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "monodiff/grid.hpp"

using namespace monodiff;

TEST(Grid, SmallestGridHasOneInteriorNode) {
    const Grid g = build_grid(2);
    EXPECT_EQ(g.spacing(), 0.5);
    ASSERT_EQ(g.interior_count(), 1);
    const Point p = g.point(g.node(0));
    EXPECT_EQ(p.x, 0.5);
    EXPECT_EQ(p.y, 0.5);
}

TEST(Grid, TwentyOneIntervalsGiveFourHundredUnknowns) {
    const Grid g = build_grid(21);
    EXPECT_DOUBLE_EQ(g.spacing(), 1.0 / 21.0);
    EXPECT_EQ(g.interior_count(), 400);
}

TEST(Grid, HandIndexArithmetic) {
    const Grid g = build_grid(4);
    const Point p = g.point({2, 3});
    EXPECT_EQ(p.x, 0.5);
    EXPECT_EQ(p.y, 0.75);
    EXPECT_EQ(g.linear({2, 3}), 7);
}

TEST(Grid, RejectsGridsWithoutInterior) {
    EXPECT_THROW(build_grid(1), InvalidGrid);
    EXPECT_THROW(build_grid(0), InvalidGrid);
    EXPECT_THROW(build_grid(-3), InvalidGrid);
}

TEST(Grid, SpacingTimesIntervalsIsOne) {
    for (int n = 2; n <= 2000; n += 37) {
        const Grid g(n);
        EXPECT_LT(std::fabs(g.spacing() * n - 1.0), 1e-14) << n;
        EXPECT_EQ(g.coord(n), 1.0);
    }
}

TEST(Grid, BoundaryNodesHaveNoLinearIndex) {
    const Grid g(5);
    const auto boundary = g.boundary_nodes();
    EXPECT_EQ(boundary.size(), 20u);
    for (const NodeIndex& b : boundary) {
        EXPECT_TRUE(g.is_boundary(b));
        EXPECT_FALSE(g.linear(b).has_value());
    }
    EXPECT_THROW((void)g.node(g.interior_count()), InvalidGrid);
    EXPECT_THROW((void)g.node(-1), InvalidGrid);
}

TEST(Grid, LinearIndexRoundTrip) {
    for (const int n : {2, 3, 7, 40}) {
        const Grid g(n);
        for (int k = 1; k < n; ++k) {
            for (int j = 1; j < n; ++j) {
                const auto lin = g.linear({j, k});
                ASSERT_TRUE(lin.has_value());
                EXPECT_EQ(*lin, (k - 1) * (n - 1) + (j - 1));
                EXPECT_EQ(g.node(*lin), (NodeIndex{j, k}));
            }
        }
    }
}

TEST(BallNodes, ExcludesDiagonalNeighbours) {
    const Grid g(4);
    const auto nodes = ball_nodes(g, {2, 2}, 0.3);
    ASSERT_EQ(nodes.size(), 5u);
    for (const Point& p : nodes) EXPECT_LT(distance(p, {0.5, 0.5}), 0.3);
}

TEST(BallNodes, LargeAndTinyRadius) {
    const Grid g(4);
    EXPECT_EQ(ball_nodes(g, {2, 2}, 10.0).size(), 25u);
    const auto centre_only = ball_nodes(g, {1, 3}, 1e-9);
    ASSERT_EQ(centre_only.size(), 1u);
    EXPECT_EQ(centre_only.front(), g.point({1, 3}));
}

TEST(BallNodes, OpenBallExcludesTheRim) {
    const Grid g(4);
    // axis neighbours sit exactly at distance h = 0.25
    EXPECT_EQ(ball_nodes(g, {2, 2}, 0.25).size(), 1u);
}

TEST(BallNodes, ReflectionSymmetry) {
    const Grid g(9);
    for (const double r : {0.1, 0.23, 0.4}) {
        for (int k = 1; k < 9; ++k) {
            for (int j = 1; j < 9; ++j) {
                auto a = ball_nodes(g, {j, k}, r);
                auto b = ball_nodes(g, {9 - j, k}, r);
                ASSERT_EQ(a.size(), b.size());
                std::vector<Point> mirrored;
                for (const Point& p : b) mirrored.push_back({1.0 - p.x, p.y});
                for (const Point& p : a) {
                    const bool found = std::any_of(mirrored.begin(), mirrored.end(), [&](const Point& q) {
                        return std::fabs(p.x - q.x) < 1e-15 && std::fabs(p.y - q.y) < 1e-15;
                    });
                    EXPECT_TRUE(found);
                }
            }
        }
    }
}
