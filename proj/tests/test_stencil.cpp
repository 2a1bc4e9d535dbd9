#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <set>

#include "monodiff/pipeline.hpp"
#include "monodiff/stencil.hpp"

using namespace monodiff;

TEST(Directions, EnumerateTheOuterRing) {
    for (int m = 1; m <= 6; ++m) {
        const PrincipalDirections pd = principal_directions(m);
        ASSERT_EQ(pd.directions.size(), static_cast<std::size_t>(4 * m));
        std::set<std::pair<int, int>> seen;
        double prev = -INFINITY;
        for (const Direction& d : pd.directions) {
            EXPECT_EQ(std::max(std::abs(d.offset.dx), std::abs(d.offset.dy)), m);
            EXPECT_GE(d.offset.dx, 0);
            EXPECT_GT(d.angle, prev);
            EXPECT_GT(d.angle, -std::numbers::pi / 2);
            EXPECT_LE(d.angle, std::numbers::pi / 2);
            prev = d.angle;
            seen.insert({d.offset.dx, d.offset.dy});
        }
        EXPECT_EQ(seen.size(), pd.directions.size());
    }
    EXPECT_EQ(direction_offset(3, 4), (Offset{2, 3}));
    EXPECT_EQ(direction_offset(3, -4), (Offset{2, -3}));
    EXPECT_EQ(direction_offset(3, 6), (Offset{0, 3}));
    EXPECT_THROW(direction_offset(3, -6), PlanError);
    EXPECT_THROW(direction_offset(0, 0), PlanError);
}

TEST(Bound, HandValues) {
    SplittingConstants k;
    k.alpha_bar = 11.0;
    k.alpha = 45.0;
    EXPECT_EQ(stencil_upper_bound(k), 13);
    k.alpha_bar = 0.21;
    k.alpha = 2.2;
    EXPECT_EQ(stencil_upper_bound(k), 32);
    k.alpha_bar = 1.0;
    k.alpha = 1.0;
    EXPECT_EQ(stencil_upper_bound(k), 4);
}

TEST(Select, HandExamples) {
    AngleIntervals iv;
    iv.add({9.0, 2.0, 3.0});
    auto c = select_stencil(iv, 13);
    ASSERT_TRUE(c);
    EXPECT_EQ(c->m, 1);
    EXPECT_EQ(c->i1, 1);
    EXPECT_FALSE(c->i2.has_value());

    AngleIntervals narrow;
    narrow.a_sup = 0.55;
    narrow.b_inf = 0.7;
    narrow.plus_empty = false;
    c = select_stencil(narrow, 13);
    ASSERT_TRUE(c);
    EXPECT_EQ(c->m, 3);
    EXPECT_EQ(c->i1, 2);

    AngleIntervals steep;
    steep.a_sup = 1.4;
    steep.b_inf = 1.7;
    steep.plus_empty = false;
    c = select_stencil(steep, 13);
    ASSERT_TRUE(c);
    EXPECT_EQ(c->m, 3);
    EXPECT_EQ(c->i1, 4);
    EXPECT_EQ(direction_offset(3, 4).tan(), 1.5);

    EXPECT_FALSE(select_stencil(narrow, 2).has_value());
}

TEST(Select, MinusMirrorsPlus) {
    std::mt19937 rng(59);
    std::uniform_real_distribution<double> u(0.05, 6.0);
    for (int t = 0; t < 500; ++t) {
        double a = u(rng), b = u(rng);
        if (a > b) std::swap(a, b);
        for (int m = 1; m <= 8; ++m) {
            const auto p = select_plus(a, b, m);
            const auto q = select_minus(-b, -a, m);
            ASSERT_EQ(p.has_value(), q.has_value());
            if (p) {
                EXPECT_EQ(*q, -*p);
            }
        }
    }
}

TEST(Select, ChosenDirectionsAreStrictlyInside) {
    std::mt19937 rng(61);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int found = 0;
    for (int t = 0; t < 2000; ++t) {
        const double a = 5.0 * u(rng) * u(rng);
        const double w = 0.05 + u(rng);
        AngleIntervals iv;
        iv.plus_empty = false;
        iv.a_sup = a;
        iv.b_inf = a + w;
        const auto c = select_stencil(iv, 400);
        if (!c) continue;
        ++found;
        const Offset o = direction_offset(c->m, *c->i1);
        EXPECT_TRUE(iv.plus_contains(o.tan()));
        if (c->m > 1) {
            EXPECT_FALSE(select_stencil_fixed(iv, c->m - 1).has_value());
        }
    }
    EXPECT_EQ(found, 2000);
}

TEST(Select, EmptyPartsFallBackToDiagonals) {
    const AngleIntervals none;
    const auto c = select_stencil(none, 3);
    ASSERT_TRUE(c);
    EXPECT_EQ(c->m, 1);
    const Grid g(4);
    const StencilPlan p = make_plan(g, {2, 2}, *c, none);
    EXPECT_EQ(p.dir1, (Offset{1, 1}));
    EXPECT_EQ(p.dir2, (Offset{1, -1}));
}

TEST(Mesh, ConditionExamples) {
    const Grid g(10);
    SplittingConstants k;
    k.radius = 0.3;
    const MeshCondition ok = check_mesh_condition(g, 2, k);
    EXPECT_NEAR(ok.lhs, 0.2 * std::sqrt(2.0), 1e-15);
    EXPECT_TRUE(ok.passed);
    EXPECT_GT(ok.slack, 0.0);
    k.radius = 0.28;
    EXPECT_FALSE(check_mesh_condition(g, 2, k).passed);
}

TEST(Arm, ClipsAtTheBoundary) {
    const Grid g(10);
    const ArmEnd e = clip_arm(g, {1, 1}, {-2, -1});
    EXPECT_TRUE(e.clipped);
    EXPECT_DOUBLE_EQ(e.fraction, 0.5);
    EXPECT_DOUBLE_EQ(e.point.x, 0.0);
    EXPECT_DOUBLE_EQ(e.point.y, 0.05);
    EXPECT_NEAR(e.length, 0.5 * std::sqrt(5.0) * 0.1, 1e-15);
    EXPECT_FALSE(e.node.has_value());
    EXPECT_DOUBLE_EQ(e.midpoint.x, 0.05);
    EXPECT_DOUBLE_EQ(e.midpoint.y, 0.075);
}

TEST(Arm, LandsOnNodes) {
    const Grid g(10);
    const ArmEnd corner = clip_arm(g, {1, 1}, {-1, -1});
    EXPECT_FALSE(corner.clipped);
    ASSERT_TRUE(corner.node.has_value());
    EXPECT_EQ(*corner.node, (NodeIndex{0, 0}));
    const ArmEnd inner = clip_arm(g, {5, 5}, {3, 2}, 3);
    EXPECT_EQ(*inner.node, (NodeIndex{8, 7}));
    EXPECT_NEAR(inner.length, std::sqrt(13.0) * 0.1, 1e-15);
    // (2, 8) + (-3, 3) is cut at y = 1 after 2/3 of the step
    const ArmEnd cut = clip_arm(g, {2, 8}, {-3, 3});
    EXPECT_TRUE(cut.clipped);
    EXPECT_DOUBLE_EQ(cut.fraction, 2.0 / 3.0);
    ASSERT_TRUE(cut.node.has_value());
    EXPECT_EQ(*cut.node, (NodeIndex{0, 10}));
    EXPECT_THROW(clip_arm(g, {5, 5}, {1, 2}, 3), PlanError);
    EXPECT_THROW(clip_arm(g, {0, 5}, {1, 1}), PlanError);
}

TEST(Plan, Exam1UsesFiveByFive) {
    const FieldAnalysis an = analyze_field(exam1_field());
    const Grid g(100);
    const StencilPlans plans = plan_stencils(g, exam1_field(), an.lattice, an.constants);
    EXPECT_EQ(plans.max_m, 2);
    EXPECT_EQ(plans.m_cap, 13);
    EXPECT_EQ(plans.plans.size(), 99u * 99u);
    for (const StencilPlan& p : plans.plans) {
        if (!p.intervals.plus_empty) {
            EXPECT_TRUE(p.intervals.plus_contains(p.angles.tan1));
        }
        if (!p.intervals.minus_empty) {
            EXPECT_TRUE(p.intervals.minus_contains(p.angles.tan2));
        }
    }
}

TEST(Plan, Exam3IsCompactEverywhere) {
    const FieldAnalysis an = analyze_field(exam3_field());
    for (const int n : {20, 50}) {
        const StencilPlans plans = plan_stencils(Grid(n), exam3_field(), an.lattice, an.constants);
        EXPECT_EQ(plans.max_m, 1);
        EXPECT_EQ(plans.m_histogram.size(), 1u);
    }
}

TEST(Plan, FixedHalfWidth) {
    const FieldAnalysis an = analyze_field(exam1_field());
    PlanOptions po;
    po.fixed_m = 3;
    const StencilPlans plans = plan_stencils(Grid(20), exam1_field(), an.lattice, an.constants, po);
    EXPECT_EQ(plans.max_m, 3);
    EXPECT_EQ(plans.m_histogram.at(3), 19 * 19);
    po.fixed_m = 0;
    EXPECT_THROW(plan_stencils(Grid(20), exam1_field(), an.lattice, an.constants, po), PlanError);
}

TEST(Plan, ConstantTensorUsesGlobalIntervals) {
    const DiffusionField f = constant_field(9.0, 2.0, 3.0);
    const FieldAnalysis an = analyze_field(f, 0.05);
    const Grid g(12);
    const PlanningRegion region(g, f, an.lattice, an.constants.radius);
    EXPECT_TRUE(region.global());
    const StencilPlans plans = plan_stencils(g, f, an.lattice, an.constants);
    EXPECT_EQ(plans.max_m, 1);
    for (const StencilPlan& p : plans.plans) EXPECT_EQ(p.dir1, (Offset{1, 1}));
}

TEST(Plan, RegionIncludesAxisMidpoints) {
    const Grid g(8);
    const DiffusionField f = exam1_field();
    const ProbeLattice lattice(f, 0.01);
    const PlanningRegion region(g, f, lattice, 1e-4);
    const auto own = region.own_points({3, 5});
    ASSERT_EQ(own.size(), 5u);
    EXPECT_EQ(own[0], (Point{0.375, 0.625}));
    EXPECT_EQ(own[1], (Point{0.4375, 0.625}));
    EXPECT_EQ(own[3], (Point{0.375, 0.6875}));
}
