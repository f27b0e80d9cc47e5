#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "lindods/delay.hpp"

using namespace lindods;

TEST(Delay, DelayedPoint) {
    EXPECT_DOUBLE_EQ(DelayRelation::affine(1, 1).delayed_point(0), -1);
    EXPECT_DOUBLE_EQ(DelayRelation::moebius(1).delayed_point(1), 0);
    EXPECT_THROW(DelayRelation::general("x").delayed_point(0.7), DomainError);
    EXPECT_THROW(DelayRelation::qscale(0.5).delayed_point(-1), DomainError);
    EXPECT_THROW(DelayRelation::moebius(1).delayed_point(-2), DomainError);
}

TEST(Delay, Advance) {
    EXPECT_DOUBLE_EQ(DelayRelation::affine(2, 1).advance(0), 0.5);
    EXPECT_DOUBLE_EQ(DelayRelation::qscale(0.5).advance(1), 2);
    EXPECT_THROW(DelayRelation::moebius(1).advance(1), NoForwardPoint);
    // Past the fixed point tau/(q-1) there is no forward point.
    EXPECT_THROW(DelayRelation::affine(2, 1).advance(1.5), NoForwardPoint);
}

TEST(Delay, AdvanceGeneralByBisection) {
    const auto rel = DelayRelation::general("x - 1 - 0.5*sin(x)");
    for (double x : {-2.0, 0.0, 0.3, 5.0}) {
        const double next = rel.advance(x);
        EXPECT_NEAR(rel.delayed_point(next), x, 1e-13 * (1 + std::fabs(x)));
    }
    // Needs several doublings of the bracket.
    const auto slow = DelayRelation::general("x - 40");
    EXPECT_NEAR(slow.advance(0), 40, 1e-12);
}

TEST(Delay, AdvanceGeneralDetectsDecreasing) {
    // g(t) + 3 stays negative and falls once the bracket crosses 0.
    const auto rel = DelayRelation::general("-abs(x) - 5");
    EXPECT_THROW(rel.advance(-3), NotMonotone);
}

TEST(Delay, BuildMesh) {
    auto pts = build_mesh(DelayRelation::affine(2, 1), 0, 3).points;
    ASSERT_EQ(pts.size(), 5u);
    const double want1[] = {-1, 0, 0.5, 0.75, 0.875};
    for (int i = 0; i < 5; ++i) EXPECT_DOUBLE_EQ(pts[i], want1[i]);

    pts = build_mesh(DelayRelation::constant(1), 0, 3).points;
    const double want2[] = {-1, 0, 1, 2, 3};
    for (int i = 0; i < 5; ++i) EXPECT_DOUBLE_EQ(pts[i], want2[i]);

    pts = build_mesh(DelayRelation::qscale(0.5), 1, 2).points;
    const double want3[] = {0.5, 1, 2, 4};
    for (int i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(pts[i], want3[i]);

    EXPECT_THROW(build_mesh(DelayRelation::moebius(1), 0, 3), NoForwardPoint);
    EXPECT_THROW(build_mesh(DelayRelation::constant(1), 0, 0), ParameterDomainError);
}

TEST(Delay, ClosedFormPoint) {
    const DelayRelation::Affine rel{2, 1};
    EXPECT_DOUBLE_EQ(closed_form_point(rel, 0, -1, 3), 0.875);
    EXPECT_LT(std::fabs(closed_form_point(rel, 0, -1, 50) - 1), 1e-14);
    EXPECT_EQ(closed_form_point({1, 1}, 0, -1, 5), 5);
    EXPECT_THROW(closed_form_point(rel, 0, -0.5, 3), ParameterDomainError);
}

TEST(Delay, AffineSpecialisationsAgree) {
    const auto c = DelayRelation::constant(0.7), a1 = DelayRelation::affine(1, 0.7);
    const auto s = DelayRelation::qscale(0.3), a0 = DelayRelation::affine(0.3, 0);
    for (double x : {0.1, 1.0, 2.5, 10.0}) {
        EXPECT_DOUBLE_EQ(c.delayed_point(x), a1.delayed_point(x));
        EXPECT_DOUBLE_EQ(c.advance(x), a1.advance(x));
        EXPECT_DOUBLE_EQ(s.delayed_point(x), a0.delayed_point(x));
        EXPECT_DOUBLE_EQ(s.advance(x), a0.advance(x));
    }
}

TEST(Delay, TextRoundTrip) {
    for (const char* text : {"constant(1)", "affine(2, 1)", "qscale(0.5)", "moebius(-0.25)", "general(\"x-1\")"}) {
        const auto rel = DelayRelation::parse_text(text);
        EXPECT_EQ(rel.to_string(), text);
        EXPECT_EQ(DelayRelation::parse_text(rel.to_string()).to_string(), rel.to_string());
    }
    EXPECT_THROW(DelayRelation::parse_text("affine(2)"), SpecFileError);
    EXPECT_THROW(DelayRelation::parse_text("warp(2)"), SpecFileError);
    EXPECT_THROW(DelayRelation::parse_text("constant(-1)"), ParameterDomainError);
}

TEST(DelayProperty, ClosedFormMatchesIteratedMesh) {
    std::mt19937 rng(99);
    std::uniform_real_distribution<double> uq(0.3, 3.0), ut(0.0, 2.0);
    for (int t = 0; t < 50; ++t) {
        const double q = uq(rng), tau = ut(rng);
        if (q == 1 && tau == 0) continue;
        const auto rel = DelayRelation::affine(q, tau);
        // Start inside the region where a forward point exists.
        const double x0 = q > 1 ? -1.0 : 0.5;
        if (q > 1 && !(x0 < tau / (q - 1))) continue;
        const Mesh mesh = build_mesh(rel, x0, 30);
        EXPECT_LE(mesh_defect(mesh), 1e-12);
        for (int n = 0; n <= 30; ++n) {
            const double want = mesh.points[static_cast<std::size_t>(n) + 1];
            EXPECT_NEAR(closed_form_point({q, tau}, x0, mesh.points[0], n), want, 1e-12 * (1 + std::fabs(want)));
        }
    }
}

TEST(DelayProperty, GeometricMeshLimits) {
    // q > 1: increasing and bounded by tau/(q-1).
    const Mesh up = build_mesh(DelayRelation::affine(1.5, 0.4), 0, 60);
    for (std::size_t i = 1; i < up.points.size(); ++i) {
        EXPECT_GT(up.points[i], up.points[i - 1]);
        EXPECT_LT(up.points[i], 0.4 / 0.5);
    }
    // 0 < q < 1 grows without bound.
    EXPECT_GT(closed_form_point({0.5, 1}, 0, -1, 200), 1e6);
    const Mesh grow = build_mesh(DelayRelation::affine(0.5, 1), 0, 200);
    EXPECT_GT(grow.end(), 1e6);
}

TEST(DelayProperty, MoebiusIsAngleShift) {
    for (double C : {0.2, 0.5, -0.3}) {
        const auto rel = DelayRelation::moebius(C);
        double x = C > 0 ? -0.5 : 5.0;
        for (int n = 0; n < 3; ++n) {
            double next = 0;
            try {
                next = rel.advance(x);
            } catch (const NoForwardPoint&) {
                break;
            }
            // Both points on the same side of the pole, so the angle identity holds without wrap.
            if (1 + C * next > 0 && 1 + C * x > 0) {
                EXPECT_NEAR(std::atan(next), std::atan(x) + std::atan(C), 1e-12);
            }
            x = next;
        }
    }
}
