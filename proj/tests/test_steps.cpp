#include <gtest/gtest.h>

#include <cmath>

#include "lindods/catalog.hpp"
#include "lindods/steps.hpp"
#include "support.hpp"

using namespace lindods;
using lindods::testing::label;

namespace {

Dods quotient_with_unit_delay() { return catalog({"A4_12", {{"C", 1}}, {}}).dods; }

PiecewiseSolution solve_quadratic_start(Scheme scheme, int steps = 64, int N = 3) {
    const Dods d = quotient_with_unit_delay();
    SolverConfig cfg;
    cfg.scheme = scheme;
    cfg.step_count = steps;
    return solve(d, InitialCondition::make(parse("(x+1)^2", {"x"}), d.delay(), 0.0), N, cfg);
}

double corrected_continuation(double x) { return -std::exp(x) + (x + 1) * (x + 1) + 1; }

// Linear catalog cases with an x0 whose mesh stays inside the domain for 3 intervals.
struct StepCase {
    CatalogCase c;
    double x0;
};

std::vector<StepCase> step_matrix() {
    return {{{"A2_1", {}, {}}, 0.0},
            {{"A2_3", {}, {}}, 0.0},
            {{"A3_1", {}, {}}, 0.0},
            {{"A3_3", {{"a", -1}}, {}}, 1.0},
            {{"A3_3", {{"a", 0.5}}, {}}, 1.0},
            {{"A3_3", {{"a", 1}}, {}}, 0.0},
            {{"A3_5", {}, {}}, 0.0},
            {{"A3_7", {{"b", 0}, {"C2", 0.25}}, {}}, 0.0},
            {{"A3_7", {{"b", 1}, {"C2", 0.25}}, {}}, 0.0},
            {{"A3_13", {}, {}}, 0.0},
            {{"A3_14", {{"C2", 0.5}}, {}}, 1.0},
            {{"A3_15", {}, {}}, 0.0},
            {{"A4_5", {}, {}}, 0.0},
            {{"A4_12", {}, {}}, 0.0},
            {{"A4_14", {{"C", 0.25}}, {}}, 0.0},
            {{"A4_21", {{"C", 0.5}}, {}}, 1.0}};
}

bool homogeneous(const Dods& d) { return d.linear_rhs().gamma.is_literal(0); }

} // namespace

TEST(Steps, ExactMatchesDerivedContinuation) {
    const auto s = solve_quadratic_start(Scheme::ExactLinear);
    double worst = 0.0;
    for (int i = 0; i <= 200; ++i) {
        const double x = i / 200.0;
        worst = std::max(worst, std::fabs(s(x) - corrected_continuation(x)));
    }
    EXPECT_LE(worst, 1e-8);
    // y(1) = 5 - e
    EXPECT_NEAR(s(1.0), 2.2817181715409549, 1e-8);
    EXPECT_NEAR(s(1.0), 5 - M_E, 1e-8);
}

TEST(Steps, OneSidedDerivativesAtStart) {
    const auto s = solve_quadratic_start(Scheme::ExactLinear);
    const auto v = s.eval(0.0);
    EXPECT_NEAR(v.y, 1.0, 1e-14);
    EXPECT_NEAR(v.ydot_left, 2.0, 1e-14);
    EXPECT_NEAR(v.ydot_right, 1.0, 1e-14);
    const auto w = s.eval(0.37);
    EXPECT_DOUBLE_EQ(w.ydot_left, w.ydot_right);
    EXPECT_THROW(s.eval(s.end() + 1), OutOfRange);
    EXPECT_THROW(s.eval(-1.5), OutOfRange);
}

TEST(Steps, JumpsShrinkAlongTheMesh) {
    const auto s = solve_quadratic_start(Scheme::ExactLinear);
    EXPECT_NEAR(s.derivative_jump(0), -1.0, 1e-12);
    EXPECT_LT(std::fabs(s.derivative_jump(1)), std::fabs(s.derivative_jump(0)));
    EXPECT_THROW(s.derivative_jump(3), OutOfRange);
    EXPECT_THROW(s.derivative_jump(-1), OutOfRange);
}

TEST(Steps, ContinuityAcrossMeshPoints) {
    const auto s = solve_quadratic_start(Scheme::ExactLinear);
    const auto& segs = s.segments();
    for (std::size_t k = 0; k + 1 < segs.size(); ++k) {
        const double l = segs[k].nodes.back().y, r = segs[k + 1].nodes.front().y;
        EXPECT_LE(std::fabs(l - r), 1e-10 * (1 + std::fabs(l)));
    }
}

TEST(Steps, ConstantsStayConstant) {
    for (const auto& c : {CatalogCase{"A4_12", {}, {}}, CatalogCase{"A4_21", {}, {}}, CatalogCase{"A4_14", {{"C", 0.25}}, {}}}) {
        const Dods d = catalog(c).dods;
        const double x0 = c.id == "A4_21" ? 1.0 : 0.0;
        const auto s = solve(d, InitialCondition::make(parse("3", {"x"}), d.delay(), x0), 3);
        for (const auto& seg : s.segments())
            for (const auto& n : seg.nodes) EXPECT_NEAR(n.y, 3.0, 1e-12) << c.id;
    }
}

TEST(Steps, SmoothInvariantSolutionIsReproduced) {
    const Dods d = catalog({"A3_5", {}, {}}).dods;
    const Expr y = parse("e*exp(x)", {"x"});
    const auto s = solve(d, InitialCondition::make(y, d.delay(), 0.0), 3);
    double worst = 0.0;
    for (int i = 0; i <= 300; ++i) {
        const double x = 3.0 * i / 300;
        worst = std::max(worst, std::fabs(s(x) - y.eval({{"x", x}})) / y.eval({{"x", x}}));
    }
    EXPECT_LE(worst, 1e-8);
    EXPECT_LE(std::fabs(s.derivative_jump(0)), 1e-8);
}

TEST(Steps, GeneralRightHandSideNeedsRk4) {
    const Dods d = Dods::general(parse("ym - y", rhs_variables()), DelayRelation::constant(1));
    const auto init = InitialCondition::make(parse("1", {"x"}), d.delay(), 0.0);
    EXPECT_THROW(solve(d, init, 2), SchemeMismatch);
    SolverConfig cfg;
    cfg.scheme = Scheme::RK4;
    const auto s = solve(d, init, 2, cfg);
    EXPECT_NEAR(s(2.0), 1.0, 1e-12);
}

TEST(Steps, InconsistentInitialInterval) {
    const Dods d = quotient_with_unit_delay();
    InitialCondition bad{parse("1", {"x"}), -0.5, 0.0};
    EXPECT_THROW(solve(d, bad, 2), InvalidDods);
}

TEST(Steps, Rk4ConvergesAtFourthOrder) {
    const Dods d = quotient_with_unit_delay();
    const auto coarse = solve_quadratic_start(Scheme::RK4, 32);
    const auto fine = solve_quadratic_start(Scheme::RK4, 64);
    const double rc = residual_scan(coarse, d, 1, 2), rf = residual_scan(fine, d, 1, 2);
    EXPECT_GE(rc / rf, 8.0) << rc << " " << rf;
    double worst = 0.0;
    for (int i = 0; i <= 100; ++i) worst = std::max(worst, std::fabs(fine(i / 100.0) - corrected_continuation(i / 100.0)));
    EXPECT_LE(worst, 1e-5);
}

TEST(Steps, FastPathAgreesWithQuadrature) {
    std::vector<std::pair<Dods, double>> cases{{catalog({"A4_12", {}, {}}).dods, 0.0},
                                               {catalog({"A4_21", {{"C", 0.5}}, {}}).dods, 1.0}};
    const auto& v = coefficient_variables();
    cases.emplace_back(Dods::linear(parse("1/(x-xm)", v), parse("-1/(x-xm)", v), parse("0", v),
                                    DelayRelation::affine(0.5, 0.2), Interval{0.0, INFINITY}),
                       1.0);
    for (const auto& [d, x0] : cases) {
        ASSERT_TRUE(d.is_pure_quotient());
        const auto init = InitialCondition::make(parse("1+x+sin(x)", {"x"}), d.delay(), x0);
        SolverConfig fast, slow;
        slow.fast_path = false;
        const auto a = solve(d, init, 3, fast), b = solve(d, init, 3, slow);
        for (std::size_t k = 0; k < a.segments().size(); ++k)
            for (std::size_t i = 0; i < a.segments()[k].nodes.size(); ++i)
                EXPECT_NEAR(a.segments()[k].nodes[i].y, b.segments()[k].nodes[i].y, 1e-10);
    }
}

TEST(StepsProperty, ExactAgreesWithFineRk4) {
    const Expr phi = parse("1 + x + x^2", {"x"});
    for (const auto& [c, x0] : step_matrix()) {
        const Dods d = catalog(c).dods;
        const auto init = InitialCondition::make(phi, d.delay(), x0);
        SolverConfig rk;
        rk.scheme = Scheme::RK4;
        rk.step_count = 1024;
        const auto a = solve(d, init, 3), b = solve(d, init, 3, rk);
        double worst = 0.0;
        for (int i = 0; i <= 300; ++i) {
            const double x = a.start() + (a.end() - a.start()) * i / 300;
            worst = std::max(worst, std::fabs(a(x) - b(x)) / (1 + std::fabs(a(x))));
        }
        EXPECT_LE(worst, 1e-6) << label(c);
    }
}

TEST(StepsProperty, ResidualScanAcrossMatrix) {
    const Expr phi = parse("1 + x + x^2", {"x"});
    for (const auto& [c, x0] : step_matrix()) {
        const Dods d = catalog(c).dods;
        const auto init = InitialCondition::make(phi, d.delay(), x0);
        // The midpoint residual measures Hermite interpolation error, O(h^4).
        SolverConfig exact, rk;
        exact.step_count = 512;
        rk.scheme = Scheme::RK4;
        const auto a = solve(d, init, 3, exact), b = solve(d, init, 3, rk);
        EXPECT_LE(residual_scan(a, d), 1e-9) << label(c);
        EXPECT_LE(residual_scan(b, d), 1e-5) << label(c);
    }
}

TEST(StepsProperty, Superposition) {
    const Expr p1 = parse("1 + x + x^2", {"x"}), p2 = parse("sin(3*x)", {"x"});
    const Expr mix = parse("2*(1 + x + x^2) - 0.5*sin(3*x)", {"x"});
    int checked = 0;
    for (const auto& [c, x0] : step_matrix()) {
        const Dods d = catalog(c).dods;
        if (!homogeneous(d)) continue;
        ++checked;
        const auto s1 = solve(d, InitialCondition::make(p1, d.delay(), x0), 3);
        const auto s2 = solve(d, InitialCondition::make(p2, d.delay(), x0), 3);
        const auto sm = solve(d, InitialCondition::make(mix, d.delay(), x0), 3);
        for (int i = 0; i <= 200; ++i) {
            const double x = sm.start() + (sm.end() - sm.start()) * i / 200;
            EXPECT_NEAR(sm(x), 2 * s1(x) - 0.5 * s2(x), 1e-9) << label(c) << " x=" << x;
        }
    }
    EXPECT_GE(checked, 6);
}

TEST(ResidualScan, PrintedContinuationFails) {
    const Dods d = quotient_with_unit_delay();
    const Mesh mesh = build_mesh(d.delay(), 0.0, 1);
    const auto phi = sample_expr(parse("(x+1)^2", {"x"}), mesh);
    const auto printed = sample_expr(parse("-4*exp(x) + (x+2)^2 + 1", {"x"}), mesh);
    const auto derived = sample_expr(parse("-exp(x) + (x+1)^2 + 1", {"x"}), mesh);
    auto splice = [&](const PiecewiseSolution& tail) {
        return PiecewiseSolution(mesh, {phi.segments()[0], tail.segments()[1]});
    };
    EXPECT_GE(residual_scan(splice(printed), d), 0.5);
    EXPECT_LE(residual_scan(splice(derived), d), 1e-8);

    // Exact residual of the closed forms: y'(x) - (y(x) - phi(x - 1)).
    auto exact = [](const char* text) {
        const Expr y = parse(text, {"x"}), dy = differentiate(y, "x");
        double worst = 0.0;
        for (int i = 1; i < 100; ++i) {
            const double x = i / 100.0;
            const double r = dy.eval({{"x", x}}) - (y.eval({{"x", x}}) - x * x);
            worst = std::max(worst, std::fabs(r));
        }
        return worst;
    };
    EXPECT_GE(exact("-4*exp(x) + (x+2)^2 + 1"), 0.5);
    EXPECT_LE(exact("-exp(x) + (x+1)^2 + 1"), 1e-10);
}

TEST(ResidualScan, ZeroSolution) {
    const Dods d = catalog({"A4_21", {}, {}}).dods;
    const auto s = solve(d, InitialCondition::make(parse("0", {"x"}), d.delay(), 1.0), 3);
    EXPECT_EQ(residual_scan(s, d), 0.0);
}
