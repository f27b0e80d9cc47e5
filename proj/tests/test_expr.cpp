#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <random>

#include "lindods/expr.hpp"

using namespace lindods;

namespace {

const std::vector<std::string> kX{"x"};

Expr px(const char* s) { return parse(s, kX); }

} // namespace

TEST(ExprParse, FunctionOfProduct) {
    const Expr e = px("exp(2*x)");
    ASSERT_EQ(e.kind(), Expr::Kind::Unary);
    EXPECT_EQ(e.node().uop, UnaryOp::Exp);
    const Expr arg = e.lhs();
    ASSERT_EQ(arg.kind(), Expr::Kind::Binary);
    EXPECT_EQ(arg.node().bop, BinaryOp::Mul);
    EXPECT_TRUE(arg.lhs().is_literal(2));
    EXPECT_EQ(arg.rhs().node().name, "x");
}

TEST(ExprParse, PowerBindsBeforeDivision) {
    const Expr e = px("(x-1)^2/(1+x^2)");
    ASSERT_EQ(e.node().bop, BinaryOp::Div);
    EXPECT_EQ(e.lhs().node().bop, BinaryOp::Pow);
    EXPECT_EQ(e.lhs().lhs().node().bop, BinaryOp::Sub);
    EXPECT_EQ(e.rhs().node().bop, BinaryOp::Add);
}

TEST(ExprParse, UnaryMinusAndPower) {
    // -x^2 is -(x^2); 2^-x is 2^(-x); ^ is right-associative.
    EXPECT_DOUBLE_EQ(px("-x^2").eval({{"x", 3}}), -9);
    EXPECT_DOUBLE_EQ(px("2^-x").eval({{"x", 1}}), 0.5);
    EXPECT_DOUBLE_EQ(px("2^3^2").eval(), 512);
    EXPECT_DOUBLE_EQ(px("1-2-3").eval(), -4);
    EXPECT_DOUBLE_EQ(px("8/4/2").eval(), 1);
    EXPECT_DOUBLE_EQ(px("1.5e2 + 2E-1").eval(), 150.2);
}

TEST(ExprParse, MalformedReportsPosition) {
    try {
        px("2*+x");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.position(), 2u);
    }
}

TEST(ExprParse, Errors) {
    EXPECT_THROW(px("(x+1"), ParseError);
    EXPECT_THROW(px("x+1)"), ParseError);
    EXPECT_THROW(px("y+1"), ParseError);
    EXPECT_THROW(px(""), ParseError);
    EXPECT_THROW(px("sin x"), ParseError);
    EXPECT_THROW(px("x 2"), ParseError);
    for (const char* bad : {"(x+1", "x+1)", "y", "2*+x", "exp(", "3..4"}) {
        try {
            px(bad);
            FAIL() << bad;
        } catch (const ParseError& e) {
            EXPECT_LT(e.position(), std::string(bad).size()) << bad;
        }
    }
}

TEST(ExprParse, ConstantsAndVariableSets) {
    EXPECT_DOUBLE_EQ(px("pi").eval(), M_PI);
    EXPECT_DOUBLE_EQ(px("e").eval(), M_E);
    const Expr e = parse("x*y - ym", {"x", "y", "ym"});
    EXPECT_EQ(e.variables(), (std::set<std::string>{"x", "y", "ym"}));
    EXPECT_DOUBLE_EQ(e.eval({{"x", 2}, {"y", 3}, {"ym", 1}}), 5);
}

TEST(ExprEval, Arithmetic) {
    EXPECT_DOUBLE_EQ(px("x^2+1").eval({{"x", 2}}), 5);
    // e^{pi/8} = 1.48097267...
    EXPECT_NEAR(px("exp(0.5*atan(1))").eval(), 1.4809727, 1e-7);
    EXPECT_NEAR(px("exp(0.5*atan(1))").eval(), std::exp(M_PI / 8), 1e-15);
}

TEST(ExprEval, DomainErrors) {
    EXPECT_THROW(px("ln(x)").eval({{"x", -1}}), DomainError);
    EXPECT_THROW(px("ln(x)").eval({{"x", 0}}), DomainError);
    EXPECT_THROW(px("sqrt(x)").eval({{"x", -1}}), DomainError);
    EXPECT_THROW(px("1/x").eval({{"x", 0}}), DomainError);
    EXPECT_THROW(px("x^(-1)").eval({{"x", 0}}), DomainError);
    EXPECT_THROW(px("x^0.5").eval({{"x", -2}}), DomainError);
    EXPECT_DOUBLE_EQ(px("x^3").eval({{"x", -2}}), -8);
    EXPECT_THROW(px("x+1").eval(), UnboundVariable);
}

TEST(ExprDiff, Rules) {
    EXPECT_EQ(differentiate(px("x^2"), "x").to_string(), "2*x");
    EXPECT_EQ(differentiate(px("atan(x)"), "x").to_string(), "1/(1+x^2)");
    EXPECT_TRUE(differentiate(px("sign(x)"), "x").is_literal(0));
    EXPECT_DOUBLE_EQ(differentiate(px("abs(x)"), "x").eval({{"x", -3}}), -1);

    const Expr d = differentiate(px("exp(0.7*x)"), "x");
    const double h = 1e-5, x0 = 0.3;
    const Expr f = px("exp(0.7*x)");
    const double fd = (f.eval({{"x", x0 + h}}) - f.eval({{"x", x0 - h}})) / (2 * h);
    EXPECT_NEAR(d.eval({{"x", x0}}), fd, 1e-8);
}

TEST(ExprDiff, PartialsInOtherVariables) {
    const Expr f = parse("x*y^2 + sin(ym)", {"x", "y", "ym"});
    const Bindings at{{"x", 2}, {"y", 3}, {"ym", 0.5}};
    EXPECT_DOUBLE_EQ(differentiate(f, "y").eval(at), 12);
    EXPECT_DOUBLE_EQ(differentiate(f, "x").eval(at), 9);
    EXPECT_DOUBLE_EQ(differentiate(f, "ym").eval(at), std::cos(0.5));
}

TEST(ExprPrint, Substitute) {
    const Expr e = parse("A*exp(a*x)", {"x", "A", "a"}).substitute({{"A", 2}, {"a", -0.5}});
    EXPECT_EQ(e.variables(), std::set<std::string>{"x"});
    EXPECT_DOUBLE_EQ(e.eval({{"x", 2}}), 2 * std::exp(-1.0));
    EXPECT_TRUE(parse(e.to_string(), kX).structurally_equal(e));
}

// ---------------------------------------------------------------------------
// Randomized properties: derivative vs central difference, print/parse stability.

namespace {

class RandomExpr {
public:
    explicit RandomExpr(unsigned seed) : rng_(seed) {}

    Expr make(int depth) {
        std::uniform_int_distribution<int> pick(0, depth <= 0 ? 1 : 16);
        const int k = pick(rng_);
        switch (k) {
        case 0: return Expr::variable("x");
        case 1: return Expr::number(std::uniform_int_distribution<int>(1, 9)(rng_) / 4.0);
        case 2: return Expr::binary(BinaryOp::Add, make(depth - 1), make(depth - 1));
        case 3: return Expr::binary(BinaryOp::Sub, make(depth - 1), make(depth - 1));
        case 4:
        case 5: return Expr::binary(BinaryOp::Mul, make(depth - 1), make(depth - 1));
        case 6: return Expr::binary(BinaryOp::Div, make(depth - 1), make(depth - 1));
        case 7:
            return Expr::binary(BinaryOp::Pow, make(depth - 1),
                                Expr::number(std::uniform_int_distribution<int>(0, 3)(rng_)));
        case 8: return Expr::unary(UnaryOp::Neg, make(depth - 1));
        case 9: return Expr::unary(UnaryOp::Exp, scaled(make(depth - 1)));
        case 10: return Expr::unary(UnaryOp::Ln, make(depth - 1));
        case 11: return Expr::unary(UnaryOp::Sin, make(depth - 1));
        case 12: return Expr::unary(UnaryOp::Cos, make(depth - 1));
        case 13: return Expr::unary(UnaryOp::Atan, make(depth - 1));
        case 14: return Expr::unary(UnaryOp::Sqrt, make(depth - 1));
        case 15: return Expr::unary(UnaryOp::Abs, make(depth - 1));
        default: return Expr::unary(UnaryOp::Tan, scaled(make(depth - 1)));
        }
    }

    double point() { return std::uniform_real_distribution<double>(-2.0, 2.0)(rng_); }

private:
    // Keeps nested exponentials and tangents in a sane range.
    Expr scaled(const Expr& e) { return Expr::binary(BinaryOp::Mul, Expr::number(0.25), e); }

    std::mt19937 rng_;
};

// True when x is within `margin` of a kink, pole or domain boundary of any node.
bool near_singularity(const Expr& e, double x, double margin) {
    const auto& n = e.node();
    bool bad = false;
    if (n.lhs) bad = bad || near_singularity(e.lhs(), x, margin);
    if (n.rhs) bad = bad || near_singularity(e.rhs(), x, margin);
    if (bad) return true;
    const Bindings b{{"x", x}};
    auto arg = [&](const Expr& a) { return a.eval(b); };
    if (n.kind == Expr::Kind::Unary) {
        const double a = arg(e.lhs());
        switch (n.uop) {
        case UnaryOp::Ln:
        case UnaryOp::Sqrt:
        case UnaryOp::Abs:
        case UnaryOp::Sign: return std::fabs(a) < margin;
        case UnaryOp::Tan: return std::fabs(std::cos(a)) < margin;
        default: return false;
        }
    }
    if (n.kind == Expr::Kind::Binary) {
        if (n.bop == BinaryOp::Div) return std::fabs(arg(e.rhs())) < margin;
        if (n.bop == BinaryOp::Pow) return std::fabs(arg(e.lhs())) < margin;
    }
    return false;
}

} // namespace

TEST(ExprProperty, DerivativeMatchesCentralDifference) {
    RandomExpr gen(20240611u);
    int checked = 0;
    for (int t = 0; t < 100; ++t) {
        const Expr e = gen.make(6);
        const Expr d = differentiate(e, "x");
        for (int p = 0; p < 10; ++p) {
            const double x = gen.point();
            const double h = 1e-5;
            try {
                if (near_singularity(e, x, 1e-3) || near_singularity(e, x - h, 1e-3) ||
                    near_singularity(e, x + h, 1e-3))
                    continue;
                const double value = d.eval({{"x", x}});
                auto central = [&](double step) {
                    return (e.eval({{"x", x + step}}) - e.eval({{"x", x - step}})) / (2 * step);
                };
                const double fd = central(h);
                if (!std::isfinite(value) || std::fabs(value) > 1e6) continue;
                // Skip points where the difference quotient itself has not settled.
                if (std::fabs(fd - central(2 * h)) > 1e-7 * (1 + std::fabs(fd))) continue;
                EXPECT_LE(std::fabs(value - fd), 1e-6 * (1 + std::fabs(value)))
                    << e.to_string() << " at x=" << x << " d=" << d.to_string();
                ++checked;
            } catch (const DomainError&) {
                continue;
            }
        }
    }
    EXPECT_GT(checked, 200);
}

TEST(ExprProperty, PrintParseIsStable) {
    RandomExpr gen(7u);
    for (int t = 0; t < 100; ++t) {
        const Expr e = gen.make(6);
        const std::string once = e.to_string();
        const Expr reparsed = parse(once, kX);
        EXPECT_TRUE(reparsed.structurally_equal(e)) << once;
        EXPECT_EQ(reparsed.to_string(), once);
    }
}
