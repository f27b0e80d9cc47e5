#pragma once
// Vector fields xi(x) d/dx + eta(x, y) d/dy acting on a DODS: prolongation,
// invariance checks, flows, and the exponential symmetries of y' = dy/dx, dx = C.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "lindods/dods.hpp"
#include "lindods/errors.hpp"
#include "lindods/expr.hpp"
#include "lindods/steps.hpp"

namespace lindods {

using SolutionPtr = std::shared_ptr<const PiecewiseSolution>;

struct VectorField {
    /// eta = p(x) y + r(x).
    struct Affine {
        Expr p;
        std::variant<Expr, SolutionPtr> r;
    };

    Expr xi;
    std::variant<Expr, Affine> eta;
    std::string label;

    static VectorField make(std::string_view xi, std::string_view eta, std::string label = "") {
        return {parse(xi, {"x"}), parse(eta, {"x", "y"}), std::move(label)};
    }
    static VectorField vertical(const Expr& r, std::string label = "") {
        return {Expr::number(0), Affine{Expr::number(0), r}, std::move(label)};
    }
    static VectorField vertical(SolutionPtr r, std::string label = "") {
        return {Expr::number(0), Affine{Expr::number(0), std::move(r)}, std::move(label)};
    }

    bool has_piecewise_part() const {
        const auto* a = std::get_if<Affine>(&eta);
        return a && std::holds_alternative<SolutionPtr>(a->r);
    }
    const PiecewiseSolution* piecewise_part() const {
        if (const auto* a = std::get_if<Affine>(&eta))
            if (const auto* s = std::get_if<SolutionPtr>(&a->r)) return s->get();
        return nullptr;
    }

    std::string to_string() const {
        std::string eta_text;
        if (const auto* e = std::get_if<Expr>(&eta)) eta_text = e->to_string();
        else {
            const auto& a = std::get<Affine>(eta);
            const std::string r = std::holds_alternative<Expr>(a.r) ? std::get<Expr>(a.r).to_string() : "r(x)";
            eta_text = a.p.is_literal(0) ? r : "(" + a.p.to_string() + ")*y + " + r;
        }
        return "(" + xi.to_string() + ")*Dx + (" + eta_text + ")*Dy";
    }
};

namespace detail {

// eta and its two partials at (x, y). Piecewise r uses the slope on the side `right`.
struct EtaJet {
    double value, dx, dy;
};

class FieldJet {
public:
    explicit FieldJet(const VectorField& v) : v_(v), dxi_(differentiate(v.xi, "x")) {
        if (const auto* e = std::get_if<Expr>(&v.eta)) {
            eta_x_ = differentiate(*e, "x");
            eta_y_ = differentiate(*e, "y");
        } else {
            const auto& a = std::get<VectorField::Affine>(v.eta);
            dp_ = differentiate(a.p, "x");
            if (const auto* r = std::get_if<Expr>(&a.r)) dr_ = differentiate(*r, "x");
        }
    }

    double xi(double x) const { return v_.xi.eval({{"x", x}}); }
    double xi_x(double x) const { return dxi_.eval({{"x", x}}); }

    EtaJet eta(double x, double y, bool right = true) const {
        const Bindings b{{"x", x}, {"y", y}};
        if (const auto* e = std::get_if<Expr>(&v_.eta)) return {e->eval(b), eta_x_.eval(b), eta_y_.eval(b)};
        const auto& a = std::get<VectorField::Affine>(v_.eta);
        const double p = a.p.eval(b), px = dp_.eval(b);
        double r = 0.0, rx = 0.0;
        if (const auto* re = std::get_if<Expr>(&a.r)) {
            r = re->eval(b);
            rx = dr_.eval(b);
        } else {
            const auto& s = *std::get<SolutionPtr>(a.r);
            if (!s.contains(x))
                throw MeshRangeError("piecewise field evaluated at x = " + format_number(x) + " outside its mesh");
            const auto val = s.eval(x);
            r = val.y;
            rx = right ? val.ydot_right : val.ydot_left;
        }
        return {p * y + r, px * y + rx, p};
    }

private:
    const VectorField& v_;
    Expr dxi_, eta_x_, eta_y_, dp_, dr_;
};

} // namespace detail

struct ManifoldPoint {
    double x, y, xm, ym, ydot;
};

struct ProlongedValue {
    double prF1, prF2;
    double scale1, scale2;  // largest magnitude among the summed terms
};

/// Applies the first prolongation of v to F1 = ydot - f and F2 = xm - g(x).
class Prolongation {
public:
    Prolongation(const VectorField& v, const Dods& d) : jet_(v), d_(d) {
        const Expr g = d.delay().to_expr();
        dg_ = differentiate(g, "x");
        if (d.is_linear()) {
            const auto& lin = d.linear_rhs();
            for (const Expr* c : {&lin.alpha, &lin.beta, &lin.gamma}) {
                cx_.push_back(differentiate(*c, "x"));
                cxm_.push_back(differentiate(*c, "xm"));
            }
        } else {
            const Expr& f = std::get<GeneralRhs>(d.rhs()).f;
            for (const char* var : {"x", "y", "xm", "ym"}) partials_.push_back(differentiate(f, var));
        }
    }

    ProlongedValue apply(const ManifoldPoint& p) const {
        double fx, fy, fxm, fym;
        if (d_.is_linear()) {
            const auto& lin = d_.linear_rhs();
            const Bindings b{{"x", p.x}, {"xm", p.xm}};
            fx = cx_[0].eval(b) * p.y + cx_[1].eval(b) * p.ym + cx_[2].eval(b);
            fxm = cxm_[0].eval(b) * p.y + cxm_[1].eval(b) * p.ym + cxm_[2].eval(b);
            fy = lin.alpha.eval(b);
            fym = lin.beta.eval(b);
        } else {
            const Bindings b{{"x", p.x}, {"y", p.y}, {"xm", p.xm}, {"ym", p.ym}};
            fx = partials_[0].eval(b);
            fy = partials_[1].eval(b);
            fxm = partials_[2].eval(b);
            fym = partials_[3].eval(b);
        }
        const double xi = jet_.xi(p.x), xim = jet_.xi(p.xm);
        const auto eta = jet_.eta(p.x, p.y);
        const auto etam = jet_.eta(p.xm, p.ym);
        const double zeta = eta.dx + eta.dy * p.ydot - p.ydot * jet_.xi_x(p.x);

        const std::array<double, 5> t1{zeta, -xi * fx, -eta.value * fy, -xim * fxm, -etam.value * fym};
        const std::array<double, 2> t2{xim, -xi * dg_.eval({{"x", p.x}})};
        ProlongedValue out{0, 0, 0, 0};
        for (double t : t1) out.prF1 += t, out.scale1 = std::max(out.scale1, std::fabs(t));
        for (double t : t2) out.prF2 += t, out.scale2 = std::max(out.scale2, std::fabs(t));
        return out;
    }

private:
    detail::FieldJet jet_;
    const Dods& d_;
    Expr dg_;
    std::vector<Expr> cx_, cxm_, partials_;
};

inline ProlongedValue prolong_apply(const VectorField& v, const Dods& d, const ManifoldPoint& p) {
    return Prolongation(v, d).apply(p);
}

enum class Invariance { Strong, Weak, NotInvariant };

inline const char* invariance_name(Invariance c) {
    switch (c) {
    case Invariance::Strong: return "strong";
    case Invariance::Weak: return "weak";
    default: return "not invariant";
    }
}

struct InvarianceReport {
    double max_on_manifold = 0.0;   // max |prF| / (1 + largest term)
    double max_off_manifold = 0.0;
    Invariance classification = Invariance::NotInvariant;
    int samples = 0;
};

/// Samples manifold points (x, y, ym random; xm = g(x); ydot = f) and perturbed points
/// off the manifold. Piecewise fields are sampled at cell midpoints of segments >= 1,
/// away from breaks, where the Hermite slope is accurate.
inline InvarianceReport check_invariance(const VectorField& v, const Dods& d, int samples = 200,
                                         double tol = 1e-7, std::uint64_t seed = 0x5eedULL) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const auto [lo, hi] = d.domain().sample_window();
    const Prolongation pr(v, d);
    const PiecewiseSolution* piece = v.piecewise_part();

    std::vector<double> cells;
    if (piece) {
        for (std::size_t k = 1; k < piece->segments().size(); ++k) {
            const auto& nodes = piece->segments()[k].nodes;
            for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
                const double mid = 0.5 * (nodes[i].x + nodes[i + 1].x);
                if (d.domain().contains(mid)) cells.push_back(mid);
            }
        }
        if (cells.empty()) throw MeshRangeError("piecewise field does not overlap the DODS domain");
    }

    auto relative = [](double value, double scale) { return std::fabs(value) / (1.0 + scale); };
    InvarianceReport rep;
    for (int i = 0; i < samples; ++i) {
        const double x = piece ? cells[static_cast<std::size_t>(unit(rng) * cells.size()) % cells.size()]
                               : lo + (hi - lo) * unit(rng);
        const double y = -2.0 + 4.0 * unit(rng), ym = -2.0 + 4.0 * unit(rng);
        const double xm = d.delay().delayed_point(x);
        const ManifoldPoint p{x, y, xm, ym, d.f(x, y, xm, ym)};
        const auto on = pr.apply(p);
        rep.max_on_manifold = std::max({rep.max_on_manifold, relative(on.prF1, on.scale1), relative(on.prF2, on.scale2)});

        // Off the manifold: shift (y, ym, ydot) by +-1 and xm by 0.1 (x - xm).
        auto sign = [&]() { return unit(rng) < 0.5 ? -1.0 : 1.0; };
        ManifoldPoint q = p;
        q.y += sign();
        q.ym += sign();
        q.ydot += sign();
        q.xm += 0.1 * (x - xm);  // toward x, so it stays where the field is defined
        const auto off = pr.apply(q);
        rep.max_off_manifold =
            std::max({rep.max_off_manifold, relative(off.prF1, off.scale1), relative(off.prF2, off.scale2)});
        ++rep.samples;
    }
    if (rep.max_on_manifold > tol) rep.classification = Invariance::NotInvariant;
    else if (rep.max_off_manifold <= tol) rep.classification = Invariance::Strong;
    else rep.classification = Invariance::Weak;
    return rep;
}

/// rho d/dy for a solver-produced solution rho of the homogeneous system.
inline VectorField vertical_from_solution(SolutionPtr s, const Dods& d, double tol = 1e-8) {
    const double res = residual_scan(*s, d.is_linear() ? d.homogeneous() : d);
    if (!(res <= tol))
        throw NotASolution("residual " + detail::format_number(res) + " exceeds " + detail::format_number(tol));
    return VectorField::vertical(std::move(s), "rho*Dy");
}

/// chi d/dy from the homogeneous solution with phi = x^2 over the domain's sample window.
inline VectorField chi_field(const Dods& d, int intervals = 4, int step_count = 256) {
    const Dods hom = d.homogeneous();
    const double x0 = d.domain().sample_window().first;
    const auto init = InitialCondition::make(parse("x^2", {"x"}), hom.delay(), x0);
    SolverConfig cfg;
    cfg.step_count = step_count;
    auto s = std::make_shared<const PiecewiseSolution>(solve(hom, init, intervals, cfg));
    VectorField v = vertical_from_solution(std::move(s), hom);
    v.label = "chi*Dy";
    return v;
}

namespace detail {

// Splits eta = p y + r with constant p; false when eta is not of that shape.
inline bool split_vertical(const VectorField& v, double& p, std::variant<Expr, SolutionPtr>& r) {
    if (const auto* a = std::get_if<VectorField::Affine>(&v.eta)) {
        if (a->p.depends_on("x")) return false;
        p = a->p.eval();
        r = a->r;
        return true;
    }
    const Expr& e = std::get<Expr>(v.eta);
    const Expr ey = differentiate(e, "y");
    if (ey.depends_on("x") || ey.depends_on("y")) return false;
    p = ey.eval();
    r = e.substitute({{"y", 0.0}});
    return true;
}

} // namespace detail

/// Transforms a solution by the one-parameter group of v at parameter eps.
inline PiecewiseSolution flow(const VectorField& v, double eps, const PiecewiseSolution& s, const Dods& d) {
    const bool vertical = !v.xi.depends_on("x") && v.xi.eval() == 0.0;
    double p = 0.0;
    std::variant<Expr, SolutionPtr> r = Expr::number(0);
    if (vertical && detail::split_vertical(v, p, r)) {
        const double grow = std::exp(eps * p);
        const double shift = p == 0.0 ? eps : (grow - 1.0) / p;
        const Expr* re = std::get_if<Expr>(&r);
        const Expr dre = re ? differentiate(*re, "x") : Expr::number(0);
        std::vector<Segment> segs = s.segments();
        for (auto& seg : segs) {
            for (std::size_t i = 0; i < seg.nodes.size(); ++i) {
                auto& n = seg.nodes[i];
                double rv, rx;
                if (re) {
                    rv = re->eval({{"x", n.x}});
                    rx = dre.eval({{"x", n.x}});
                } else {
                    const auto& rs = *std::get<SolutionPtr>(r);
                    if (!rs.contains(n.x)) throw MeshRangeError("flow field does not cover the solution's mesh");
                    const auto val = rs.eval(n.x);
                    rv = val.y;
                    rx = i + 1 == seg.nodes.size() ? val.ydot_left : val.ydot_right;
                }
                n.y = grow * n.y + shift * rv;
                n.dy = grow * n.dy + shift * rx;
            }
        }
        return PiecewiseSolution(s.mesh(), std::move(segs));
    }

    const bool constant_xi = !v.xi.depends_on("x");
    const bool eta_zero = std::holds_alternative<Expr>(v.eta) && std::get<Expr>(v.eta).is_literal(0);
    if (constant_xi && eta_zero) {
        if (!std::holds_alternative<DelayRelation::Constant>(d.delay().form()))
            throw UnsupportedFlow("translation flow needs a constant delay");
        const double delta = eps * v.xi.eval();
        Mesh mesh = s.mesh();
        for (double& x : mesh.points) x += delta;
        std::vector<Segment> segs = s.segments();
        for (auto& seg : segs) {
            seg.from += delta;
            seg.to += delta;
            for (auto& n : seg.nodes) n.x += delta;
        }
        return PiecewiseSolution(std::move(mesh), std::move(segs));
    }
    throw UnsupportedFlow("only vertical fields with constant p and constant translations have closed-form flows");
}

// ---------------------------------------------------------------------------
// Characteristic roots of e^z = 1 + z and lambda = -z/C.

struct CharacteristicRoot {
    double C;
    std::complex<double> z;
    std::complex<double> lambda;
    int k;

    double residual() const { return std::abs(std::exp(z) - 1.0 - z); }
    /// |lambda - (1 - e^{-lambda C})/C|
    double lambda_residual() const { return std::abs(lambda - (1.0 - std::exp(-lambda * C)) / C); }
};

namespace detail {

inline bool newton_root(std::complex<double>& z, double lo, double hi, int max_iter = 100) {
    for (int i = 0; i < max_iter; ++i) {
        const std::complex<double> ez = std::exp(z);
        const std::complex<double> F = ez - 1.0 - z;
        if (std::abs(F) <= 1e-13) return z.imag() > lo && z.imag() < hi;
        z -= F / (ez - 1.0);
        if (!(z.imag() > lo && z.imag() < hi) || !std::isfinite(z.real())) return false;
    }
    return std::abs(std::exp(z) - 1.0 - z) <= 1e-12;
}

// On branch k a root has Re z = ln|1 + z| and Im z - arg(1 + z) = 2 pi k.
inline std::complex<double> bisect_branch(int k, double lo, double hi) {
    auto real_part = [](double y) {
        double x = std::log(y);
        for (int i = 0; i < 200; ++i) x = 0.5 * std::log((1 + x) * (1 + x) + y * y);
        return x;
    };
    auto phase = [&](double y) { return y - std::atan2(y, 1 + real_part(y)) - 2 * M_PI * k; };
    double a = lo, b = hi;
    for (int i = 0; i < 40; ++i) {
        const double m = 0.5 * (a + b);
        if ((phase(a) < 0) == (phase(m) < 0)) a = m;
        else b = m;
    }
    const double y = 0.5 * (a + b);
    return {real_part(y), y};
}

} // namespace detail

/// Roots k = 0..k_max with Im z in (2 pi k - pi, 2 pi k + pi); conjugates are implied.
inline std::vector<CharacteristicRoot> char_roots(double C, int k_max) {
    if (!(C > 0)) throw ParameterDomainError("characteristic roots need C > 0");
    if (k_max < 0) throw ParameterDomainError("k_max must be non-negative");
    std::vector<CharacteristicRoot> out{{C, {0.0, 0.0}, {0.0, 0.0}, 0}};
    for (int k = 1; k <= k_max; ++k) {
        const double lo = 2 * M_PI * k - M_PI, hi = 2 * M_PI * k + M_PI;
        std::complex<double> z(std::log(2 * M_PI * k), 2 * M_PI * k);
        if (!detail::newton_root(z, lo, hi)) {
            z = detail::bisect_branch(k, lo + 1e-9, hi - 1e-9);
            if (!detail::newton_root(z, lo, hi))
                throw NonConvergence("branch " + std::to_string(k) + " stopped at z = " +
                                     detail::format_number(z.real()) + " + " + detail::format_number(z.imag()) + "i");
        }
        out.push_back({C, z, -z / C, k});
    }
    return out;
}

/// e^{ax} cos(bx) d/dy and e^{ax} sin(bx) d/dy for lambda = a + ib.
inline std::pair<VectorField, VectorField> exp_symmetry_fields(const CharacteristicRoot& root) {
    const double a = root.lambda.real(), b = root.lambda.imag();
    if (root.k == 0 || std::fabs(b) < 1e-14) throw DegenerateRoot("real root gives a vanishing sine field");
    const std::vector<std::pair<std::string, double>> ab{{"a", a}, {"b", b}};
    const Expr c = parse("exp(a*x)*cos(b*x)", {"x", "a", "b"}).substitute(ab);
    const Expr s = parse("exp(a*x)*sin(b*x)", {"x", "a", "b"}).substitute(ab);
    return {VectorField::vertical(c, "exp(ax)cos(bx)*Dy"), VectorField::vertical(s, "exp(ax)sin(bx)*Dy")};
}

/// Bernoulli numbers B_0..B_n with B_1 = -1/2.
inline std::vector<double> bernoulli_numbers(int n) {
    std::vector<double> B(static_cast<std::size_t>(n) + 1, 0.0);
    B[0] = 1.0;
    for (int m = 1; m <= n; ++m) {
        double sum = 0.0, binom = 1.0;  // binom = C(m+1, k)
        for (int k = 0; k < m; ++k) {
            sum += binom * B[static_cast<std::size_t>(k)];
            binom = binom * (m + 1 - k) / (k + 1);
        }
        B[static_cast<std::size_t>(m)] = -sum / (m + 1);
    }
    return B;
}

/// sum_{n=0}^{N} B_n (-z)^n / n!, the series of z / (1 - e^{-z}).
inline double bernoulli_gf(double z, int N) {
    if (std::fabs(z) >= 2 * M_PI)
        throw DivergenceWarning("|z| = " + detail::format_number(std::fabs(z)) + " is outside the radius 2*pi");
    if (N < 0 || N > 40) throw ParameterDomainError("bernoulli_gf takes 0 <= N <= 40");
    const auto B = bernoulli_numbers(N);
    double sum = 0.0, term = 1.0;  // (-z)^n / n!
    for (int n = 0; n <= N; ++n) {
        sum += B[static_cast<std::size_t>(n)] * term;
        term *= -z / (n + 1);
    }
    return sum;
}

} // namespace lindods
