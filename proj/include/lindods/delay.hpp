#pragma once
// Delay relations x_- = g(x) and the interval sequences the method of steps marches over.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <cstdio>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "lindods/errors.hpp"
#include "lindods/expr.hpp"

namespace lindods {

class DelayRelation {
public:
    struct Constant { double tau; };
    struct Affine { double q, tau; };
    struct QScale { double q; };
    struct Moebius { double C; };
    struct General { Expr g; };
    using Form = std::variant<Constant, Affine, QScale, Moebius, General>;

    static DelayRelation constant(double tau) {
        if (!(tau > 0)) throw ParameterDomainError("constant delay needs tau > 0");
        return DelayRelation(Constant{tau});
    }
    static DelayRelation affine(double q, double tau) {
        if (!(q > 0)) throw ParameterDomainError("affine delay needs q > 0");
        if (tau * tau + (q - 1) * (q - 1) == 0) throw ParameterDomainError("affine delay with q = 1, tau = 0 is the identity");
        return DelayRelation(Affine{q, tau});
    }
    static DelayRelation qscale(double q) {
        if (!(q > 0 && q < 1)) throw ParameterDomainError("q-delay needs 0 < q < 1");
        return DelayRelation(QScale{q});
    }
    static DelayRelation moebius(double C) {
        if (C == 0 || !std::isfinite(C)) throw ParameterDomainError("Moebius delay needs C != 0");
        return DelayRelation(Moebius{C});
    }
    /// `g` must be strictly increasing; this is checked lazily by advance().
    static DelayRelation general(const Expr& g) {
        for (const auto& v : g.variables())
            if (v != "x") throw ParameterDomainError("general delay may only use x, found '" + v + "'");
        return DelayRelation(General{g});
    }
    static DelayRelation general(std::string_view text) { return general(parse(text, {"x"})); }

    const Form& form() const { return form_; }

    /// g(x), enforcing the delay condition g(x) < x.
    double delayed_point(double x) const {
        double g = 0.0;
        if (const auto* c = std::get_if<Constant>(&form_)) g = x - c->tau;
        else if (const auto* a = std::get_if<Affine>(&form_)) g = a->q * x - a->tau;
        else if (const auto* s = std::get_if<QScale>(&form_)) g = s->q * x;
        else if (const auto* m = std::get_if<Moebius>(&form_)) {
            const double den = 1.0 + m->C * x;
            if (den == 0.0 || !(m->C / den > 0))
                throw DomainError("Moebius delay outside its validity region C/(1+Cx) > 0 at x = " + num(x));
            g = (x - m->C) / den;
        } else {
            g = std::get<General>(form_).g.eval({{"x", x}});
        }
        if (!(g < x)) throw DomainError("delay condition g(x) < x violated at x = " + num(x));
        return g;
    }

    /// The point x+ with g(x+) = x.
    double advance(double x) const {
        double next = 0.0;
        if (const auto* c = std::get_if<Constant>(&form_)) next = x + c->tau;
        else if (const auto* a = std::get_if<Affine>(&form_)) next = (x + a->tau) / a->q;
        else if (const auto* s = std::get_if<QScale>(&form_)) next = x / s->q;
        else if (const auto* m = std::get_if<Moebius>(&form_)) {
            const double den = 1.0 - m->C * x;
            if (std::fabs(den) <= 1e-12) throw NoForwardPoint("Moebius inverse has a pole at x = " + num(x));
            next = (x + m->C) / den;
            const double vden = 1.0 + m->C * next;
            if (vden == 0.0 || !(m->C / vden > 0))
                throw NoForwardPoint("Moebius forward point leaves the validity region from x = " + num(x));
        } else {
            next = invert_general(std::get<General>(form_).g, x);
        }
        if (!(next > x) || !std::isfinite(next))
            throw NoForwardPoint("no forward point beyond x = " + num(x));
        return next;
    }

    /// g as an expression in x.
    Expr to_expr() const {
        if (const auto* c = std::get_if<Constant>(&form_))
            return parse("x - tau", {"x", "tau"}).substitute({{"tau", c->tau}});
        if (const auto* a = std::get_if<Affine>(&form_))
            return parse("q*x - tau", {"x", "q", "tau"}).substitute({{"q", a->q}, {"tau", a->tau}});
        if (const auto* s = std::get_if<QScale>(&form_))
            return parse("q*x", {"x", "q"}).substitute({{"q", s->q}});
        if (const auto* m = std::get_if<Moebius>(&form_))
            return parse("(x - C)/(1 + C*x)", {"x", "C"}).substitute({{"C", m->C}});
        return std::get<General>(form_).g;
    }

    /// Text form used by spec files and the CLI.
    std::string to_string() const {
        if (const auto* c = std::get_if<Constant>(&form_)) return "constant(" + num(c->tau) + ")";
        if (const auto* a = std::get_if<Affine>(&form_)) return "affine(" + num(a->q) + ", " + num(a->tau) + ")";
        if (const auto* s = std::get_if<QScale>(&form_)) return "qscale(" + num(s->q) + ")";
        if (const auto* m = std::get_if<Moebius>(&form_)) return "moebius(" + num(m->C) + ")";
        return "general(\"" + std::get<General>(form_).g.to_string() + "\")";
    }

    /// Parse `constant(tau) | affine(q, tau) | qscale(q) | moebius(C) | general("<expr>")`.
    static DelayRelation parse_text(std::string_view text) {
        auto trim = [](std::string_view s) {
            while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
            while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
            return s;
        };
        text = trim(text);
        const auto open = text.find('(');
        if (open == std::string_view::npos || text.back() != ')')
            throw SpecFileError("malformed delay '" + std::string(text) + "'");
        const std::string_view kind = trim(text.substr(0, open));
        std::string_view inner = trim(text.substr(open + 1, text.size() - open - 2));
        if (kind == "general") {
            if (inner.size() < 2 || inner.front() != '"' || inner.back() != '"')
                throw SpecFileError("general delay expects a quoted expression");
            return general(inner.substr(1, inner.size() - 2));
        }
        std::vector<double> args;
        while (!inner.empty()) {
            const auto comma = inner.find(',');
            const std::string token(trim(inner.substr(0, comma)));
            char* end = nullptr;
            const double v = std::strtod(token.c_str(), &end);
            if (token.empty() || *end != '\0') throw SpecFileError("bad number '" + token + "' in delay");
            args.push_back(v);
            if (comma == std::string_view::npos) break;
            inner = inner.substr(comma + 1);
        }
        auto want = [&](std::size_t n) {
            if (args.size() != n)
                throw SpecFileError(std::string(kind) + " delay expects " + std::to_string(n) + " argument(s)");
        };
        if (kind == "constant") { want(1); return constant(args[0]); }
        if (kind == "affine") { want(2); return affine(args[0], args[1]); }
        if (kind == "qscale") { want(1); return qscale(args[0]); }
        if (kind == "moebius") { want(1); return moebius(args[0]); }
        throw SpecFileError("unknown delay kind '" + std::string(kind) + "'");
    }

private:
    explicit DelayRelation(Form f) : form_(std::move(f)) {}

    static std::string num(double v) { return detail::format_number(v); }

    // Bracket [x, x + w], doubling w up to 60 times, then bisect g(t) - x.
    static double invert_general(const Expr& g, double x) {
        auto G = [&](double t) {
            try {
                return g.eval({{"x", t}}) - x;
            } catch (const DomainError& e) {
                throw NoForwardPoint(std::string("g undefined while inverting: ") + e.what());
            }
        };
        double lo = x, hi = x + 1.0;
        double glo = G(lo);
        if (!(glo < 0)) throw NoForwardPoint("delay condition fails at x = " + num(x));
        double ghi = G(hi);
        double width = 1.0;
        int doublings = 0;
        while (ghi < 0) {
            if (++doublings > 60) throw NoForwardPoint("no bracket for the forward point of x = " + num(x));
            const double prev = ghi;
            lo = hi;
            glo = ghi;
            width *= 2.0;
            hi = x + width;
            ghi = G(hi);
            if (ghi < prev) throw NotMonotone("g decreases on [" + num(lo) + ", " + num(hi) + "]");
        }
        if (ghi == 0) return hi;
        for (int i = 0; i < 200; ++i) {
            const double mid = 0.5 * (lo + hi);
            if (mid <= lo || mid >= hi) break;
            const double gm = G(mid);
            if (gm < glo || gm > ghi) throw NotMonotone("g is not increasing near x = " + num(mid));
            if (gm == 0) return mid;
            if (gm < 0) {
                lo = mid;
                glo = gm;
            } else {
                hi = mid;
                ghi = gm;
            }
        }
        return std::fabs(glo) < std::fabs(ghi) ? lo : hi;
    }

    Form form_;
};

/// Ordered points x_{-1} < x_0 < ... < x_N with g(x_{n+1}) = x_n.
struct Mesh {
    std::vector<double> points;
    DelayRelation relation;

    std::size_t intervals() const { return points.size() - 2; }  // forward intervals N
    double start() const { return points.front(); }
    double end() const { return points.back(); }
};

inline double delayed_point(const DelayRelation& rel, double x) { return rel.delayed_point(x); }
inline double advance(const DelayRelation& rel, double x) { return rel.advance(x); }

/// [g(x0), x0, x1, ..., xN]. A failing advance aborts the whole mesh.
inline Mesh build_mesh(const DelayRelation& rel, double x0, int N) {
    if (N < 1) throw ParameterDomainError("mesh needs at least one forward interval");
    Mesh mesh{{rel.delayed_point(x0), x0}, rel};
    mesh.points.reserve(static_cast<std::size_t>(N) + 2);
    for (int n = 1; n <= N; ++n) {
        try {
            mesh.points.push_back(rel.advance(mesh.points.back()));
        } catch (const NoForwardPoint& e) {
            throw NoForwardPoint(std::string(e.what()) + " (mesh stopped after " + std::to_string(n - 1) + " of " +
                                 std::to_string(N) + " intervals)");
        }
    }
    return mesh;
}

/// x_n for the affine relation x_- = q x - tau, from x_0 alone.
inline double closed_form_point(const DelayRelation::Affine& rel, double x0, double xm1, int n) {
    if (std::fabs(xm1 - (rel.q * x0 - rel.tau)) > 1e-12 * (1.0 + std::fabs(x0)))
        throw ParameterDomainError("x_{-1} is not q*x0 - tau");
    if (rel.q == 1.0) return x0 + n * rel.tau;
    const double inv = std::pow(rel.q, -n);
    return x0 * inv + rel.tau / (1.0 - rel.q) * (inv - 1.0);
}

/// max over consecutive pairs of |g(x_{n+1}) - x_n| / (1 + |x_n|); also checks ordering.
inline double mesh_defect(const Mesh& mesh) {
    double worst = 0.0;
    for (std::size_t i = 0; i + 1 < mesh.points.size(); ++i) {
        const double a = mesh.points[i], b = mesh.points[i + 1];
        if (!(b > a)) return INFINITY;
        worst = std::max(worst, std::fabs(mesh.relation.delayed_point(b) - a) / (1.0 + std::fabs(a)));
    }
    return worst;
}

} // namespace lindods
