#pragma once
// Method of steps: march a DODS over its mesh one interval at a time.

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "lindods/delay.hpp"
#include "lindods/dods.hpp"
#include "lindods/errors.hpp"
#include "lindods/expr.hpp"
#include "lindods/numerics.hpp"

namespace lindods {

enum class Scheme { ExactLinear, RK4 };

inline const char* scheme_name(Scheme s) { return s == Scheme::RK4 ? "rk4" : "exact"; }

struct SolverConfig {
    Scheme scheme = Scheme::ExactLinear;
    int step_count = 64;        // nodes per interval minus one
    double quad_tol = 1e-12;    // adaptive Simpson absolute tolerance
    bool fast_path = true;      // closed-form integrating factor for y' = dy/dx with affine delay
};

struct Node {
    double x, y, dy;
};

struct Segment {
    double from, to;
    std::vector<Node> nodes;
};

namespace detail {

// Cubic Hermite value and slope on one segment.
inline std::pair<double, double> hermite(const Segment& seg, double x) {
    const auto& nodes = seg.nodes;
    auto it = std::upper_bound(nodes.begin(), nodes.end(), x, [](double v, const Node& n) { return v < n.x; });
    std::size_t i = it == nodes.begin() ? 0 : static_cast<std::size_t>(it - nodes.begin()) - 1;
    if (i + 1 >= nodes.size()) i = nodes.size() - 2;
    const Node& a = nodes[i];
    const Node& b = nodes[i + 1];
    const double h = b.x - a.x;
    const double t = (x - a.x) / h;
    const double t2 = t * t, t3 = t2 * t;
    const double y = (2 * t3 - 3 * t2 + 1) * a.y + (t3 - 2 * t2 + t) * h * a.dy + (-2 * t3 + 3 * t2) * b.y +
                     (t3 - t2) * h * b.dy;
    const double dy = (6 * t2 - 6 * t) * (a.y - b.y) / h + (3 * t2 - 4 * t + 1) * a.dy + (3 * t2 - 2 * t) * b.dy;
    return {y, dy};
}

// Index k of the segment [points[k], points[k+1]] holding x; ties go right.
inline std::size_t segment_index(const std::vector<double>& points, double x) {
    auto it = std::upper_bound(points.begin(), points.end(), x);
    std::size_t k = it == points.begin() ? 0 : static_cast<std::size_t>(it - points.begin()) - 1;
    return std::min(k, points.size() - 2);
}

inline std::vector<double> uniform_grid(double a, double b, int cells) {
    std::vector<double> xs(static_cast<std::size_t>(cells) + 1);
    for (int j = 0; j <= cells; ++j) xs[static_cast<std::size_t>(j)] = a + (b - a) * j / cells;
    xs.back() = b;
    return xs;
}

} // namespace detail

class PiecewiseSolution {
public:
    struct Value {
        double y, ydot_left, ydot_right;
    };

    PiecewiseSolution(Mesh mesh, std::vector<Segment> segments) : mesh_(std::move(mesh)), segments_(std::move(segments)) {
        if (segments_.size() + 1 != mesh_.points.size())
            throw InvalidDods("solution needs one segment per mesh interval");
        for (std::size_t k = 0; k < segments_.size(); ++k) {
            const auto& s = segments_[k];
            if (s.nodes.size() < 2) throw InvalidDods("segment with fewer than two nodes");
            if (s.from != mesh_.points[k] || s.to != mesh_.points[k + 1])
                throw InvalidDods("segment bounds disagree with the mesh");
        }
    }

    const Mesh& mesh() const { return mesh_; }
    const std::vector<Segment>& segments() const { return segments_; }
    double start() const { return mesh_.start(); }
    double end() const { return mesh_.end(); }

    bool contains(double x) const { return x >= start() && x <= end(); }

    Value eval(double x) const {
        if (!contains(x))
            throw OutOfRange("x = " + detail::format_number(x) + " outside [" + detail::format_number(start()) + ", " +
                             detail::format_number(end()) + "]");
        const std::size_t k = detail::segment_index(mesh_.points, x);
        const auto [y, dy] = detail::hermite(segments_[k], x);
        if (x == mesh_.points[k] && k > 0) {
            const Node& last = segments_[k - 1].nodes.back();
            return {y, last.dy, dy};
        }
        return {y, dy, dy};
    }

    double operator()(double x) const { return eval(x).y; }

    /// ydot_right - ydot_left at x_n, n = 0 .. N-1.
    double derivative_jump(int n) const {
        if (n < 0 || static_cast<std::size_t>(n) + 1 >= segments_.size())
            throw OutOfRange("mesh index " + std::to_string(n) + " has no interior break");
        const auto& left = segments_[static_cast<std::size_t>(n)].nodes.back();
        const auto& right = segments_[static_cast<std::size_t>(n) + 1].nodes.front();
        return right.dy - left.dy;
    }

private:
    Mesh mesh_;
    std::vector<Segment> segments_;
};

inline PiecewiseSolution::Value eval(const PiecewiseSolution& s, double x) { return s.eval(x); }
inline double derivative_jump(const PiecewiseSolution& s, int n) { return s.derivative_jump(n); }

/// Samples a closed form y(x) onto a mesh, with node slopes from its symbolic derivative.
inline PiecewiseSolution sample_expr(const Expr& y, const Mesh& mesh, int step_count = 64) {
    const Expr dy = differentiate(y, "x");
    std::vector<Segment> segs;
    for (std::size_t k = 0; k + 1 < mesh.points.size(); ++k) {
        Segment seg{mesh.points[k], mesh.points[k + 1], {}};
        for (double x : detail::uniform_grid(seg.from, seg.to, step_count))
            seg.nodes.push_back({x, y.eval({{"x", x}}), dy.eval({{"x", x}})});
        segs.push_back(std::move(seg));
    }
    return PiecewiseSolution(mesh, std::move(segs));
}

namespace detail {

class Stepper {
public:
    Stepper(const Dods& d, const Mesh& mesh, const SolverConfig& cfg) : d_(d), mesh_(mesh), cfg_(cfg) {}

    std::vector<Segment> run(const Expr& phi) {
        const Expr dphi = differentiate(phi, "x");
        Segment first{mesh_.points[0], mesh_.points[1], {}};
        for (double x : uniform_grid(first.from, first.to, cfg_.step_count))
            first.nodes.push_back({x, phi.eval({{"x", x}}), dphi.eval({{"x", x}})});
        segs_.push_back(std::move(first));

        const bool fast = cfg_.scheme == Scheme::ExactLinear && cfg_.fast_path && d_.is_pure_quotient() &&
                          !std::holds_alternative<DelayRelation::Moebius>(d_.delay().form()) &&
                          !std::holds_alternative<DelayRelation::General>(d_.delay().form());
        for (std::size_t k = 1; k + 1 < mesh_.points.size(); ++k) {
            const double a = mesh_.points[k], b = mesh_.points[k + 1];
            Segment seg{a, b, {}};
            const auto xs = uniform_grid(a, b, cfg_.step_count);
            double y = segs_.back().nodes.back().y;
            seg.nodes.push_back({a, y, rhs(a, y)});
            for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
                if (cfg_.scheme == Scheme::RK4) y = rk4(xs[i], xs[i + 1], y);
                else if (fast) y = quotient_step(xs[i], xs[i + 1], y);
                else y = linear_step(xs[i], xs[i + 1], y);
                seg.nodes.push_back({xs[i + 1], y, rhs(xs[i + 1], y)});
            }
            segs_.push_back(std::move(seg));
        }
        return std::move(segs_);
    }

private:
    // Value of the already computed solution at g(x).
    double delayed(double x) const {
        const double u = d_.delay().delayed_point(x);
        if (u < mesh_.points[0]) throw OutOfRange("delay point precedes the initial interval");
        const std::size_t k = std::min(segment_index(mesh_.points, u), segs_.size() - 1);
        return hermite(segs_[k], u).first;
    }

    double rhs(double x, double y) const { return d_.f(x, y, d_.delay().delayed_point(x), delayed(x)); }

    double rk4(double x0, double x1, double y) const {
        const double h = x1 - x0, xm = x0 + 0.5 * h;
        const double k1 = rhs(x0, y);
        const double k2 = rhs(xm, y + 0.5 * h * k1);
        const double k3 = rhs(xm, y + 0.5 * h * k2);
        const double k4 = rhs(x1, y + h * k3);
        return y + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
    }

    double coeff(const Expr& e, double x) const {
        return e.eval({{"x", x}, {"xm", d_.delay().delayed_point(x)}});
    }

    // y(x1) = y(x0) exp(int alpha) + int_{x0}^{x1} exp(int_s^{x1} alpha) (beta y(g(s)) + gamma) ds.
    double linear_step(double x0, double x1, double y) const {
        const auto& lin = d_.linear_rhs();
        auto alpha = [&](double s) { return coeff(lin.alpha, s); };
        auto I = [&](double s) { return numerics::adaptive_simpson(alpha, s, x1, 0.1 * cfg_.quad_tol); };
        auto forcing = [&](double s) {
            return std::exp(I(s)) * (coeff(lin.beta, s) * delayed(s) + coeff(lin.gamma, s));
        };
        return y * std::exp(I(x0)) + numerics::adaptive_simpson(forcing, x0, x1, cfg_.quad_tol);
    }

    // Same step for y' = (y - y_-)/(x - x_-), x_- = q x - tau, where the integrating
    // factor is (dx(t)/dx(s))^{1/(1-q)} with dx(x) = (1-q)x + tau, or e^{(t-s)/tau} if q = 1.
    double quotient_step(double x0, double x1, double y) const {
        double q = 1.0, tau = 0.0;
        if (const auto* c = std::get_if<DelayRelation::Constant>(&d_.delay().form())) tau = c->tau;
        else if (const auto* a = std::get_if<DelayRelation::Affine>(&d_.delay().form())) q = a->q, tau = a->tau;
        else q = std::get<DelayRelation::QScale>(d_.delay().form()).q;
        auto width = [&](double s) { return (1.0 - q) * s + tau; };
        auto factor = [&](double s, double t) {
            return q == 1.0 ? std::exp((t - s) / tau) : std::pow(width(t) / width(s), 1.0 / (1.0 - q));
        };
        auto forcing = [&](double s) { return -factor(s, x1) * delayed(s) / width(s); };
        return y * factor(x0, x1) + numerics::adaptive_simpson(forcing, x0, x1, cfg_.quad_tol);
    }

    const Dods& d_;
    const Mesh& mesh_;
    const SolverConfig& cfg_;
    std::vector<Segment> segs_;
};

} // namespace detail

/// Method of steps over N forward intervals of the delay mesh from init.x0.
inline PiecewiseSolution solve(const Dods& d, const InitialCondition& init, int N, const SolverConfig& cfg = {}) {
    if (cfg.scheme == Scheme::ExactLinear && !d.is_linear())
        throw SchemeMismatch("ExactLinear needs a linear right-hand side; use RK4");
    if (cfg.step_count < 1) throw ParameterDomainError("step_count must be positive");
    init.check_against(d.delay());
    Mesh mesh = build_mesh(d.delay(), init.x0, N);
    detail::Stepper stepper(d, mesh, cfg);
    auto segs = stepper.run(init.phi);
    return PiecewiseSolution(std::move(mesh), std::move(segs));
}

/// max |ydot - f| over interior sample points of every node cell in segments >= first_segment.
/// Points sit at cell midpoints when per_cell = 1, where Hermite slopes are most accurate.
inline double residual_scan(const PiecewiseSolution& s, const Dods& d, int per_cell = 1, std::size_t first_segment = 1) {
    double worst = 0.0;
    const auto& segs = s.segments();
    for (std::size_t k = first_segment; k < segs.size(); ++k) {
        const auto& nodes = segs[k].nodes;
        for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
            for (int j = 1; j <= per_cell; ++j) {
                const double x = nodes[i].x + (nodes[i + 1].x - nodes[i].x) * j / (per_cell + 1);
                const double xm = d.delay().delayed_point(x);
                if (xm < s.start()) throw OutOfRange("delay point precedes the solution's first node");
                const auto v = s.eval(x);
                worst = std::max(worst, std::fabs(d.residual(x, v.y, xm, s(xm), v.ydot_right).r1));
            }
        }
    }
    return worst;
}

} // namespace lindods
