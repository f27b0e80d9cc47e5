#pragma once
// Scalar numerics shared by the solver and the constraint solver.

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <utility>

namespace lindods::numerics {

namespace detail {

template <class F>
double simpson_step(const F& f, double a, double b, double fa, double fm, double fb, double whole,
                    double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::fabs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

} // namespace detail

/// Adaptive Simpson quadrature with Richardson correction.
template <class F>
double adaptive_simpson(const F& f, double a, double b, double abs_tol = 1e-12, int max_depth = 30) {
    if (a == b) return 0.0;
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return detail::simpson_step(f, a, b, fa, fm, fb, whole, abs_tol, max_depth);
}

struct RootResult {
    double root = 0.0;
    double residual = 0.0;
    int iterations = 0;
};

/// Safeguarded Newton on a sign-changing bracket [lo, hi]. Newton steps use a
/// central-difference slope; any step leaving the bracket or failing to halve
/// it falls back to bisection. Runs until the bracket collapses to adjacent doubles.
template <class F>
RootResult hybrid_root(const F& f, double lo, double hi) {
    double flo = f(lo), fhi = f(hi);
    if (flo == 0.0) return {lo, 0.0, 0};
    if (fhi == 0.0) return {hi, 0.0, 0};
    if (std::signbit(flo) == std::signbit(fhi)) return {std::nan(""), std::nan(""), 0};

    double x = 0.5 * (lo + hi);
    double fx = f(x);
    double prev_width = hi - lo;
    int it = 0;
    for (; it < 400 && fx != 0.0; ++it) {
        if (std::signbit(fx) == std::signbit(flo)) {
            lo = x;
            flo = fx;
        } else {
            hi = x;
            fhi = fx;
        }
        const double width = hi - lo;
        if (width <= 2.0 * std::numeric_limits<double>::epsilon() * std::fabs(x) ||
            std::nextafter(lo, hi) >= hi)
            break;

        const double h = 1e-7 * (1.0 + std::fabs(x));
        const double slope = (f(x + h) - f(x - h)) / (2.0 * h);
        double next = slope != 0.0 && std::isfinite(slope) ? x - fx / slope : lo - 1.0;
        if (!(next > lo && next < hi) || width > 0.5 * prev_width) next = 0.5 * (lo + hi);
        prev_width = width;
        x = next;
        fx = f(x);
    }
    // Best of the three candidates.
    RootResult best{x, fx, it};
    if (std::fabs(flo) < std::fabs(best.residual)) best = {lo, flo, it};
    if (std::fabs(fhi) < std::fabs(best.residual)) best = {hi, fhi, it};
    best.residual = std::fabs(best.residual);
    return best;
}

/// First sign change of f on an even grid over [lo, hi], as a sub-bracket.
template <class F>
std::optional<std::pair<double, double>> scan_bracket(const F& f, double lo, double hi, int points = 400) {
    double prev_x = lo;
    double prev_f = f(lo);
    for (int i = 1; i <= points; ++i) {
        const double x = lo + (hi - lo) * i / points;
        const double fx = f(x);
        if (std::isfinite(prev_f) && std::isfinite(fx)) {
            if (fx == 0.0) return std::make_pair(x, x);
            if (std::signbit(prev_f) != std::signbit(fx) && prev_f != 0.0) return std::make_pair(prev_x, x);
        }
        prev_x = x;
        prev_f = fx;
    }
    return std::nullopt;
}

} // namespace lindods::numerics
