#pragma once
// Delay ordinary differential systems
//     y' = f(x, y, y_-),   x_- = g(x),
// either general or linear, f = alpha*y + beta*y_- + gamma.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "lindods/delay.hpp"
#include "lindods/errors.hpp"
#include "lindods/expr.hpp"

namespace lindods {

/// Open interval; either end may be infinite.
struct Interval {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();

    bool contains(double x) const { return x > lo && x < hi; }

    /// Finite window inside the interval used for sampling.
    std::pair<double, double> sample_window() const {
        const bool flo = std::isfinite(lo), fhi = std::isfinite(hi);
        if (!flo && !fhi) return {-3.0, 3.0};
        if (flo && !fhi) return {lo + 0.1, lo + 4.0};
        if (!flo && fhi) return {hi - 4.0, hi - 0.1};
        const double pad = 0.05 * (hi - lo);
        return {lo + pad, hi - pad};
    }
};

/// Coefficients are expressions in x and, optionally, the delay point xm.
/// On solutions xm = g(x); keeping xm symbolic lets x - x_- appear literally.
struct LinearRhs {
    Expr alpha, beta, gamma;
};

/// f(x, y, xm, ym).
struct GeneralRhs {
    Expr f;
};

inline const std::vector<std::string>& coefficient_variables() {
    static const std::vector<std::string> vars{"x", "xm"};
    return vars;
}
inline const std::vector<std::string>& rhs_variables() {
    static const std::vector<std::string> vars{"x", "y", "xm", "ym"};
    return vars;
}

struct Residual {
    double r1 = 0.0;  // ydot - f
    double r2 = 0.0;  // xm - g(x)
};

class Dods {
public:
    using Rhs = std::variant<LinearRhs, GeneralRhs>;

    Dods(Rhs rhs, DelayRelation delay, Interval domain)
        : rhs_(std::move(rhs)), delay_(std::move(delay)), domain_(domain) {
        validate();
    }

    static Dods linear(const Expr& alpha, const Expr& beta, const Expr& gamma, DelayRelation delay,
                       Interval domain = {}) {
        return Dods(LinearRhs{alpha, beta, gamma}, std::move(delay), domain);
    }
    static Dods general(const Expr& f, DelayRelation delay, Interval domain = {}) {
        return Dods(GeneralRhs{f}, std::move(delay), domain);
    }

    const Rhs& rhs() const { return rhs_; }
    const DelayRelation& delay() const { return delay_; }
    const Interval& domain() const { return domain_; }
    bool is_linear() const { return std::holds_alternative<LinearRhs>(rhs_); }
    const LinearRhs& linear_rhs() const { return std::get<LinearRhs>(rhs_); }

    double f(double x, double y, double xm, double ym) const {
        if (const auto* lin = std::get_if<LinearRhs>(&rhs_)) {
            const Bindings b{{"x", x}, {"xm", xm}};
            return lin->alpha.eval(b) * y + lin->beta.eval(b) * ym + lin->gamma.eval(b);
        }
        return std::get<GeneralRhs>(rhs_).f.eval({{"x", x}, {"y", y}, {"xm", xm}, {"ym", ym}});
    }

    Residual residual(double x, double y, double xm, double ym, double ydot) const {
        return {ydot - f(x, y, xm, ym), xm - delay_.delayed_point(x)};
    }

    /// Same system with gamma dropped (linear) -- the equation rho must solve.
    Dods homogeneous() const {
        if (const auto* lin = std::get_if<LinearRhs>(&rhs_))
            return Dods(LinearRhs{lin->alpha, lin->beta, Expr::number(0)}, delay_, domain_);
        throw InvalidDods("homogeneous part is only defined for linear systems");
    }

    /// True when the system is y' = (y - y_-)/(x - x_-), checked on sample points.
    bool is_pure_quotient() const {
        const auto* lin = std::get_if<LinearRhs>(&rhs_);
        if (!lin) return false;
        for (double x : sample_points(9)) {
            double xm = 0.0;
            try {
                xm = delay_.delayed_point(x);
            } catch (const Error&) {
                return false;
            }
            const Bindings b{{"x", x}, {"xm", xm}};
            const double q = 1.0 / (x - xm);
            try {
                if (std::fabs(lin->alpha.eval(b) - q) > 1e-13 * std::fabs(q) ||
                    std::fabs(lin->beta.eval(b) + q) > 1e-13 * std::fabs(q) || lin->gamma.eval(b) != 0.0)
                    return false;
            } catch (const Error&) {
                return false;
            }
        }
        return true;
    }

    std::vector<double> sample_points(int n) const {
        const auto [a, b] = domain_.sample_window();
        std::vector<double> xs;
        for (int i = 0; i < n; ++i) xs.push_back(a + (b - a) * (i + 0.5) / n);
        return xs;
    }

private:
    void validate() const {
        auto check_vars = [](const Expr& e, const std::vector<std::string>& allowed, const char* what) {
            for (const auto& v : e.variables())
                if (std::find(allowed.begin(), allowed.end(), v) == allowed.end())
                    throw InvalidDods(std::string(what) + " uses undeclared variable '" + v + "'");
        };
        if (const auto* lin = std::get_if<LinearRhs>(&rhs_)) {
            check_vars(lin->alpha, coefficient_variables(), "alpha");
            check_vars(lin->beta, coefficient_variables(), "beta");
            check_vars(lin->gamma, coefficient_variables(), "gamma");
        } else {
            check_vars(std::get<GeneralRhs>(rhs_).f, rhs_variables(), "f");
        }
        if (!(domain_.lo < domain_.hi)) throw InvalidDods("empty domain");

        bool beta_nonzero = !is_linear();
        for (double x : sample_points(16)) {
            double xm = 0.0;
            try {
                xm = delay_.delayed_point(x);
            } catch (const DomainError& e) {
                throw InvalidDods(std::string("delay relation invalid on the domain: ") + e.what());
            }
            if (const auto* lin = std::get_if<LinearRhs>(&rhs_)) {
                try {
                    if (lin->beta.eval({{"x", x}, {"xm", xm}}) != 0.0) beta_nonzero = true;
                } catch (const DomainError&) {
                }
            }
        }
        if (!beta_nonzero) throw InvalidDods("beta vanishes on the domain; the equation has no delay");
    }

    Rhs rhs_;
    DelayRelation delay_;
    Interval domain_;
};

inline Residual residual(const Dods& d, double x, double y, double xm, double ym, double ydot) {
    return d.residual(x, y, xm, ym, ydot);
}

/// y = phi on [x_{-1}, x_0] with x_{-1} = g(x_0).
struct InitialCondition {
    Expr phi;
    double x_minus1 = 0.0;
    double x0 = 0.0;

    static InitialCondition make(const Expr& phi, const DelayRelation& delay, double x0) {
        for (const auto& v : phi.variables())
            if (v != "x") throw InvalidDods("initial function may only use x, found '" + v + "'");
        return {phi, delay.delayed_point(x0), x0};
    }

    void check_against(const DelayRelation& delay) const {
        if (!(x_minus1 < x0)) throw InvalidDods("initial interval is empty");
        if (std::fabs(delay.delayed_point(x0) - x_minus1) > 1e-12 * (1.0 + std::fabs(x_minus1)))
            throw InvalidDods("x_{-1} != g(x0)");
    }
};

} // namespace lindods
