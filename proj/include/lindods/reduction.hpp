#pragma once
// Invariant solutions: solve a family's constraints, instantiate y = h(x), check it.

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "lindods/catalog.hpp"
#include "lindods/errors.hpp"
#include "lindods/expr.hpp"
#include "lindods/numerics.hpp"

namespace lindods {

inline std::vector<InvariantFamily> families(const CatalogCase& c) { return catalog(c).families; }

inline const InvariantFamily& find_family(const std::vector<InvariantFamily>& fams, const std::string& label) {
    for (const auto& f : fams)
        if (f.label == label) return f;
    throw ParameterDomainError("no family '" + label + "'");
}

enum class SolveStatus { Solved, TrivialOnly, NoSolution };

inline const char* status_name(SolveStatus s) {
    switch (s) {
    case SolveStatus::Solved: return "solved";
    case SolveStatus::TrivialOnly: return "trivial_only";
    default: return "no_solution";
    }
}

struct ConstraintSolution {
    SolveStatus status = SolveStatus::NoSolution;
    ParamMap values;                 // case and family parameters
    std::vector<std::string> free;   // names left arbitrary
    std::string reason;
    double max_constraint_residual = 0.0;
};

namespace detail {

inline constexpr double kConstraintTol = 1e-12;

inline double find_root(const SolveStep& step, const ParamMap& values, const std::string& where) {
    auto f = [&](double v) { return step.condition(v, values); };
    std::string tried;
    for (const auto& [lo, hi] : step.ranges) {
        if (auto br = numerics::scan_bracket(f, lo, hi)) {
            if (br->first == br->second) return br->first;
            return numerics::hybrid_root(f, br->first, br->second).root;
        }
        tried += (tried.empty() ? "" : ", ") + std::string("[") + format_number(lo) + ", " + format_number(hi) + "]";
    }
    throw BracketNotFound(where + ": no sign change of the condition for " + step.name + " on " + tried);
}

} // namespace detail

/// Solves the family's constraints. `given` holds family parameters fixed by the caller
/// (for example a = 5); case parameters given explicitly in `c` are checked, never solved.
inline ConstraintSolution solve_constraints(const InvariantFamily& fam, const CatalogCase& c, const ParamMap& given = {}) {
    ConstraintSolution sol;
    sol.values = effective_params(c);
    for (const auto& [name, v] : given) sol.values[name] = v;
    const std::string where = fam.case_id + " " + fam.label;
    bool trivial = false;

    for (const auto& step : fam.steps) {
        const bool fixed = step.on_case ? c.params.count(step.name) > 0 : given.count(step.name) > 0;
        if (fixed) {
            if (step.kind == SolveStep::Kind::Scan && step.on_case) {
                const double r = step.condition(sol.values.at(step.name), sol.values);
                if (!(std::fabs(r) <= detail::kConstraintTol)) {
                    sol.status = SolveStatus::NoSolution;
                    sol.reason = step.name + " = " + detail::format_number(sol.values.at(step.name)) +
                                 " violates the existence condition (residual " + detail::format_number(r) + ")";
                    return sol;
                }
            }
            if (step.kind != SolveStep::Kind::Linear) continue;
        }
        switch (step.kind) {
        case SolveStep::Kind::Closed: sol.values[step.name] = step.closed(sol.values); break;
        case SolveStep::Kind::Scan: sol.values[step.name] = detail::find_root(step, sol.values, where); break;
        case SolveStep::Kind::Linear: {
            const auto [coef, rhs] = step.linear(sol.values);
            if (std::fabs(coef) <= detail::kConstraintTol) {
                if (std::fabs(rhs) > detail::kConstraintTol) {
                    sol.status = SolveStatus::NoSolution;
                    sol.reason = "0 * " + step.name + " = " + detail::format_number(rhs);
                    return sol;
                }
                if (!sol.values.count(step.name)) sol.values[step.name] = 1.0;
                sol.free.push_back(step.name);
            } else {
                sol.values[step.name] = rhs / coef;
                if (rhs == 0.0) trivial = true;
            }
            break;
        }
        }
    }
    for (const auto& [name, role] : fam.roles) {
        if (role != ParamRole::Free) continue;
        if (!sol.values.count(name)) sol.values[name] = fam.free_defaults.count(name) ? fam.free_defaults.at(name) : 1.0;
        if (std::find(sol.free.begin(), sol.free.end(), name) == sol.free.end()) sol.free.push_back(name);
    }
    std::sort(sol.free.begin(), sol.free.end());

    for (const auto& con : fam.constraints) {
        const double r = std::fabs(con.residual(sol.values));
        sol.max_constraint_residual = std::max(sol.max_constraint_residual, r);
        if (!(r <= detail::kConstraintTol)) {
            sol.status = SolveStatus::NoSolution;
            sol.reason = "constraint " + con.text + " fails with residual " + detail::format_number(r);
            return sol;
        }
    }
    if (trivial) {
        sol.status = SolveStatus::TrivialOnly;
        sol.reason = "only y = 0 satisfies the constraints";
        sol.free.erase(std::remove(sol.free.begin(), sol.free.end(), "A"), sol.free.end());
        return sol;
    }
    sol.status = SolveStatus::Solved;
    return sol;
}

struct BuiltSolution {
    Expr y;
    double B;
};

namespace detail {

inline Expr instantiate(const std::string& text, const ParamMap& values) {
    std::vector<std::string> vars{"x"};
    std::vector<std::pair<std::string, double>> subs;
    for (const auto& [name, v] : values) {
        vars.push_back(name);
        subs.emplace_back(name, v);
    }
    return simplify(parse(text, vars).substitute(subs));
}

} // namespace detail

/// y = h(x) with the solved and free parameters; `free_values` overrides free parameters.
inline BuiltSolution build_solution(const InvariantFamily& fam, const ConstraintSolution& sol,
                                    const ParamMap& free_values = {}) {
    if (sol.status != SolveStatus::Solved)
        throw StatusError(std::string("cannot build a solution from status ") + status_name(sol.status));
    ParamMap values = sol.values;
    for (const auto& [name, v] : free_values) {
        if (std::find(sol.free.begin(), sol.free.end(), name) == sol.free.end())
            throw ParameterDomainError("'" + name + "' is not a free parameter");
        values[name] = v;
    }
    const double B = values.at("B");
    const double want = values.at(fam.delay_param);
    if (std::fabs(B - want) > 1e-12 * (1 + std::fabs(want)))
        throw StatusError("B = " + detail::format_number(B) + " does not reproduce " + fam.delay_param);
    return {detail::instantiate(fam.h, values), B};
}

/// Case with its solved case parameters made explicit, so catalog() builds the matching DODS.
inline CatalogCase solved_case(const CatalogCase& c, const ConstraintSolution& sol) {
    CatalogCase out = c;
    for (const auto& p : describe(c.id).params) out.params[p.name] = sol.values.at(p.name);
    return out;
}

/// max |ydot - f| of a closed form over sample points of the DODS domain.
inline double verify(const Expr& y, const Dods& d, int samples = 50) {
    const Expr dy = differentiate(y, "x");
    double worst = 0.0;
    for (double x : d.sample_points(samples)) {
        const double xm = d.delay().delayed_point(x);
        const double r = d.residual(x, y.eval({{"x", x}}), xm, y.eval({{"x", xm}}), dy.eval({{"x", x}})).r1;
        worst = std::max(worst, std::fabs(r));
    }
    return worst;
}

} // namespace lindods
