#pragma once
// The invariant linear DODS catalog: each case's system, its symmetry algebra,
// and the invariant-solution families obtained from its optimal system.

#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lindods/delay.hpp"
#include "lindods/dods.hpp"
#include "lindods/errors.hpp"
#include "lindods/expr.hpp"
#include "lindods/symmetry.hpp"

namespace lindods {

using ParamMap = std::map<std::string, double>;

struct CatalogCase {
    std::string id;
    ParamMap params;                               // only the values given explicitly
    std::map<std::string, std::string> functions;  // f, g, delay
};

struct ParamSpec {
    std::string name;
    double default_value;
    std::string domain;
};

struct FunctionSpec {
    std::string name;
    std::string default_text;
};

struct CaseDescriptor {
    std::string id;
    std::vector<ParamSpec> params;
    std::vector<FunctionSpec> functions;
    std::string formula;  // DODE and delay relation
    std::string dode;
    std::string delay;
};

enum class ParamRole { Free, Determined, ExistenceCondition };

inline const char* role_name(ParamRole r) {
    switch (r) {
    case ParamRole::Free: return "free";
    case ParamRole::Determined: return "determined";
    default: return "existence";
    }
}

/// One way to fix a parameter while solving a family's constraints.
struct SolveStep {
    enum class Kind { Closed, Scan, Linear };
    Kind kind;
    std::string name;
    bool on_case = false;  // the parameter belongs to the case, not the family
    std::function<double(const ParamMap&)> closed;
    std::function<double(double, const ParamMap&)> condition;  // Scan: condition(value) = 0
    std::vector<std::pair<double, double>> ranges;
    std::function<std::pair<double, double>(const ParamMap&)> linear;  // coefficient * value = rhs
};

struct Constraint {
    std::string text;
    std::function<double(const ParamMap&)> residual;
};

struct InvariantFamily {
    std::string case_id;
    std::string label;
    std::string generator_xi, generator_eta;  // over x, y and the parameters
    std::string h;                            // y = h(x; params)
    std::string k;                            // x_- = k(x; B)
    std::string delay_param;                  // the case constant B must reproduce
    std::vector<std::pair<std::string, ParamRole>> roles;
    std::vector<SolveStep> steps;
    std::vector<Constraint> constraints;
    ParamMap free_defaults;

    /// The generator with numeric parameters substituted.
    VectorField generator(const ParamMap& values) const {
        std::vector<std::string> vars{"x", "y"};
        std::vector<std::pair<std::string, double>> subs;
        for (const auto& [name, v] : values) {
            vars.push_back(name);
            subs.emplace_back(name, v);
        }
        std::vector<std::string> xvars(vars);
        xvars.erase(xvars.begin() + 1);
        return {parse(generator_xi, xvars).substitute(subs), parse(generator_eta, vars).substitute(subs), label};
    }
};

struct CaseData {
    std::string id;
    ParamMap params;  // effective values
    Dods dods;
    std::vector<VectorField> algebra;
    std::vector<InvariantFamily> families;
    bool has_chi_field = false;  // chi d/dy comes from the solver, see chi_field()
};

namespace detail {

inline const std::vector<CaseDescriptor>& descriptors() {
    static const std::vector<CaseDescriptor> table{
        {"A2_1", {}, {{"f", "sin(x)+2"}, {"g", "x-1"}}, "ẏ = f(x)·Δy/Δx, x₋ = g(x)", "ẏ = f(x)·Δy/Δx",
         "x₋ = g(x)"},
        {"A2_3", {}, {{"f", "1"}, {"g", "x-1"}}, "ẏ = Δy/Δx + f(x), x₋ = g(x)", "ẏ = Δy/Δx + f(x)", "x₋ = g(x)"},
        {"A3_1", {{"C1", 1, "real"}, {"C2", 1, "C2 > 0"}}, {}, "ẏ = Δy/Δx + C₁, Δx = C₂", "ẏ = Δy/Δx + C₁",
         "Δx = C₂"},
        {"A3_3",
         {{"a", 0.5, "0 < |a| <= 1"}, {"C1", 1, "real"}, {"C2", 0.5, "0 < C2 < 1"}},
         {{"g", "x-1"}},
         "ẏ = Δy/Δx + C₁x^(a/(1−a)), x₋ = C₂x (a ≠ 1); ẏ = Δy/Δx, x₋ = g(x) (a = 1)",
         "ẏ = Δy/Δx + C₁x^(a/(1−a))",
         "x₋ = C₂x"},
        {"A3_5", {{"C1", 1, "real"}, {"C2", 1, "C2 > 0"}}, {}, "ẏ = Δy/Δx + C₁eˣ, Δx = C₂", "ẏ = Δy/Δx + C₁eˣ",
         "Δx = C₂"},
        {"A3_7",
         {{"b", 0, "b >= 0"}, {"C1", 1, "real"}, {"C2", 1, "C2 != 0"}},
         {},
         "ẏ = Δy/Δx + C₁e^(b·atan x)/√(1 + x²), x₋ = (x − C₂)/(1 + C₂x)",
         "ẏ = Δy/Δx + C₁e^(b·atan x)/√(1 + x²)",
         "x₋ = (x − C₂)/(1 + C₂x)"},
        {"A3_13", {{"C1", 1, "real"}, {"C2", 1, "C2 > 0"}}, {}, "ẏ = C₁Δy/Δx, Δx = C₂", "ẏ = C₁Δy/Δx", "Δx = C₂"},
        {"A3_14", {{"C1", 1, "real"}, {"C2", 0.5, "C2 != 0, 1"}}, {}, "ẏ = Δy/Δx + C₁, x₋ = C₂x",
         "ẏ = Δy/Δx + C₁", "x₋ = C₂x"},
        {"A3_15", {}, {{"f", "sin(x)"}, {"delay", "constant(1)"}}, "ẏ = Δy/Δx + f(x), χ̇ = (χ − χ(x₋))/(x − x₋)",
         "ẏ = Δy/Δx + f(x)", "χ̇ = (χ − χ(x₋))/(x − x₋)"},
        {"A4_5", {}, {{"delay", "constant(1)"}}, "ẏ = Δy/Δx, χ̇ = (χ − χ(x₋))/(x − x₋)", "ẏ = Δy/Δx",
         "χ̇ = (χ − χ(x₋))/(x − x₋)"},
        {"A4_12", {{"C", 1, "C > 0"}}, {}, "ẏ = Δy/Δx, Δx = C", "ẏ = Δy/Δx", "Δx = C"},
        {"A4_14", {{"C", 1, "C != 0"}}, {}, "ẏ = Δy/Δx, x₋ = (x − C)/(1 + Cx)", "ẏ = Δy/Δx",
         "x₋ = (x − C)/(1 + Cx)"},
        {"A4_21", {{"C", 0.5, "C != 0, 1"}}, {}, "ẏ = Δy/Δx, x₋ = Cx", "ẏ = Δy/Δx", "x₋ = Cx"},
    };
    return table;
}

inline bool is_no_dods_case(const std::string& id) {
    static const char* ids[] = {"A3_11", "A4_1",  "A4_2",  "A4_3",  "A4_4",  "A4_6",  "A4_7",
                                "A4_8",  "A4_9",  "A4_10", "A4_11", "A4_15", "A4_16", "A4_17",
                                "A4_18", "A4_19", "A4_20", "A4_22"};
    for (const char* s : ids)
        if (id == s) return true;
    return false;
}

inline Expr coeff(std::string_view text, const ParamMap& p) {
    std::vector<std::string> vars{"x", "xm"};
    std::vector<std::pair<std::string, double>> subs;
    for (const auto& [name, v] : p) {
        vars.push_back(name);
        subs.emplace_back(name, v);
    }
    return parse(text, vars).substitute(subs);
}

// x_- = c x: geometric on x > 0 for 0 < c < 1, on x < 0 for c > 1; c < 0 keeps x > 0.
inline std::pair<DelayRelation, Interval> scaling_delay(double c) {
    const double inf = std::numeric_limits<double>::infinity();
    if (c == 0.0 || c == 1.0) throw ParameterDomainError("scaling delay needs C != 0, 1");
    if (c > 0 && c < 1) return {DelayRelation::qscale(c), {0.0, inf}};
    if (c > 1) return {DelayRelation::affine(c, 0.0), {-inf, 0.0}};
    return {DelayRelation::general(coeff("c*x", {{"c", c}})), {0.0, inf}};
}

inline Interval moebius_domain(double C) {
    // C/(1 + Cx) > 0 holds exactly for x > -1/C, whatever the sign of C.
    return {-1.0 / C, std::numeric_limits<double>::infinity()};
}

inline Interval default_domain(const DelayRelation& rel) {
    const double inf = std::numeric_limits<double>::infinity();
    if (std::holds_alternative<DelayRelation::QScale>(rel.form())) return {0.0, inf};
    if (const auto* m = std::get_if<DelayRelation::Moebius>(&rel.form())) return moebius_domain(m->C);
    if (const auto* a = std::get_if<DelayRelation::Affine>(&rel.form())) {
        // g(x) < x on x < tau/(q-1) for q > 1 and on x > -tau/(1-q) for q < 1.
        if (a->q > 1) return {-inf, a->tau / (a->q - 1)};
        if (a->q < 1) return {-a->tau / (1 - a->q), inf};
    }
    return {};
}

inline VectorField field(const char* xi, const char* eta, const char* label, const ParamMap& p = {}) {
    std::vector<std::string> vars{"x", "y"};
    std::vector<std::pair<std::string, double>> subs;
    for (const auto& [name, v] : p) {
        vars.push_back(name);
        subs.emplace_back(name, v);
    }
    std::vector<std::string> xvars(vars);
    xvars.erase(xvars.begin() + 1);
    return {parse(xi, xvars).substitute(subs), parse(eta, vars).substitute(subs), label};
}

inline Dods quotient_dods(const Expr& scale, const Expr& gamma, DelayRelation delay, Interval domain) {
    const Expr q = build::div(scale, parse("x - xm", {"x", "xm"}));
    return Dods::linear(q, build::neg(q), gamma, std::move(delay), domain);
}

// Residual helpers shared by the families.
inline double moebius_coefficient(double b, double B) {
    const double beta = std::atan(B);
    return b - (std::cos(beta) - std::exp(-b * beta)) / std::sin(beta);
}

inline SolveStep closed_step(std::string name, std::function<double(const ParamMap&)> f) {
    SolveStep s{SolveStep::Kind::Closed, std::move(name)};
    s.closed = std::move(f);
    return s;
}
inline SolveStep scan_step(std::string name, std::function<double(double, const ParamMap&)> f,
                           std::vector<std::pair<double, double>> ranges, bool on_case = false) {
    SolveStep s{SolveStep::Kind::Scan, std::move(name)};
    s.on_case = on_case;
    s.condition = std::move(f);
    s.ranges = std::move(ranges);
    return s;
}
inline SolveStep linear_step(std::string name, std::function<std::pair<double, double>(const ParamMap&)> f) {
    SolveStep s{SolveStep::Kind::Linear, std::move(name)};
    s.linear = std::move(f);
    return s;
}

inline std::vector<InvariantFamily> build_families(const std::string& id, const ParamMap& p) {
    using R = ParamRole;
    std::vector<InvariantFamily> out;
    auto B_equals = [](const char* c) {
        return Constraint{std::string("B = ") + c, [c = std::string(c)](const ParamMap& m) { return m.at("B") - m.at(c); }};
    };
    auto B_step = [](const char* c) { return closed_step("B", [c = std::string(c)](const ParamMap& m) { return m.at(c); }); };

    if (id == "A3_1") {
        InvariantFamily f{id, "aX2+X3", "1", "a*x", "a/2*x^2 + A", "x - B", "C2"};
        f.roles = {{"A", R::Free}, {"a", R::Determined}, {"B", R::Determined}};
        f.steps = {B_step("C2"), closed_step("a", [](const ParamMap& m) { return 2 * m.at("C1") / m.at("B"); })};
        f.constraints = {B_equals("C2"), {"a B / 2 = C1", [](const ParamMap& m) { return m.at("a") * m.at("B") / 2 - m.at("C1"); }}};
        f.free_defaults = {{"A", 1.0}};
        out.push_back(std::move(f));
    } else if (id == "A3_3" && p.at("a") != 1.0) {
        InvariantFamily f{id, "X3", "(1-a)*x", "y", "A*x^(1/(1-a))", "B*x", "C2"};
        f.roles = {{"A", R::Determined}, {"B", R::Determined}};
        auto coef = [](const ParamMap& m) {
            const double q = 1 / (1 - m.at("a")), B = m.at("B");
            return q - (1 - std::pow(B, q)) / (1 - B);
        };
        f.steps = {B_step("C2"), linear_step("A", [coef](const ParamMap& m) { return std::make_pair(coef(m), m.at("C1")); })};
        f.constraints = {B_equals("C2"),
                         {"A (p - (1 - B^p)/(1 - B)) = C1, p = 1/(1-a)",
                          [coef](const ParamMap& m) { return m.at("A") * coef(m) - m.at("C1"); }}};
        out.push_back(std::move(f));
    } else if (id == "A3_5") {
        InvariantFamily f{id, "X3", "1", "y", "A*exp(x)", "x - B", "C2"};
        f.roles = {{"A", R::Determined}, {"B", R::Determined}};
        auto coef = [](const ParamMap& m) {
            const double B = m.at("B");
            return 1 - (1 - std::exp(-B)) / B;
        };
        f.steps = {B_step("C2"), linear_step("A", [coef](const ParamMap& m) { return std::make_pair(coef(m), m.at("C1")); })};
        f.constraints = {B_equals("C2"), {"A (1 - (1 - e^(-B))/B) = C1",
                                          [coef](const ParamMap& m) { return m.at("A") * coef(m) - m.at("C1"); }}};
        out.push_back(std::move(f));
    } else if (id == "A3_7") {
        InvariantFamily f{id, "X3", "1+x^2", "(x+b)*y", "A*sqrt(1+x^2)*exp(b*atan(x))", "(x - B)/(1 + B*x)", "C2"};
        f.roles = {{"A", R::Determined}, {"B", R::Determined}};
        auto coef = [](const ParamMap& m) { return moebius_coefficient(m.at("b"), m.at("B")); };
        f.steps = {B_step("C2"), linear_step("A", [coef](const ParamMap& m) { return std::make_pair(coef(m), m.at("C1")); })};
        f.constraints = {B_equals("C2"), {"A (b - (cos t - e^(-b t))/sin t) = C1, t = atan B",
                                          [coef](const ParamMap& m) { return m.at("A") * coef(m) - m.at("C1"); }}};
        out.push_back(std::move(f));
    } else if (id == "A3_13") {
        InvariantFamily pm{id, "X1±X2", "1", "s", "s*x + A", "x - B", "C2"};
        pm.roles = {{"A", R::Free}, {"s", R::Free}, {"B", R::Determined}, {"C1", R::ExistenceCondition}};
        pm.steps = {scan_step("C1", [](double c, const ParamMap&) { return c - 1; }, {{-10.0, 10.0}}, true), B_step("C2")};
        pm.constraints = {B_equals("C2"), {"s = C1 s", [](const ParamMap& m) { return m.at("s") * (1 - m.at("C1")); }}};
        pm.free_defaults = {{"A", 1.0}, {"s", 1.0}};
        out.push_back(std::move(pm));

        InvariantFamily ex{id, "X1+aX3", "1", "a*y", "A*exp(a*x)", "x - B", "C2"};
        ex.roles = {{"A", R::Free}, {"a", R::ExistenceCondition}, {"B", R::Determined}};
        auto cond = [](double a, const ParamMap& m) {
            const double B = m.at("B");
            return a - m.at("C1") * (1 - std::exp(-a * B)) / B;
        };
        ex.steps = {B_step("C2"), scan_step("a", cond, {{1e-6, 50.0}, {-50.0, -1e-6}}),
                    linear_step("A", [cond](const ParamMap& m) { return std::make_pair(cond(m.at("a"), m), 0.0); })};
        ex.constraints = {B_equals("C2"), {"A (a - C1 (1 - e^(-a B))/B) = 0",
                                           [cond](const ParamMap& m) { return m.at("A") * cond(m.at("a"), m); }}};
        ex.free_defaults = {{"A", 1.0}};
        out.push_back(std::move(ex));
    } else if (id == "A3_14") {
        InvariantFamily f{id, "aX1+X3", "x", "y + a*x", "a*x*ln(abs(x)) + A*x", "B*x", "C2"};
        f.roles = {{"A", R::Free}, {"a", R::Determined}, {"B", R::Determined}};
        auto coef = [](const ParamMap& m) {
            const double B = m.at("B");
            return 1 + B * std::log(std::fabs(B)) / (1 - B);
        };
        f.steps = {B_step("C2"), linear_step("a", [coef](const ParamMap& m) { return std::make_pair(coef(m), m.at("C1")); })};
        f.constraints = {B_equals("C2"), {"a (1 + B ln|B|/(1 - B)) = C1",
                                          [coef](const ParamMap& m) { return m.at("a") * coef(m) - m.at("C1"); }}};
        f.free_defaults = {{"A", 1.0}};
        out.push_back(std::move(f));
    } else if (id == "A4_12") {
        InvariantFamily x1{id, "X1", "1", "0", "A", "x - B", "C"};
        x1.roles = {{"A", R::Free}, {"B", R::Determined}};
        x1.steps = {B_step("C")};
        x1.constraints = {B_equals("C")};
        x1.free_defaults = {{"A", 1.0}};
        out.push_back(std::move(x1));

        InvariantFamily pm{id, "X1±X2", "1", "s*x", "s*x^2/2 + A", "x - B", "C"};
        pm.roles = {{"A", R::Free}, {"s", R::Free}, {"B", R::Determined}};
        pm.steps = {B_step("C")};
        pm.constraints = {B_equals("C"), {"s B / 2 = 0", [](const ParamMap& m) { return m.at("s") * m.at("B") / 2; }}};
        pm.free_defaults = {{"A", 1.0}, {"s", 1.0}};
        out.push_back(std::move(pm));

        InvariantFamily ex{id, "aX1+X4", "a", "y", "A*exp(x/a)", "x - B", "C"};
        ex.roles = {{"A", R::Free}, {"a", R::ExistenceCondition}, {"B", R::Determined}};
        auto cond = [](double a, const ParamMap& m) {
            const double B = m.at("B");
            return 1 / a - (1 - std::exp(-B / a)) / B;
        };
        ex.steps = {B_step("C"), scan_step("a", cond, {{0.02, 50.0}, {-50.0, -0.02}}),
                    linear_step("A", [cond](const ParamMap& m) { return std::make_pair(cond(m.at("a"), m), 0.0); })};
        ex.constraints = {B_equals("C"), {"A (1/a - (1 - e^(-C/a))/C) = 0",
                                          [cond](const ParamMap& m) { return m.at("A") * cond(m.at("a"), m); }}};
        ex.free_defaults = {{"A", 1.0}};
        out.push_back(std::move(ex));
    } else if (id == "A4_14") {
        InvariantFamily f{id, "aX3+X4", "1+x^2", "(x+a)*y", "A*sqrt(1+x^2)*exp(a*atan(x))", "(x - B)/(1 + B*x)", "C"};
        f.roles = {{"A", R::Free}, {"a", R::ExistenceCondition}, {"B", R::Determined}};
        auto cond = [](double a, const ParamMap& m) { return moebius_coefficient(a, m.at("B")); };
        f.steps = {B_step("C"), scan_step("a", cond, {{-20.0, 20.0}}),
                   linear_step("A", [cond](const ParamMap& m) { return std::make_pair(cond(m.at("a"), m), 0.0); })};
        f.constraints = {B_equals("C"), {"A (a - (cos t - e^(-a t))/sin t) = 0, t = atan C",
                                         [cond](const ParamMap& m) { return m.at("A") * cond(m.at("a"), m); }}};
        f.free_defaults = {{"A", 1.0}};
        out.push_back(std::move(f));
    } else if (id == "A4_21") {
        InvariantFamily y1{id, "Y1", "x", "0", "A", "B*x", "C"};
        y1.roles = {{"A", R::Free}, {"B", R::Determined}};
        y1.steps = {B_step("C")};
        y1.constraints = {B_equals("C")};
        y1.free_defaults = {{"A", 1.0}};
        out.push_back(std::move(y1));

        InvariantFamily pm{id, "Y1±Y2", "x", "s", "s*ln(abs(x)) + A", "B*x", "C"};
        pm.roles = {{"A", R::Free}, {"s", R::Free}, {"B", R::Determined}, {"C", R::ExistenceCondition}};
        auto log_cond = [](double c, const ParamMap&) { return std::log(std::fabs(c)) - c + 1; };
        pm.steps = {scan_step("C", log_cond, {{-1 / std::exp(1.0) + 1e-9, -1e-9}}, true), B_step("C")};
        pm.constraints = {B_equals("C"), {"s (ln|B| - B + 1) = 0", [log_cond](const ParamMap& m) {
                                              return m.at("s") * log_cond(m.at("B"), m);
                                          }}};
        pm.free_defaults = {{"A", 1.0}, {"s", 1.0}};
        out.push_back(std::move(pm));

        InvariantFamily ex{id, "aY1+Y4", "a*x", "y", "A*x^(1/a)", "B*x", "C"};
        ex.roles = {{"A", R::Free}, {"a", R::ExistenceCondition}, {"B", R::Determined}};
        auto cond = [](double a, const ParamMap& m) {
            const double B = m.at("B");
            return 1 / a - (1 - std::pow(B, 1 / a)) / (1 - B);
        };
        ex.steps = {B_step("C"), scan_step("a", cond, {{0.02, 50.0}, {-50.0, -0.02}}),
                    linear_step("A", [cond](const ParamMap& m) { return std::make_pair(cond(m.at("a"), m), 0.0); })};
        ex.constraints = {B_equals("C"), {"A (1/a - (1 - B^(1/a))/(1 - B)) = 0",
                                          [cond](const ParamMap& m) { return m.at("A") * cond(m.at("a"), m); }}};
        ex.free_defaults = {{"A", 1.0}};
        out.push_back(std::move(ex));
    }
    return out;
}

} // namespace detail

/// The 13 cases with an invariant DODS.
inline const std::vector<CaseDescriptor>& list_cases() { return detail::descriptors(); }

inline const CaseDescriptor& describe(const std::string& id) {
    for (const auto& d : list_cases())
        if (d.id == id) return d;
    if (detail::is_no_dods_case(id)) throw NoDodsError(id + ": no invariant DODS");
    throw ParameterDomainError("unknown case '" + id + "'");
}

/// Explicit values over the descriptor defaults.
inline ParamMap effective_params(const CatalogCase& c) {
    const auto& desc = describe(c.id);
    ParamMap out;
    for (const auto& p : desc.params) out[p.name] = p.default_value;
    for (const auto& [name, v] : c.params) {
        if (!out.count(name)) throw ParameterDomainError(c.id + " has no parameter '" + name + "'");
        out[name] = v;
    }
    return out;
}

inline std::string function_text(const CatalogCase& c, const std::string& name) {
    if (auto it = c.functions.find(name); it != c.functions.end()) return it->second;
    for (const auto& f : describe(c.id).functions)
        if (f.name == name) return f.default_text;
    throw ParameterDomainError(c.id + " takes no function '" + name + "'");
}

inline CaseData catalog(const CatalogCase& c) {
    using detail::coeff;
    using detail::field;
    const auto& desc = describe(c.id);
    for (const auto& [name, text] : c.functions) {
        (void)text;
        bool known = false;
        for (const auto& f : desc.functions) known = known || f.name == name;
        if (!known) throw ParameterDomainError(c.id + " takes no function '" + name + "'");
    }
    const ParamMap p = effective_params(c);
    const std::string& id = c.id;
    const Expr one = Expr::number(1), zero = Expr::number(0);
    auto param = [&](const char* n) { return p.at(n); };
    auto need = [&](bool ok, const std::string& what) {
        if (!ok) throw ParameterDomainError(id + " needs " + what);
    };
    auto general_delay = [&]() {
        const auto rel = DelayRelation::general(function_text(c, "g"));
        return std::make_pair(rel, detail::default_domain(rel));
    };

    const VectorField dy = field("0", "1", "Dy"), xdy = field("0", "x", "x*Dy"), ydy = field("0", "y", "y*Dy"),
                      dx = field("1", "0", "Dx");

    std::optional<Dods> d;
    std::vector<VectorField> algebra;
    bool chi = false;
    if (id == "A2_1" || id == "A2_3") {
        auto [rel, dom] = general_delay();
        const Expr f = parse(function_text(c, "f"), {"x"});
        if (id == "A2_1") {
            d = detail::quotient_dods(f, zero, rel, dom);
            algebra = {dy, ydy};
        } else {
            d = detail::quotient_dods(one, f, rel, dom);
            algebra = {dy, xdy};
        }
    } else if (id == "A3_1" || id == "A3_5") {
        need(param("C2") > 0, "C2 > 0");
        const Expr gamma = coeff(id == "A3_1" ? "C1" : "C1*exp(x)", p);
        d = detail::quotient_dods(one, gamma, DelayRelation::constant(param("C2")), {});
        algebra = {dy, xdy, id == "A3_1" ? dx : field("1", "y", "Dx + y*Dy")};
    } else if (id == "A3_3") {
        const double a = param("a");
        need(a != 0 && std::fabs(a) <= 1, "0 < |a| <= 1");
        if (a == 1.0) {
            auto [rel, dom] = general_delay();
            d = detail::quotient_dods(one, zero, rel, dom);
        } else {
            need(param("C2") > 0 && param("C2") < 1, "0 < C2 < 1 (powers of x are taken on x > 0)");
            auto [rel, dom] = detail::scaling_delay(param("C2"));
            d = detail::quotient_dods(one, coeff("C1*x^(a/(1-a))", p), rel, dom);
        }
        algebra = {dy, xdy, field("(1-a)*x", "y", "(1-a)x*Dx + y*Dy", p)};
    } else if (id == "A3_7") {
        need(param("b") >= 0, "b >= 0");
        need(param("C2") != 0, "C2 != 0");
        const double C2 = param("C2");
        d = detail::quotient_dods(one, coeff("C1*exp(b*atan(x))/sqrt(1+x^2)", p), DelayRelation::moebius(C2),
                                  detail::moebius_domain(C2));
        algebra = {dy, xdy, field("1+x^2", "(x+b)*y", "(1+x^2)Dx + (x+b)y*Dy", p)};
    } else if (id == "A3_13") {
        need(param("C2") > 0, "C2 > 0");
        d = detail::quotient_dods(Expr::number(param("C1")), zero, DelayRelation::constant(param("C2")), {});
        algebra = {dx, dy, ydy};
    } else if (id == "A3_14") {
        auto [rel, dom] = detail::scaling_delay(param("C2"));
        d = detail::quotient_dods(one, Expr::number(param("C1")), rel, dom);
        algebra = {xdy, dy, field("x", "y", "x*Dx + y*Dy")};
    } else if (id == "A3_15" || id == "A4_5") {
        const auto rel = DelayRelation::parse_text(function_text(c, "delay"));
        const Expr gamma = id == "A3_15" ? parse(function_text(c, "f"), {"x"}) : zero;
        d = detail::quotient_dods(one, gamma, rel, detail::default_domain(rel));
        algebra = id == "A3_15" ? std::vector<VectorField>{dy, xdy} : std::vector<VectorField>{dy, xdy, ydy};
        chi = true;
    } else if (id == "A4_12") {
        need(param("C") > 0, "C > 0");
        d = detail::quotient_dods(one, zero, DelayRelation::constant(param("C")), {});
        algebra = {dx, xdy, dy, ydy};
    } else if (id == "A4_14") {
        need(param("C") != 0, "C != 0");
        d = detail::quotient_dods(one, zero, DelayRelation::moebius(param("C")), detail::moebius_domain(param("C")));
        algebra = {dy, xdy, ydy, field("1+x^2", "x*y", "(1+x^2)Dx + xy*Dy")};
    } else {  // A4_21
        auto [rel, dom] = detail::scaling_delay(param("C"));
        d = detail::quotient_dods(one, zero, rel, dom);
        algebra = {dy, field("x", "y", "x*Dx + y*Dy"), field("x", "0", "x*Dx"), xdy};
    }
    return {id, p, std::move(*d), std::move(algebra), detail::build_families(id, p), chi};
}

/// Parses "name=value".
inline std::pair<std::string, double> parse_assignment(const std::string& text) {
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ParameterDomainError("expected name=value, got '" + text + "'");
    std::string name = text.substr(0, eq), value = text.substr(eq + 1);
    auto trim = [](std::string& s) {
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.erase(s.begin());
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
    };
    trim(name);
    trim(value);
    char* end = nullptr;
    const double v = std::strtod(value.c_str(), &end);
    if (name.empty() || value.empty() || *end != '\0' || !std::isfinite(v))
        throw ParameterDomainError("bad assignment '" + text + "'");
    return {name, v};
}

} // namespace lindods
