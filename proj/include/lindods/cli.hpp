#pragma once
// Command-line front end: catalog, solve, mesh, roots, reduce, verify.

#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lindods/catalog.hpp"
#include "lindods/io.hpp"
#include "lindods/reduction.hpp"
#include "lindods/steps.hpp"
#include "lindods/symmetry.hpp"

namespace lindods::cli {

using io::Json;

/// Bad flag combinations found after parsing; exit code 2.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

struct CaseOptions {
    std::string id;
    std::vector<std::string> params;
    std::vector<std::string> functions;
};

inline void add_case_options(CLI::App* app, CaseOptions& o, bool required) {
    auto* opt = app->add_option("--case", o.id, "catalog case id, e.g. A3_5");
    if (required) opt->required();
    app->add_option("--params", o.params, "parameter as name=value (repeatable)");
    app->add_option("--fn", o.functions, "case function as name=\"<expr>\", e.g. g=\"x-1\" (repeatable)");
}

/// Splits --params into case parameters and the rest.
inline std::pair<CatalogCase, ParamMap> make_case(const CaseOptions& o) {
    CatalogCase c{o.id, {}, {}};
    ParamMap extra;
    const auto& desc = describe(o.id);
    for (const auto& text : o.params) {
        const auto [name, value] = parse_assignment(text);
        bool on_case = false;
        for (const auto& p : desc.params) on_case = on_case || p.name == name;
        (on_case ? c.params : extra)[name] = value;
    }
    for (const auto& text : o.functions) {
        const auto eq = text.find('=');
        if (eq == std::string::npos || eq == 0) throw UsageError("--fn expects name=<expr>, got '" + text + "'");
        c.functions[text.substr(0, eq)] = text.substr(eq + 1);
    }
    return {c, extra};
}

inline void reject_extra(const ParamMap& extra, const std::string& id) {
    if (!extra.empty()) throw ParameterDomainError(id + " has no parameter '" + extra.begin()->first + "'");
}

inline Json case_json(const CaseDescriptor& d) {
    Json params = Json::array(), fns = Json::array();
    for (const auto& p : d.params) params.push_back({{"name", p.name}, {"default", p.default_value}, {"domain", p.domain}});
    for (const auto& f : d.functions) fns.push_back({{"name", f.name}, {"default", f.default_text}});
    return {{"id", d.id}, {"formula", d.formula}, {"params", params}, {"functions", fns}};
}

inline Json show_json(const CatalogCase& c) {
    const CaseData data = catalog(c);
    Json j = {{"kind", "case"}};
    j.update(case_json(describe(c.id)));
    j["dode"] = describe(c.id).dode;
    j["delay"] = data.dods.delay().to_string();
    j["values"] = effective_params(c);
    Json algebra = Json::array();
    for (const auto& v : data.algebra) algebra.push_back({{"label", v.label}, {"field", v.to_string()}});
    j["algebra"] = algebra;
    j["chi_field"] = data.has_chi_field;
    Json fams = Json::array();
    for (const auto& f : data.families) {
        Json roles = Json::object();
        for (const auto& [name, role] : f.roles) roles[name] = role_name(role);
        fams.push_back({{"subalgebra", f.label},
                        {"generator", "(" + f.generator_xi + ")*Dx + (" + f.generator_eta + ")*Dy"},
                        {"y", f.h},
                        {"x_minus", f.k},
                        {"roles", roles}});
    }
    j["families"] = fams;
    return j;
}

inline Json reduce_json(const InvariantFamily& fam, const CatalogCase& c, const ParamMap& given) {
    Json j = {{"kind", "reduce"}, {"case", c.id}, {"subalgebra", fam.label}};
    ConstraintSolution sol;
    try {
        sol = solve_constraints(fam, c, given);
    } catch (const BracketNotFound& e) {
        j["status"] = "bracket_not_found";
        j["reason"] = e.what();
        return j;
    }
    j["status"] = status_name(sol.status);
    j["params"] = sol.values;
    j["free"] = sol.free;
    if (sol.status != SolveStatus::Solved) {
        j["y"] = nullptr;
        j["B"] = nullptr;
        j["max_residual"] = nullptr;
        j["reason"] = sol.reason;
        return j;
    }
    const BuiltSolution built = build_solution(fam, sol);
    const CaseData solved = catalog(solved_case(c, sol));
    j["y"] = built.y.to_string();
    j["B"] = built.B;
    j["max_residual"] = verify(built.y, solved.dods);
    return j;
}

} // namespace detail

/// Runs one command. Returns 0 on success, 1 on library errors, 2 on usage errors.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Linear delay ordinary differential systems: catalog, solve, reduce, verify"};
    app.name("lindods");
    app.require_subcommand(1);

    // catalog
    auto* cat = app.add_subcommand("catalog", "browse the invariant DODS catalog");
    cat->require_subcommand(1);
    cat->add_subcommand("list", "list every case");
    auto* show = cat->add_subcommand("show", "one case with its algebra and families");
    detail::CaseOptions show_opts;
    show->add_option("case", show_opts.id, "case id")->required();
    show->add_option("--params", show_opts.params, "parameter as name=value (repeatable)");
    show->add_option("--fn", show_opts.functions, "case function as name=<expr> (repeatable)");

    // solve
    auto* solve_cmd = app.add_subcommand("solve", "method of steps from an initial function");
    std::string spec_path, phi_text, scheme_text = "exact", format = "json", out_path;
    std::optional<double> x0;
    int intervals = 3, steps = 64;
    detail::CaseOptions solve_case;
    auto* spec_opt = solve_cmd->add_option("--spec", spec_path, "DODS spec file");
    detail::add_case_options(solve_cmd, solve_case, false);
    solve_cmd->get_option("--case")->excludes(spec_opt);
    solve_cmd->add_option("--phi", phi_text, "initial function on [g(x0), x0]");
    solve_cmd->add_option("--x0", x0, "start of the first forward interval");
    solve_cmd->add_option("--intervals", intervals, "forward intervals N")->check(CLI::PositiveNumber);
    solve_cmd->add_option("--steps", steps, "nodes per interval minus one")->check(CLI::PositiveNumber);
    solve_cmd->add_option("--scheme", scheme_text, "exact | rk4")->check(CLI::IsMember({"exact", "rk4"}));
    solve_cmd->add_option("--format", format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
    solve_cmd->add_option("--out", out_path, "write here instead of stdout");

    // mesh
    auto* mesh_cmd = app.add_subcommand("mesh", "delay mesh x_{-1} < x_0 < ... < x_n");
    std::string delay_text;
    double mesh_x0 = 0.0;
    int mesh_n = 0;
    std::string mesh_format = "json";
    mesh_cmd->add_option("--delay", delay_text, "constant(tau) | affine(q, tau) | qscale(q) | moebius(C) | general(\"g\")")
        ->required();
    mesh_cmd->add_option("--x0", mesh_x0, "x_0")->required();
    mesh_cmd->add_option("--n", mesh_n, "forward intervals")->required()->check(CLI::PositiveNumber);
    mesh_cmd->add_option("--format", mesh_format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
    mesh_cmd->add_option("--out", out_path, "write here instead of stdout");

    // roots
    auto* roots_cmd = app.add_subcommand("roots", "roots of e^z = 1 + z and lambda = -z/C");
    double roots_C = 0.0;
    int roots_k = 0;
    roots_cmd->add_option("--C", roots_C, "delay constant C > 0")->required();
    roots_cmd->add_option("--k", roots_k, "highest branch index")->required()->check(CLI::NonNegativeNumber);
    roots_cmd->add_option("--out", out_path, "write here instead of stdout");

    // reduce
    auto* reduce_cmd = app.add_subcommand("reduce", "invariant solutions of a case");
    detail::CaseOptions reduce_case;
    std::string subalgebra;
    detail::add_case_options(reduce_cmd, reduce_case, true);
    reduce_cmd->add_option("--subalgebra", subalgebra, "family label; all families when omitted");
    reduce_cmd->add_option("--out", out_path, "write here instead of stdout");

    // verify
    auto* verify_cmd = app.add_subcommand("verify", "residual of a candidate solution");
    detail::CaseOptions verify_case;
    std::string verify_spec, solution_text, solution_file;
    int samples = 50;
    std::optional<double> tol;
    auto* vspec = verify_cmd->add_option("--spec", verify_spec, "DODS spec file");
    detail::add_case_options(verify_cmd, verify_case, false);
    verify_cmd->get_option("--case")->excludes(vspec);
    auto* sol_opt = verify_cmd->add_option("--solution", solution_text, "closed form y(x)");
    verify_cmd->add_option("--solution-file", solution_file, "JSON written by solve")->excludes(sol_opt);
    verify_cmd->add_option("--samples", samples, "sample points for a closed form")->check(CLI::PositiveNumber);
    verify_cmd->add_option("--tol", tol, "pass threshold (default 1e-10 closed form, 1e-8 file)");
    verify_cmd->add_option("--out", out_path, "write here instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    auto emit = [&](const std::string& text) {
        if (out_path.empty()) out << text;
        else io::write_file(out_path, text);
    };
    auto emit_json = [&](const Json& j) { emit(j.dump(2) + "\n"); };
    auto load_dods = [&](const std::string& spec, const detail::CaseOptions& co) -> io::DodsSpec {
        if (!spec.empty()) return io::load_spec(spec);
        if (co.id.empty()) throw UsageError("one of --spec or --case is required");
        const auto [c, extra] = detail::make_case(co);
        detail::reject_extra(extra, c.id);
        return {catalog(c).dods, std::nullopt, std::nullopt};
    };

    try {
        if (command == "catalog") {
            if (cat->got_subcommand("list")) {
                Json cases = Json::array();
                for (const auto& d : list_cases()) cases.push_back(detail::case_json(d));
                emit_json({{"kind", "catalog"}, {"count", cases.size()}, {"cases", cases}});
            } else {
                const auto [c, extra] = detail::make_case(show_opts);
                detail::reject_extra(extra, c.id);
                emit_json(detail::show_json(c));
            }
        } else if (command == "solve") {
            io::DodsSpec spec = load_dods(spec_path, solve_case);
            if (!phi_text.empty()) spec.phi = parse(phi_text, {"x"});
            if (x0) spec.x0 = *x0;
            if (!spec.phi) throw UsageError("--phi is required");
            if (!spec.x0) throw UsageError("--x0 is required");
            SolverConfig cfg;
            cfg.scheme = scheme_text == "rk4" ? Scheme::RK4 : Scheme::ExactLinear;
            cfg.step_count = steps;
            const auto init = InitialCondition::make(*spec.phi, spec.dods.delay(), *spec.x0);
            const PiecewiseSolution s = solve(spec.dods, init, intervals, cfg);
            if (format == "csv") emit(io::solution_csv(s));
            else emit_json(io::solution_json(s, residual_scan(s, spec.dods)));
        } else if (command == "mesh") {
            const Mesh m = build_mesh(DelayRelation::parse_text(delay_text), mesh_x0, mesh_n);
            if (mesh_format == "csv") emit(io::mesh_csv(m));
            else emit_json(io::mesh_json(m));
        } else if (command == "roots") {
            emit_json(io::roots_json(char_roots(roots_C, roots_k)));
        } else if (command == "reduce") {
            const auto [c, given] = detail::make_case(reduce_case);
            const auto fams = families(c);
            if (!subalgebra.empty()) {
                emit_json(detail::reduce_json(find_family(fams, subalgebra), c, given));
            } else {
                Json results = Json::array();
                for (const auto& f : fams) results.push_back(detail::reduce_json(f, c, given));
                emit_json({{"kind", "reduce_all"}, {"case", c.id}, {"results", results}});
            }
        } else if (command == "verify") {
            if (solution_text.empty() == solution_file.empty())
                throw UsageError("exactly one of --solution or --solution-file is required");
            const io::DodsSpec spec = load_dods(verify_spec, verify_case);
            double r = 0.0, limit = 0.0;
            if (!solution_text.empty()) {
                r = verify(parse(solution_text, {"x"}), spec.dods, samples);
                limit = tol.value_or(1e-10);
            } else {
                r = residual_scan(io::load_solution(solution_file), spec.dods);
                limit = tol.value_or(1e-8);
            }
            const bool passed = r <= limit;
            emit_json({{"kind", "verify"},
                       {"source", solution_text.empty() ? "solution-file" : "expression"},
                       {"max_residual", r},
                       {"tol", limit},
                       {"passed", passed}});
            if (!passed) {
                err << "lindods verify: max residual " << lindods::detail::format_number(r) << " exceeds "
                    << lindods::detail::format_number(limit) << "\n";
                return 1;
            }
        }
    } catch (const UsageError& e) {
        err << "lindods " << command << ": " << e.what() << "\n"
            << app.get_subcommand(command)->help();
        return 2;
    } catch (const Error& e) {
        err << "lindods " << command << ": " << e.what() << "\n";
        return 1;
    }
    return 0;
}

inline int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
    return run(argc, const_cast<const char* const*>(argv), out, err);
}

} // namespace lindods::cli
