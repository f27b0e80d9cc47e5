#pragma once
// DODS spec files, CSV and JSON emitters, JSON solution import.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "lindods/dods.hpp"
#include "lindods/errors.hpp"
#include "lindods/steps.hpp"
#include "lindods/symmetry.hpp"

namespace lindods::io {

using Json = nlohmann::ordered_json;

/// Contents of a DODS spec file. phi and x0 are optional.
struct DodsSpec {
    Dods dods;
    std::optional<Expr> phi;
    std::optional<double> x0;
};

namespace detail {

inline std::string trim(std::string s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.erase(s.begin());
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
    return s;
}

inline double parse_real(const std::string& text, const std::string& what) {
    const std::string t = trim(text);
    if (t == "inf" || t == "+inf") return INFINITY;
    if (t == "-inf") return -INFINITY;
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (t.empty() || *end != '\0' || std::isnan(v)) throw SpecFileError("bad number '" + t + "' for " + what);
    return v;
}

inline std::string unquote(const std::string& text, const std::string& key) {
    const std::string t = trim(text);
    if (t.size() < 2 || t.front() != '"' || t.back() != '"')
        throw SpecFileError(key + " expects a quoted expression");
    return t.substr(1, t.size() - 2);
}

inline Interval parse_domain(const std::string& text) {
    const std::string t = trim(text);
    const auto comma = t.find(',');
    if (t.size() < 5 || t.front() != '(' || t.back() != ')' || comma == std::string::npos)
        throw SpecFileError("domain expects (lo, hi)");
    Interval iv{parse_real(t.substr(1, comma - 1), "domain"), parse_real(t.substr(comma + 1, t.size() - comma - 2), "domain")};
    if (!(iv.lo < iv.hi)) throw SpecFileError("domain is empty");
    return iv;
}

} // namespace detail

/// Parses `key = value` lines; '#' starts a comment.
inline DodsSpec parse_spec(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        bool quoted = false;
        for (std::size_t i = 0; i < line.size(); ++i) {
            if (line[i] == '"') quoted = !quoted;
            if (line[i] == '#' && !quoted) {
                line.erase(i);
                break;
            }
        }
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw SpecFileError("line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = detail::trim(line.substr(0, eq));
        if (kv.count(key)) throw SpecFileError("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
        kv[key] = detail::trim(line.substr(eq + 1));
    }
    static const std::set<std::string> known{"rhs.kind", "alpha", "beta", "gamma", "f", "delay", "domain", "phi", "x0"};
    for (const auto& [k, v] : kv)
        if (!known.count(k)) throw SpecFileError("unknown key '" + k + "'");
    auto get = [&](const std::string& k) -> const std::string& {
        auto it = kv.find(k);
        if (it == kv.end()) throw SpecFileError("missing key '" + k + "'");
        return it->second;
    };

    const std::string kind = get("rhs.kind");
    DelayRelation delay = DelayRelation::parse_text(get("delay"));
    const Interval domain = kv.count("domain") ? detail::parse_domain(kv.at("domain")) : Interval{};
    auto coefficient = [&](const std::string& k, const char* fallback) {
        if (!kv.count(k) && fallback) return parse(fallback, coefficient_variables());
        return parse(detail::unquote(get(k), k), coefficient_variables());
    };

    std::optional<Dods> d;
    if (kind == "linear") {
        if (kv.count("f")) throw SpecFileError("a linear spec takes alpha, beta, gamma, not f");
        d.emplace(Dods::linear(coefficient("alpha", nullptr), coefficient("beta", nullptr), coefficient("gamma", "0"),
                               std::move(delay), domain));
    } else if (kind == "general") {
        for (const char* k : {"alpha", "beta", "gamma"})
            if (kv.count(k)) throw SpecFileError(std::string("a general spec takes f, not ") + k);
        d.emplace(Dods::general(parse(detail::unquote(get("f"), "f"), rhs_variables()), std::move(delay), domain));
    } else {
        throw SpecFileError("rhs.kind must be linear or general, got '" + kind + "'");
    }

    DodsSpec spec{std::move(*d), std::nullopt, std::nullopt};
    if (kv.count("phi")) spec.phi = parse(detail::unquote(kv.at("phi"), "phi"), {"x"});
    if (kv.count("x0")) spec.x0 = detail::parse_real(kv.at("x0"), "x0");
    return spec;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path + "'");
    out << text;
    if (!out) throw IoError("write failed for '" + path + "'");
}

inline DodsSpec load_spec(const std::string& path) { return parse_spec(read_file(path)); }

// ---------------------------------------------------------------------------
// CSV

inline std::string g17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// One row per node; mesh points appear once with both one-sided slopes.
inline std::string solution_csv(const PiecewiseSolution& s) {
    std::string out = "x,y,ydot_left,ydot_right\n";
    const auto& segs = s.segments();
    for (std::size_t k = 0; k < segs.size(); ++k) {
        const auto& nodes = segs[k].nodes;
        for (std::size_t i = k == 0 ? 0 : 1; i < nodes.size(); ++i) {
            const double x = nodes[i].x;
            const bool right_break = i + 1 == nodes.size() && k + 1 < segs.size();
            const double left = nodes[i].dy;
            const double right = right_break ? segs[k + 1].nodes.front().dy : nodes[i].dy;
            out += g17(x) + "," + g17(nodes[i].y) + "," + g17(left) + "," + g17(right) + "\n";
        }
    }
    return out;
}

inline std::string mesh_csv(const Mesh& m) {
    std::string out = "n,x\n";
    for (std::size_t i = 0; i < m.points.size(); ++i)
        out += std::to_string(static_cast<long>(i) - 1) + "," + g17(m.points[i]) + "\n";
    return out;
}

// ---------------------------------------------------------------------------
// JSON

inline Json solution_json(const PiecewiseSolution& s, double max_residual) {
    Json segs = Json::array();
    for (const auto& seg : s.segments()) {
        Json nodes = Json::array();
        for (const auto& n : seg.nodes) nodes.push_back({{"x", n.x}, {"y", n.y}, {"dy", n.dy}});
        segs.push_back({{"from", seg.from}, {"to", seg.to}, {"nodes", std::move(nodes)}});
    }
    return {{"kind", "solution"},
            {"delay", s.mesh().relation.to_string()},
            {"mesh", s.mesh().points},
            {"segments", std::move(segs)},
            {"max_residual", max_residual}};
}

inline Json mesh_json(const Mesh& m) {
    return {{"kind", "mesh"}, {"delay", m.relation.to_string()}, {"points", m.points}, {"defect", mesh_defect(m)}};
}

inline Json roots_json(const std::vector<CharacteristicRoot>& roots) {
    Json arr = Json::array();
    for (const auto& r : roots)
        arr.push_back({{"k", r.k},
                       {"re_z", r.z.real()},
                       {"im_z", r.z.imag()},
                       {"re_lambda", r.lambda.real()},
                       {"im_lambda", r.lambda.imag()},
                       {"residual", r.residual()}});
    return {{"kind", "roots"}, {"C", roots.empty() ? 0.0 : roots.front().C}, {"roots", std::move(arr)}};
}

/// Rebuilds a solution written by solution_json.
inline PiecewiseSolution solution_from_json(const Json& j) {
    try {
        if (j.at("kind") != "solution") throw IoError("expected a solution document");
        Mesh mesh{j.at("mesh").get<std::vector<double>>(), DelayRelation::parse_text(j.at("delay").get<std::string>())};
        std::vector<Segment> segs;
        for (const auto& s : j.at("segments")) {
            Segment seg{s.at("from").get<double>(), s.at("to").get<double>(), {}};
            for (const auto& n : s.at("nodes"))
                seg.nodes.push_back({n.at("x").get<double>(), n.at("y").get<double>(), n.at("dy").get<double>()});
            segs.push_back(std::move(seg));
        }
        return PiecewiseSolution(std::move(mesh), std::move(segs));
    } catch (const Json::exception& e) {
        throw IoError(std::string("malformed solution document: ") + e.what());
    }
}

inline PiecewiseSolution load_solution(const std::string& path) {
    Json j;
    try {
        j = Json::parse(read_file(path));
    } catch (const Json::parse_error& e) {
        throw IoError("'" + path + "' is not JSON: " + e.what());
    }
    return solution_from_json(j);
}

} // namespace lindods::io
