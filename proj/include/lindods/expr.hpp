#pragma once
// Expression trees over a handful of real variables: parsing, evaluation,
// printing and exact symbolic differentiation.
//
// Grammar (loosest to tightest binding):
//   sum     := product (('+' | '-') product)*
//   product := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' unary)?          right-associative
//   primary := number | constant | variable | func '(' sum ')' | '(' sum ')'
// so "-x^2" is -(x^2) and "2^-x" is 2^(-x).

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <initializer_list>
#include <memory>
#include <numbers>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lindods/errors.hpp"

namespace lindods {

enum class UnaryOp { Neg, Exp, Ln, Sin, Cos, Tan, Atan, Sqrt, Abs, Sign };
enum class BinaryOp { Add, Sub, Mul, Div, Pow };

/// Name -> value bindings for Expr::eval. Linear lookup; contexts hold at most a few variables.
class Bindings {
public:
    Bindings() = default;
    Bindings(std::initializer_list<std::pair<std::string_view, double>> init) {
        for (const auto& [name, value] : init) set(name, value);
    }

    void set(std::string_view name, double value) {
        for (auto& entry : entries_) {
            if (entry.first == name) {
                entry.second = value;
                return;
            }
        }
        entries_.emplace_back(std::string(name), value);
    }

    const double* find(std::string_view name) const {
        for (const auto& entry : entries_)
            if (entry.first == name) return &entry.second;
        return nullptr;
    }

private:
    std::vector<std::pair<std::string, double>> entries_;
};

namespace detail {

inline const char* unary_name(UnaryOp op) {
    switch (op) {
    case UnaryOp::Neg: return "-";
    case UnaryOp::Exp: return "exp";
    case UnaryOp::Ln: return "ln";
    case UnaryOp::Sin: return "sin";
    case UnaryOp::Cos: return "cos";
    case UnaryOp::Tan: return "tan";
    case UnaryOp::Atan: return "atan";
    case UnaryOp::Sqrt: return "sqrt";
    case UnaryOp::Abs: return "abs";
    case UnaryOp::Sign: return "sign";
    }
    return "?";
}

inline std::optional<UnaryOp> function_by_name(std::string_view name) {
    static constexpr std::pair<std::string_view, UnaryOp> table[] = {
        {"exp", UnaryOp::Exp},   {"ln", UnaryOp::Ln},     {"sin", UnaryOp::Sin},
        {"cos", UnaryOp::Cos},   {"tan", UnaryOp::Tan},   {"atan", UnaryOp::Atan},
        {"sqrt", UnaryOp::Sqrt}, {"abs", UnaryOp::Abs},   {"sign", UnaryOp::Sign},
    };
    for (const auto& [n, op] : table)
        if (n == name) return op;
    return std::nullopt;
}

/// Shortest decimal text that reads back to exactly `v`.
inline std::string format_number(double v) {
    char buf[40];
    for (int precision = 1; precision <= 17; ++precision) {
        std::snprintf(buf, sizeof buf, "%.*g", precision, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

} // namespace detail

/// Immutable expression tree. Copies share nodes.
class Expr {
public:
    enum class Kind { Number, Variable, Unary, Binary };

    struct Node {
        Kind kind = Kind::Number;
        double value = 0.0;
        std::string name;  // variable name, or "pi"/"e" for named constants
        UnaryOp uop = UnaryOp::Neg;
        BinaryOp bop = BinaryOp::Add;
        std::shared_ptr<const Node> lhs, rhs;
    };

    Expr() : Expr(number(0.0)) {}

    // Raw constructors: no simplification.
    static Expr number(double v) {
        if (!std::isfinite(v)) throw DomainError("non-finite literal");
        if (v < 0) return unary(UnaryOp::Neg, number(-v));
        auto n = std::make_shared<Node>();
        n->kind = Kind::Number;
        n->value = v == 0.0 ? 0.0 : v;
        return Expr(std::move(n));
    }
    static Expr constant(std::string_view symbol) {
        auto n = std::make_shared<Node>();
        n->kind = Kind::Number;
        n->name = std::string(symbol);
        n->value = symbol == "pi" ? std::numbers::pi : std::numbers::e;
        return Expr(std::move(n));
    }
    static Expr variable(std::string_view name) {
        auto n = std::make_shared<Node>();
        n->kind = Kind::Variable;
        n->name = std::string(name);
        return Expr(std::move(n));
    }
    static Expr unary(UnaryOp op, const Expr& arg) {
        auto n = std::make_shared<Node>();
        n->kind = Kind::Unary;
        n->uop = op;
        n->lhs = arg.node_;
        return Expr(std::move(n));
    }
    static Expr binary(BinaryOp op, const Expr& l, const Expr& r) {
        auto n = std::make_shared<Node>();
        n->kind = Kind::Binary;
        n->bop = op;
        n->lhs = l.node_;
        n->rhs = r.node_;
        return Expr(std::move(n));
    }

    const Node& node() const { return *node_; }
    Kind kind() const { return node_->kind; }
    Expr lhs() const { return Expr(node_->lhs); }
    Expr rhs() const { return Expr(node_->rhs); }

    /// Value of a literal or negated literal, nullopt otherwise.
    std::optional<double> literal() const {
        if (node_->kind == Kind::Number && node_->name.empty()) return node_->value;
        if (node_->kind == Kind::Unary && node_->uop == UnaryOp::Neg) {
            if (auto inner = lhs().literal()) return -*inner;
        }
        return std::nullopt;
    }
    bool is_literal(double v) const {
        auto l = literal();
        return l && *l == v;
    }

    double eval(const Bindings& bindings) const { return eval_node(*node_, bindings); }
    double eval() const { return eval(Bindings{}); }

    std::string to_string() const {
        std::string out;
        print(*node_, out);
        return out;
    }

    std::set<std::string> variables() const {
        std::set<std::string> out;
        collect(*node_, out);
        return out;
    }

    bool depends_on(std::string_view var) const { return mentions(*node_, var); }

    bool structurally_equal(const Expr& other) const { return same(*node_, *other.node_); }

    /// Replace variables by literal values.
    Expr substitute(const std::vector<std::pair<std::string, double>>& values) const {
        return Expr(subst(node_, values));
    }

private:
    explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}

    static double eval_node(const Node& n, const Bindings& b) {
        switch (n.kind) {
        case Kind::Number: return n.value;
        case Kind::Variable: {
            const double* v = b.find(n.name);
            if (!v) throw UnboundVariable(n.name);
            return *v;
        }
        case Kind::Unary: {
            const double a = eval_node(*n.lhs, b);
            double r = 0.0;
            switch (n.uop) {
            case UnaryOp::Neg: r = -a; break;
            case UnaryOp::Exp: r = std::exp(a); break;
            case UnaryOp::Ln:
                if (!(a > 0)) throw DomainError("ln of non-positive argument");
                r = std::log(a);
                break;
            case UnaryOp::Sin: r = std::sin(a); break;
            case UnaryOp::Cos: r = std::cos(a); break;
            case UnaryOp::Tan: r = std::tan(a); break;
            case UnaryOp::Atan: r = std::atan(a); break;
            case UnaryOp::Sqrt:
                if (a < 0) throw DomainError("sqrt of negative argument");
                r = std::sqrt(a);
                break;
            case UnaryOp::Abs: r = std::fabs(a); break;
            case UnaryOp::Sign: r = (a > 0) - (a < 0); break;
            }
            if (std::isnan(r)) throw DomainError(std::string(detail::unary_name(n.uop)) + " produced NaN");
            return r;
        }
        case Kind::Binary: {
            const double l = eval_node(*n.lhs, b);
            const double r = eval_node(*n.rhs, b);
            double out = 0.0;
            switch (n.bop) {
            case BinaryOp::Add: out = l + r; break;
            case BinaryOp::Sub: out = l - r; break;
            case BinaryOp::Mul: out = l * r; break;
            case BinaryOp::Div:
                if (r == 0.0) throw DomainError("division by zero");
                out = l / r;
                break;
            case BinaryOp::Pow:
                if (l == 0.0 && r < 0) throw DomainError("0 raised to a negative power");
                if (l < 0 && std::floor(r) != r)
                    throw DomainError("negative base with non-integer exponent");
                out = std::pow(l, r);
                break;
            }
            if (std::isnan(out)) throw DomainError("arithmetic produced NaN");
            return out;
        }
        }
        return 0.0;
    }

    // Binding strength used by the printer; mirrors the grammar above.
    static int precedence(const Node& n) {
        switch (n.kind) {
        case Kind::Number:
        case Kind::Variable: return 5;
        case Kind::Unary: return n.uop == UnaryOp::Neg ? 3 : 5;
        case Kind::Binary:
            switch (n.bop) {
            case BinaryOp::Add:
            case BinaryOp::Sub: return 1;
            case BinaryOp::Mul:
            case BinaryOp::Div: return 2;
            case BinaryOp::Pow: return 4;
            }
        }
        return 5;
    }

    static void print_at(const Node& n, int min_prec, std::string& out) {
        if (precedence(n) < min_prec) {
            out += '(';
            print(n, out);
            out += ')';
        } else {
            print(n, out);
        }
    }

    static void print(const Node& n, std::string& out) {
        switch (n.kind) {
        case Kind::Number:
            out += n.name.empty() ? detail::format_number(n.value) : n.name;
            return;
        case Kind::Variable: out += n.name; return;
        case Kind::Unary:
            if (n.uop == UnaryOp::Neg) {
                out += '-';
                print_at(*n.lhs, 3, out);
            } else {
                out += detail::unary_name(n.uop);
                out += '(';
                print(*n.lhs, out);
                out += ')';
            }
            return;
        case Kind::Binary:
            switch (n.bop) {
            case BinaryOp::Add:
            case BinaryOp::Sub:
                print_at(*n.lhs, 1, out);
                out += n.bop == BinaryOp::Add ? '+' : '-';
                print_at(*n.rhs, 2, out);
                return;
            case BinaryOp::Mul:
            case BinaryOp::Div:
                print_at(*n.lhs, 2, out);
                out += n.bop == BinaryOp::Mul ? '*' : '/';
                print_at(*n.rhs, 3, out);
                return;
            case BinaryOp::Pow:
                print_at(*n.lhs, 5, out);
                out += '^';
                print_at(*n.rhs, 3, out);
                return;
            }
        }
    }

    static void collect(const Node& n, std::set<std::string>& out) {
        if (n.kind == Kind::Variable) out.insert(n.name);
        if (n.lhs) collect(*n.lhs, out);
        if (n.rhs) collect(*n.rhs, out);
    }

    static bool mentions(const Node& n, std::string_view var) {
        if (n.kind == Kind::Variable) return n.name == var;
        return (n.lhs && mentions(*n.lhs, var)) || (n.rhs && mentions(*n.rhs, var));
    }

    static bool same(const Node& a, const Node& b) {
        if (a.kind != b.kind) return false;
        switch (a.kind) {
        case Kind::Number: return a.name == b.name && a.value == b.value;
        case Kind::Variable: return a.name == b.name;
        case Kind::Unary: return a.uop == b.uop && same(*a.lhs, *b.lhs);
        case Kind::Binary:
            return a.bop == b.bop && same(*a.lhs, *b.lhs) && same(*a.rhs, *b.rhs);
        }
        return false;
    }

    static std::shared_ptr<const Node> subst(const std::shared_ptr<const Node>& n,
                                             const std::vector<std::pair<std::string, double>>& values) {
        switch (n->kind) {
        case Kind::Number: return n;
        case Kind::Variable:
            for (const auto& [name, v] : values)
                if (name == n->name) return number(v).node_;
            return n;
        case Kind::Unary: {
            auto a = subst(n->lhs, values);
            if (a == n->lhs) return n;
            return unary(n->uop, Expr(a)).node_;
        }
        case Kind::Binary: {
            auto l = subst(n->lhs, values);
            auto r = subst(n->rhs, values);
            if (l == n->lhs && r == n->rhs) return n;
            return binary(n->bop, Expr(l), Expr(r)).node_;
        }
        }
        return n;
    }

    std::shared_ptr<const Node> node_;
};

// ---------------------------------------------------------------------------
// Simplifying builders. Only trivial identities and literal folding.

namespace build {

inline Expr num(double v) { return Expr::number(v); }

inline Expr neg(const Expr& a) {
    if (auto v = a.literal()) return Expr::number(-*v);
    if (a.kind() == Expr::Kind::Unary && a.node().uop == UnaryOp::Neg) return a.lhs();
    return Expr::unary(UnaryOp::Neg, a);
}
inline Expr add(const Expr& a, const Expr& b) {
    if (a.is_literal(0)) return b;
    if (b.is_literal(0)) return a;
    if (auto x = a.literal(), y = b.literal(); x && y) return Expr::number(*x + *y);
    return Expr::binary(BinaryOp::Add, a, b);
}
inline Expr sub(const Expr& a, const Expr& b) {
    if (b.is_literal(0)) return a;
    if (a.is_literal(0)) return neg(b);
    if (auto x = a.literal(), y = b.literal(); x && y) return Expr::number(*x - *y);
    return Expr::binary(BinaryOp::Sub, a, b);
}
inline Expr mul(const Expr& a, const Expr& b) {
    if (a.is_literal(0) || b.is_literal(0)) return num(0);
    if (a.is_literal(1)) return b;
    if (b.is_literal(1)) return a;
    if (auto x = a.literal(), y = b.literal(); x && y) return Expr::number(*x * *y);
    return Expr::binary(BinaryOp::Mul, a, b);
}
inline Expr div(const Expr& a, const Expr& b) {
    if (a.is_literal(0)) return num(0);
    if (b.is_literal(1)) return a;
    return Expr::binary(BinaryOp::Div, a, b);
}
inline Expr pow(const Expr& a, const Expr& b) {
    if (b.is_literal(0)) return num(1);
    if (b.is_literal(1)) return a;
    return Expr::binary(BinaryOp::Pow, a, b);
}
inline Expr fn(UnaryOp op, const Expr& a) { return Expr::unary(op, a); }

} // namespace build

/// Rebuilds e bottom-up through the builders, folding literal subtrees.
inline Expr simplify(const Expr& e) {
    using namespace build;
    auto fold = [](const Expr& candidate) {
        if (candidate.variables().empty() && !candidate.literal()) {
            try {
                return Expr::number(candidate.eval());
            } catch (const DomainError&) {
            }
        }
        return candidate;
    };
    switch (e.kind()) {
    case Expr::Kind::Number:
    case Expr::Kind::Variable: return e;
    case Expr::Kind::Unary: {
        const Expr a = simplify(e.lhs());
        return fold(e.node().uop == UnaryOp::Neg ? neg(a) : fn(e.node().uop, a));
    }
    case Expr::Kind::Binary: {
        const Expr a = simplify(e.lhs()), b = simplify(e.rhs());
        switch (e.node().bop) {
        case BinaryOp::Add: return fold(add(a, b));
        case BinaryOp::Sub: return fold(sub(a, b));
        case BinaryOp::Mul: return fold(mul(a, b));
        case BinaryOp::Div: return fold(div(a, b));
        case BinaryOp::Pow: return fold(pow(a, b));
        }
    }
    }
    return e;
}

// ---------------------------------------------------------------------------

namespace detail {

class Parser {
public:
    Parser(std::string_view text, const std::vector<std::string>& vars) : text_(text), vars_(vars) {}

    Expr run() {
        skip_ws();
        if (pos_ >= text_.size()) fail("empty expression");
        Expr e = sum();
        skip_ws();
        if (pos_ < text_.size()) {
            if (text_[pos_] == ')') fail("unbalanced ')'");
            fail(std::string("unexpected '") + text_[pos_] + "'");
        }
        return e;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const {
        std::size_t at = pos_;
        if (!text_.empty() && at >= text_.size()) at = text_.size() - 1;
        throw ParseError(at, msg);
    }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    Expr sum() {
        Expr e = product();
        for (;;) {
            if (accept('+')) e = Expr::binary(BinaryOp::Add, e, product());
            else if (accept('-')) e = Expr::binary(BinaryOp::Sub, e, product());
            else return e;
        }
    }

    Expr product() {
        Expr e = unary();
        for (;;) {
            if (accept('*')) e = Expr::binary(BinaryOp::Mul, e, unary());
            else if (accept('/')) e = Expr::binary(BinaryOp::Div, e, unary());
            else return e;
        }
    }

    Expr unary() {
        if (accept('-')) return Expr::unary(UnaryOp::Neg, unary());
        return power();
    }

    Expr power() {
        Expr base = primary();
        if (accept('^')) return Expr::binary(BinaryOp::Pow, base, unary());
        return base;
    }

    Expr primary() {
        skip_ws();
        if (pos_ >= text_.size()) fail("unexpected end of input");
        const char c = text_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return literal();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
        if (c == '(') {
            ++pos_;
            Expr e = sum();
            if (!accept(')')) fail("missing ')'");
            return e;
        }
        fail(std::string("unexpected '") + c + "'");
    }

    Expr literal() {
        const std::size_t start = pos_;
        auto digits = [&] {
            std::size_t n = 0;
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
                ++pos_;
                ++n;
            }
            return n;
        };
        std::size_t count = digits();
        if (pos_ < text_.size() && text_[pos_] == '.') {
            ++pos_;
            count += digits();
        }
        if (count == 0) {
            pos_ = start;
            fail("malformed number");
        }
        // Exponent only when a digit follows, so "2*e" style text keeps working.
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            std::size_t look = pos_ + 1;
            if (look < text_.size() && (text_[look] == '+' || text_[look] == '-')) ++look;
            if (look < text_.size() && std::isdigit(static_cast<unsigned char>(text_[look]))) {
                pos_ = look;
                digits();
            }
        }
        const std::string token(text_.substr(start, pos_ - start));
        return Expr::number(std::strtod(token.c_str(), nullptr));
    }

    Expr identifier() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            ++pos_;
        const std::string_view name = text_.substr(start, pos_ - start);
        if (auto op = function_by_name(name)) {
            if (!accept('(')) fail("expected '(' after " + std::string(name));
            Expr arg = sum();
            if (!accept(')')) fail("missing ')'");
            return Expr::unary(*op, arg);
        }
        if (name == "pi" || name == "e") return Expr::constant(name);
        for (const auto& v : vars_)
            if (v == name) return Expr::variable(name);
        pos_ = start;
        fail("unknown identifier '" + std::string(name) + "'");
    }

    std::string_view text_;
    const std::vector<std::string>& vars_;
    std::size_t pos_ = 0;
};

inline Expr derive(const Expr& e, std::string_view var) {
    using namespace build;
    switch (e.kind()) {
    case Expr::Kind::Number: return num(0);
    case Expr::Kind::Variable: return num(e.node().name == var ? 1 : 0);
    case Expr::Kind::Unary: {
        const Expr u = e.lhs();
        const Expr du = derive(u, var);
        switch (e.node().uop) {
        case UnaryOp::Neg: return neg(du);
        case UnaryOp::Exp: return mul(e, du);
        case UnaryOp::Ln: return div(du, u);
        case UnaryOp::Sin: return mul(fn(UnaryOp::Cos, u), du);
        case UnaryOp::Cos: return neg(mul(fn(UnaryOp::Sin, u), du));
        case UnaryOp::Tan: return div(du, pow(fn(UnaryOp::Cos, u), num(2)));
        case UnaryOp::Atan: return div(du, add(num(1), pow(u, num(2))));
        case UnaryOp::Sqrt: return div(du, mul(num(2), e));
        // Valid away from 0, where abs has a kink and sign a jump.
        case UnaryOp::Abs: return mul(fn(UnaryOp::Sign, u), du);
        case UnaryOp::Sign: return num(0);
        }
        return num(0);
    }
    case Expr::Kind::Binary: {
        const Expr u = e.lhs(), v = e.rhs();
        switch (e.node().bop) {
        case BinaryOp::Add: return add(derive(u, var), derive(v, var));
        case BinaryOp::Sub: return sub(derive(u, var), derive(v, var));
        case BinaryOp::Mul: return add(mul(derive(u, var), v), mul(u, derive(v, var)));
        case BinaryOp::Div:
            return div(sub(mul(derive(u, var), v), mul(u, derive(v, var))), pow(v, num(2)));
        case BinaryOp::Pow: {
            const bool base_varies = u.depends_on(var);
            const bool exp_varies = v.depends_on(var);
            if (!base_varies && !exp_varies) return num(0);
            if (!exp_varies) return mul(mul(v, pow(u, sub(v, num(1)))), derive(u, var));
            if (!base_varies) return mul(mul(e, fn(UnaryOp::Ln, u)), derive(v, var));
            return mul(e, add(mul(derive(v, var), fn(UnaryOp::Ln, u)),
                              div(mul(v, derive(u, var)), u)));
        }
        }
    }
    }
    return num(0);
}

} // namespace detail

/// Parse `text`; identifiers must be functions, the constants pi/e, or one of `variables`.
inline Expr parse(std::string_view text, const std::vector<std::string>& variables) {
    return detail::Parser(text, variables).run();
}

inline Expr differentiate(const Expr& e, std::string_view var) { return detail::derive(e, var); }

} // namespace lindods
