#pragma once

// Symbolic expression trees over the coordinates (t, x, y, z) with exact
// differentiation, light simplification and double-precision evaluation.
//
// Grammar accepted by parse_expr:
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := atom ('^' atom)?
//   atom   := number | ident | func '(' expr ')' | '(' expr ')' | '-' atom
//   func   := sin|cos|exp|ln|sqrt ; ident := t|x|y|z ; number := decimal literal

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>

namespace helis {

enum class Var : int { t = 0, x = 1, y = 2, z = 3 };

constexpr const char* var_name(Var v) {
    constexpr const char* names[4] = {"t", "x", "y", "z"};
    return names[static_cast<int>(v)];
}

struct Point4 {
    double t = 0, x = 0, y = 0, z = 0;
    double operator[](int i) const {
        switch (i) {
            case 0: return t;
            case 1: return x;
            case 2: return y;
            default: return z;
        }
    }
};

struct ParseError : std::runtime_error {
    std::size_t pos;
    ParseError(const std::string& msg, std::size_t p)
        : std::runtime_error(msg + " at position " + std::to_string(p)), pos(p) {}
};

struct EvalError : std::runtime_error {
    std::string subexpr;
    Point4 at;
    EvalError(const std::string& msg, std::string sub, Point4 p)
        : std::runtime_error(msg + " in \"" + sub + "\" at (t,x,y,z)=(" + std::to_string(p.t) +
                             "," + std::to_string(p.x) + "," + std::to_string(p.y) + "," +
                             std::to_string(p.z) + ")"),
          subexpr(std::move(sub)), at(p) {}
};

class Expr;
namespace detail {

enum class Op : std::uint8_t {
    Constant, Variable,
    Neg, Sin, Cos, Exp, Ln, Sqrt,
    Add, Sub, Mul, Div, Pow
};

struct Node {
    Op op;
    double value = 0;  // Constant payload
    int var = 0;       // Variable payload
    std::shared_ptr<const Node> a, b;
};

using NodePtr = std::shared_ptr<const Node>;

inline NodePtr make_const(double v) {
    auto n = std::make_shared<Node>();
    n->op = Op::Constant;
    n->value = v == 0 ? 0.0 : v;  // normalise -0
    return n;
}

inline NodePtr make_var(int v) {
    auto n = std::make_shared<Node>();
    n->op = Op::Variable;
    n->var = v;
    return n;
}

inline NodePtr make_node(Op op, NodePtr a, NodePtr b = nullptr) {
    auto n = std::make_shared<Node>();
    n->op = op;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
}

inline bool is_const(const NodePtr& n, double v) {
    return n->op == Op::Constant && n->value == v;
}

inline bool equal(const Node* a, const Node* b) {
    if (a == b) return true;
    if (a->op != b->op) return false;
    switch (a->op) {
        case Op::Constant: return a->value == b->value;
        case Op::Variable: return a->var == b->var;
        default:
            if (!equal(a->a.get(), b->a.get())) return false;
            if (a->b || b->b) return a->b && b->b && equal(a->b.get(), b->b.get());
            return true;
    }
}

// Smart constructors: constant folding, 0/1 elimination, x-x -> 0, 0*e -> 0.
// Anything beyond that is left alone; numeric residuals carry correctness.

NodePtr add(NodePtr a, NodePtr b);
NodePtr sub(NodePtr a, NodePtr b);
NodePtr mul(NodePtr a, NodePtr b);
NodePtr divide(NodePtr a, NodePtr b);
NodePtr pow_(NodePtr a, NodePtr b);
NodePtr unary(Op op, NodePtr a);

inline NodePtr add(NodePtr a, NodePtr b) {
    if (a->op == Op::Constant && b->op == Op::Constant) return make_const(a->value + b->value);
    if (is_const(a, 0)) return b;
    if (is_const(b, 0)) return a;
    return make_node(Op::Add, std::move(a), std::move(b));
}

inline NodePtr unary(Op op, NodePtr a) {
    if (a->op == Op::Constant) {
        const double v = a->value;
        switch (op) {
            case Op::Neg: return make_const(-v);
            case Op::Sin: return make_const(std::sin(v));
            case Op::Cos: return make_const(std::cos(v));
            case Op::Exp: return make_const(std::exp(v));
            case Op::Ln:
                if (v > 0) return make_const(std::log(v));
                break;
            case Op::Sqrt:
                if (v >= 0) return make_const(std::sqrt(v));
                break;
            default: break;
        }
    }
    if (op == Op::Neg && a->op == Op::Neg) return a->a;
    if (op == Op::Neg && a->op == Op::Mul && a->a->op == Op::Constant) {
        const double nc = -a->a->value;
        return nc == 1 ? a->b : make_node(Op::Mul, make_const(nc), a->b);
    }
    return make_node(op, std::move(a));
}

inline NodePtr sub(NodePtr a, NodePtr b) {
    if (a->op == Op::Constant && b->op == Op::Constant) return make_const(a->value - b->value);
    if (is_const(b, 0)) return a;
    if (is_const(a, 0)) return unary(Op::Neg, std::move(b));
    if (equal(a.get(), b.get())) return make_const(0);
    return make_node(Op::Sub, std::move(a), std::move(b));
}

inline NodePtr mul(NodePtr a, NodePtr b) {
    if (a->op == Op::Constant && b->op == Op::Constant) return make_const(a->value * b->value);
    if (is_const(a, 0) || is_const(b, 0)) return make_const(0);
    if (is_const(a, 1)) return b;
    if (is_const(b, 1)) return a;
    if (is_const(a, -1)) return unary(Op::Neg, std::move(b));
    if (is_const(b, -1)) return unary(Op::Neg, std::move(a));
    return make_node(Op::Mul, std::move(a), std::move(b));
}

inline NodePtr divide(NodePtr a, NodePtr b) {
    if (a->op == Op::Constant && b->op == Op::Constant && b->value != 0)
        return make_const(a->value / b->value);
    if (is_const(b, 1)) return a;
    return make_node(Op::Div, std::move(a), std::move(b));
}

inline NodePtr pow_(NodePtr a, NodePtr b) {
    if (is_const(b, 1)) return a;
    if (is_const(b, 0)) return make_const(1);
    if (a->op == Op::Constant && b->op == Op::Constant) {
        const double v = std::pow(a->value, b->value);
        if (std::isfinite(v)) return make_const(v);
    }
    return make_node(Op::Pow, std::move(a), std::move(b));
}

int precedence(Op op);
void print(const Node* n, std::string& out, int parent_level);

inline int precedence(Op op) {
    switch (op) {
        case Op::Add: case Op::Sub: return 1;
        case Op::Mul: case Op::Div: return 2;
        case Op::Pow: return 3;
        case Op::Neg: return 4;
        default: return 5;
    }
}

inline void print(const Node* n, std::string& out, int parent_level) {
    const int level = precedence(n->op);
    const bool parens = level < parent_level;
    if (parens) out += '(';
    switch (n->op) {
        case Op::Constant: {
            char buf[40];
            std::snprintf(buf, sizeof buf, "%.17g", n->value);
            out += buf;
            break;
        }
        case Op::Variable: out += var_name(static_cast<Var>(n->var)); break;
        case Op::Neg:
            out += '-';
            print(n->a.get(), out, 4);
            break;
        case Op::Sin: case Op::Cos: case Op::Exp: case Op::Ln: case Op::Sqrt: {
            switch (n->op) {
                case Op::Sin: out += "sin"; break;
                case Op::Cos: out += "cos"; break;
                case Op::Exp: out += "exp"; break;
                case Op::Ln: out += "ln"; break;
                default: out += "sqrt"; break;
            }
            out += '(';
            print(n->a.get(), out, 0);
            out += ')';
            break;
        }
        case Op::Add: case Op::Sub: case Op::Mul: case Op::Div: case Op::Pow: {
            const char* sym = n->op == Op::Add ? "+" : n->op == Op::Sub ? "-"
                            : n->op == Op::Mul ? "*" : n->op == Op::Div ? "/" : "^";
            // '-' and '/' do not associate; '^' takes atoms on both sides.
            const int left_min = n->op == Op::Pow ? 4 : level;
            const int right_min = n->op == Op::Pow ? 4 : level + 1;
            print(n->a.get(), out, left_min);
            out += sym;
            print(n->b.get(), out, right_min);
            break;
        }
    }
    if (parens) out += ')';
}

inline double eval_node(const Node* n, const Point4& p);

inline void domain_fail(const char* msg, const Node* n, const Point4& p) {
    std::string s;
    print(n, s, 0);
    throw EvalError(msg, s, p);
}

inline double eval_node(const Node* n, const Point4& p) {
    switch (n->op) {
        case Op::Constant: return n->value;
        case Op::Variable: return p[n->var];
        case Op::Neg: return -eval_node(n->a.get(), p);
        case Op::Sin: return std::sin(eval_node(n->a.get(), p));
        case Op::Cos: return std::cos(eval_node(n->a.get(), p));
        case Op::Exp: {
            const double v = std::exp(eval_node(n->a.get(), p));
            if (!std::isfinite(v)) domain_fail("exp overflow", n, p);
            return v;
        }
        case Op::Ln: {
            const double v = eval_node(n->a.get(), p);
            if (v <= 0) domain_fail("ln of non-positive value", n, p);
            return std::log(v);
        }
        case Op::Sqrt: {
            const double v = eval_node(n->a.get(), p);
            if (v < 0) domain_fail("sqrt of negative value", n, p);
            return std::sqrt(v);
        }
        case Op::Add: return eval_node(n->a.get(), p) + eval_node(n->b.get(), p);
        case Op::Sub: return eval_node(n->a.get(), p) - eval_node(n->b.get(), p);
        case Op::Mul: return eval_node(n->a.get(), p) * eval_node(n->b.get(), p);
        case Op::Div: {
            const double den = eval_node(n->b.get(), p);
            if (den == 0) domain_fail("division by zero", n, p);
            return eval_node(n->a.get(), p) / den;
        }
        case Op::Pow: {
            const double base = eval_node(n->a.get(), p);
            const double expo = eval_node(n->b.get(), p);
            if (base < 0 && expo != std::floor(expo))
                domain_fail("non-integer power of negative base", n, p);
            const double v = std::pow(base, expo);
            if (!std::isfinite(v)) domain_fail("pow overflow or 0^negative", n, p);
            return v;
        }
    }
    return 0;  // unreachable
}

}  // namespace detail

// Immutable, shareable expression handle.  All operators build new trees; the
// light normalisation in the smart constructors keeps derivative output sane.
class Expr {
public:
    Expr() : node_(detail::make_const(0)) {}
    Expr(double v) : node_(detail::make_const(v)) {}
    explicit Expr(Var v) : node_(detail::make_var(static_cast<int>(v))) {}

    static Expr constant(double v) { return Expr(detail::make_const(v)); }
    static Expr var(Var v) { return Expr(v); }

    bool is_zero() const { return detail::is_const(node_, 0); }
    bool is_constant() const { return node_->op == detail::Op::Constant; }
    double constant_value() const { return node_->value; }

    friend Expr operator+(const Expr& a, const Expr& b) { return Expr(detail::add(a.node_, b.node_)); }
    friend Expr operator-(const Expr& a, const Expr& b) { return Expr(detail::sub(a.node_, b.node_)); }
    friend Expr operator*(const Expr& a, const Expr& b) { return Expr(detail::mul(a.node_, b.node_)); }
    friend Expr operator/(const Expr& a, const Expr& b) { return Expr(detail::divide(a.node_, b.node_)); }
    friend Expr operator-(const Expr& a) { return Expr(detail::unary(detail::Op::Neg, a.node_)); }

    Expr& operator+=(const Expr& o) { return *this = *this + o; }
    Expr& operator-=(const Expr& o) { return *this = *this - o; }
    Expr& operator*=(const Expr& o) { return *this = *this * o; }

    friend bool struct_equal(const Expr& a, const Expr& b) {
        return detail::equal(a.node_.get(), b.node_.get());
    }

    const detail::NodePtr& node() const { return node_; }
    explicit Expr(detail::NodePtr n) : node_(std::move(n)) {}

private:
    detail::NodePtr node_;
};

inline Expr sin(const Expr& e) { return Expr(detail::unary(detail::Op::Sin, e.node())); }
inline Expr cos(const Expr& e) { return Expr(detail::unary(detail::Op::Cos, e.node())); }
inline Expr exp(const Expr& e) { return Expr(detail::unary(detail::Op::Exp, e.node())); }
inline Expr ln(const Expr& e) { return Expr(detail::unary(detail::Op::Ln, e.node())); }
inline Expr sqrt(const Expr& e) { return Expr(detail::unary(detail::Op::Sqrt, e.node())); }
inline Expr pow(const Expr& e, const Expr& k) { return Expr(detail::pow_(e.node(), k.node())); }
inline Expr pow(const Expr& e, double k) { return pow(e, Expr(k)); }

inline double eval(const Expr& e, const Point4& p) { return detail::eval_node(e.node().get(), p); }

inline std::string to_string(const Expr& e) {
    std::string out;
    detail::print(e.node().get(), out, 0);
    return out;
}

// Exact symbolic derivative; total on all expressions.
inline Expr diff(const Expr& e, Var v) {
    using namespace detail;
    const Node* n = e.node().get();
    const auto d = [v](const NodePtr& c) { return diff(Expr(c), v); };
    switch (n->op) {
        case Op::Constant: return Expr(0.0);
        case Op::Variable: return Expr(n->var == static_cast<int>(v) ? 1.0 : 0.0);
        case Op::Neg: return -d(n->a);
        case Op::Sin: return cos(Expr(n->a)) * d(n->a);
        case Op::Cos: return -(sin(Expr(n->a)) * d(n->a));
        case Op::Exp: return exp(Expr(n->a)) * d(n->a);
        case Op::Ln: return d(n->a) / Expr(n->a);
        case Op::Sqrt: return d(n->a) / (Expr(2.0) * sqrt(Expr(n->a)));
        case Op::Add: return d(n->a) + d(n->b);
        case Op::Sub: return d(n->a) - d(n->b);
        case Op::Mul: return d(n->a) * Expr(n->b) + Expr(n->a) * d(n->b);
        case Op::Div:
            return (d(n->a) * Expr(n->b) - Expr(n->a) * d(n->b)) / pow(Expr(n->b), 2.0);
        case Op::Pow: {
            // Exponents are constant by construction (see parser).
            const Expr base(n->a), expo(n->b);
            return expo * pow(base, expo - Expr(1.0)) * d(n->a);
        }
    }
    return Expr(0.0);
}

// Rebuild bottom-up through the smart constructors.
inline Expr simplify(const Expr& e) {
    using namespace detail;
    const Node* n = e.node().get();
    switch (n->op) {
        case Op::Constant: case Op::Variable: return e;
        case Op::Neg: return -simplify(Expr(n->a));
        case Op::Sin: return sin(simplify(Expr(n->a)));
        case Op::Cos: return cos(simplify(Expr(n->a)));
        case Op::Exp: return exp(simplify(Expr(n->a)));
        case Op::Ln: return ln(simplify(Expr(n->a)));
        case Op::Sqrt: return sqrt(simplify(Expr(n->a)));
        case Op::Add: return simplify(Expr(n->a)) + simplify(Expr(n->b));
        case Op::Sub: return simplify(Expr(n->a)) - simplify(Expr(n->b));
        case Op::Mul: return simplify(Expr(n->a)) * simplify(Expr(n->b));
        case Op::Div: return simplify(Expr(n->a)) / simplify(Expr(n->b));
        case Op::Pow: return pow(simplify(Expr(n->a)), simplify(Expr(n->b)));
    }
    return e;
}

namespace detail {

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    Expr parse() {
        Expr e = expression();
        skip_ws();
        if (pos_ != text_.size()) fail("unexpected trailing input");
        return e;
    }

private:
    std::string_view text_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, pos_); }

    void skip_ws() {
        while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t')) ++pos_;
    }

    char peek() {
        skip_ws();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    bool accept(char c) {
        if (peek() == c) { ++pos_; return true; }
        return false;
    }

    Expr expression() {
        Expr e = term();
        for (;;) {
            if (accept('+')) e = e + term();
            else if (accept('-')) e = e - term();
            else return e;
        }
    }

    Expr term() {
        Expr e = factor();
        for (;;) {
            if (accept('*')) e = e * factor();
            else if (accept('/')) e = e / factor();
            else return e;
        }
    }

    Expr factor() {
        Expr base = atom();
        if (accept('^')) {
            const std::size_t at = pos_;
            Expr expo = atom();
            if (!expo.is_constant()) throw ParseError("exponent must be a constant", at);
            return pow(base, expo);
        }
        return base;
    }

    Expr atom() {
        const char c = peek();
        if (c == '-') { ++pos_; return -atom(); }
        if (c == '(') {
            ++pos_;
            Expr e = expression();
            if (!accept(')')) fail("expected ')'");
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c))) return identifier();
        fail("expected expression");
    }

    Expr number() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        if (pos_ < text_.size() && text_[pos_] == '.') {
            ++pos_;
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        }
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            std::size_t mark = pos_++;
            if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
            if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
                while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
            } else {
                pos_ = mark;  // 'e' belonged to something else; not ours
            }
        }
        const std::string tok(text_.substr(start, pos_ - start));
        try {
            return Expr(std::stod(tok));
        } catch (const std::exception&) {
            throw ParseError("malformed number \"" + tok + "\"", start);
        }
    }

    Expr identifier() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() && std::isalpha(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        const std::string name(text_.substr(start, pos_ - start));
        if (name == "t") return Expr(Var::t);
        if (name == "x") return Expr(Var::x);
        if (name == "y") return Expr(Var::y);
        if (name == "z") return Expr(Var::z);
        const bool fn = name == "sin" || name == "cos" || name == "exp" || name == "ln" || name == "sqrt";
        if (!fn) throw ParseError("unknown identifier \"" + name + "\"", start);
        if (!accept('(')) fail("expected '(' after function name");
        Expr arg = expression();
        if (!accept(')')) fail("expected ')'");
        if (name == "sin") return sin(arg);
        if (name == "cos") return cos(arg);
        if (name == "exp") return exp(arg);
        if (name == "ln") return ln(arg);
        return sqrt(arg);
    }
};

}  // namespace detail

inline Expr parse_expr(std::string_view text) { return detail::Parser(text).parse(); }

}  // namespace helis
