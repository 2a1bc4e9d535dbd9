#pragma once

// Closed-form coefficient expressions in x and y.
//
// Grammar (whitespace ignored):
//     expr    := term (('+' | '-') term)*
//     term    := unary (('*' | '/') unary)*
//     unary   := ('+' | '-') unary | power
//     power   := primary ('^' unary)?
//     primary := number | 'x' | 'y' | 'pi' | name '(' expr ')' | '(' expr ')'
//     name    := sin | cos | tan | atan | abs | exp | sqrt
//
// Expressions are immutable trees shared through std::shared_ptr; point
// evaluation goes through a compiled postfix program.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <memory>
#include <numbers>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "monodiff/error.hpp"

namespace monodiff {

enum class Op {
    Constant,
    VarX,
    VarY,
    Add,
    Sub,
    Mul,
    Div,
    Neg,
    Pow,
    Sin,
    Cos,
    Tan,
    Atan,
    Abs,
    Exp,
    Sqrt,
};

namespace detail {

struct ExprNode {
    Op op;
    double value = 0.0;
    std::shared_ptr<const ExprNode> lhs;
    std::shared_ptr<const ExprNode> rhs;
};

inline bool is_unary_function(Op op) {
    switch (op) {
        case Op::Sin:
        case Op::Cos:
        case Op::Tan:
        case Op::Atan:
        case Op::Abs:
        case Op::Exp:
        case Op::Sqrt:
            return true;
        default:
            return false;
    }
}

inline const char* function_name(Op op) {
    switch (op) {
        case Op::Sin: return "sin";
        case Op::Cos: return "cos";
        case Op::Tan: return "tan";
        case Op::Atan: return "atan";
        case Op::Abs: return "abs";
        case Op::Exp: return "exp";
        case Op::Sqrt: return "sqrt";
        default: return "?";
    }
}

inline double apply_unary(Op op, double v) {
    switch (op) {
        case Op::Neg: return -v;
        case Op::Sin: return std::sin(v);
        case Op::Cos: return std::cos(v);
        case Op::Tan: return std::tan(v);
        case Op::Atan: return std::atan(v);
        case Op::Abs: return std::fabs(v);
        case Op::Exp: return std::exp(v);
        case Op::Sqrt: return std::sqrt(v);
        default: return v;
    }
}

inline double apply_binary(Op op, double a, double b) {
    switch (op) {
        case Op::Add: return a + b;
        case Op::Sub: return a - b;
        case Op::Mul: return a * b;
        case Op::Div: return a / b;
        case Op::Pow: return std::pow(a, b);
        default: return 0.0;
    }
}

inline std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    std::string s(buf);
    // Prefer the shortest representation that round-trips.
    for (int digits = 1; digits < 17; ++digits) {
        std::snprintf(buf, sizeof buf, "%.*g", digits, v);
        if (std::strtod(buf, nullptr) == v) return buf;
    }
    return s;
}

}  // namespace detail

class Expr {
public:
    Expr() : Expr(constant(0.0)) {}

    static Expr constant(double v) { return Expr(make(Op::Constant, v)); }
    static Expr x() { return Expr(make(Op::VarX)); }
    static Expr y() { return Expr(make(Op::VarY)); }

    static Expr parse(std::string_view text);

    [[nodiscard]] Op op() const noexcept { return node_->op; }
    [[nodiscard]] bool is_constant() const noexcept { return node_->op == Op::Constant; }
    [[nodiscard]] bool is_constant(double v) const noexcept { return is_constant() && node_->value == v; }
    [[nodiscard]] double value() const noexcept { return node_->value; }
    [[nodiscard]] Expr lhs() const { return Expr(node_->lhs); }
    [[nodiscard]] Expr rhs() const { return Expr(node_->rhs); }

    /// Tree-walking evaluation; see CompiledExpr for repeated use.
    [[nodiscard]] double eval(double xv, double yv) const { return eval_node(*node_, xv, yv); }

    /// True when the tree contains no x or y.
    [[nodiscard]] bool is_closed() const { return closed(*node_); }

    [[nodiscard]] std::string to_string() const {
        std::string out;
        print(*node_, out, 0);
        return out;
    }

    friend Expr operator+(const Expr& a, const Expr& b);
    friend Expr operator-(const Expr& a, const Expr& b);
    friend Expr operator*(const Expr& a, const Expr& b);
    friend Expr operator/(const Expr& a, const Expr& b);
    friend Expr operator-(const Expr& a);
    friend Expr pow(const Expr& base, const Expr& exponent);
    friend Expr apply(Op fn, const Expr& arg);

private:
    using NodePtr = std::shared_ptr<const detail::ExprNode>;

    explicit Expr(NodePtr node) : node_(std::move(node)) {}

    static NodePtr make(Op op, double v = 0.0, NodePtr l = nullptr, NodePtr r = nullptr) {
        return std::make_shared<const detail::ExprNode>(detail::ExprNode{op, v, std::move(l), std::move(r)});
    }

    static double eval_node(const detail::ExprNode& n, double xv, double yv) {
        switch (n.op) {
            case Op::Constant: return n.value;
            case Op::VarX: return xv;
            case Op::VarY: return yv;
            case Op::Add:
            case Op::Sub:
            case Op::Mul:
            case Op::Div:
            case Op::Pow:
                return detail::apply_binary(n.op, eval_node(*n.lhs, xv, yv), eval_node(*n.rhs, xv, yv));
            default:
                return detail::apply_unary(n.op, eval_node(*n.lhs, xv, yv));
        }
    }

    static bool closed(const detail::ExprNode& n) {
        if (n.op == Op::VarX || n.op == Op::VarY) return false;
        if (n.lhs && !closed(*n.lhs)) return false;
        if (n.rhs && !closed(*n.rhs)) return false;
        return true;
    }

    static int precedence(Op op) {
        switch (op) {
            case Op::Add:
            case Op::Sub: return 1;
            case Op::Mul:
            case Op::Div: return 2;
            case Op::Neg: return 3;
            case Op::Pow: return 4;
            default: return 5;
        }
    }

    static void print(const detail::ExprNode& n, std::string& out, int parent_prec) {
        const int prec = precedence(n.op);
        const bool paren = prec < parent_prec;
        if (paren) out += '(';
        switch (n.op) {
            case Op::Constant: {
                const std::string s = detail::format_number(n.value);
                const bool neg = n.value < 0.0 && parent_prec > 1;
                if (neg) out += '(';
                out += s;
                if (neg) out += ')';
                break;
            }
            case Op::VarX: out += 'x'; break;
            case Op::VarY: out += 'y'; break;
            case Op::Add:
                print(*n.lhs, out, 1);
                out += " + ";
                print(*n.rhs, out, 2);
                break;
            case Op::Sub:
                print(*n.lhs, out, 1);
                out += " - ";
                print(*n.rhs, out, 2);
                break;
            case Op::Mul:
                print(*n.lhs, out, 2);
                out += '*';
                print(*n.rhs, out, 3);
                break;
            case Op::Div:
                print(*n.lhs, out, 2);
                out += '/';
                print(*n.rhs, out, 3);
                break;
            case Op::Neg:
                out += '-';
                print(*n.lhs, out, 3);
                break;
            case Op::Pow:
                print(*n.lhs, out, 5);
                out += '^';
                print(*n.rhs, out, 4);
                break;
            default:
                out += detail::function_name(n.op);
                out += '(';
                print(*n.lhs, out, 0);
                out += ')';
                break;
        }
        if (paren) out += ')';
    }

    NodePtr node_;

    friend class CompiledExpr;
    friend Expr differentiate(const Expr& e, char var);
};

// Smart constructors fold constants and drop neutral elements so that
// derivative trees stay small.

inline Expr operator+(const Expr& a, const Expr& b) {
    if (a.is_constant() && b.is_constant()) return Expr::constant(a.value() + b.value());
    if (a.is_constant(0.0)) return b;
    if (b.is_constant(0.0)) return a;
    return Expr(Expr::make(Op::Add, 0.0, a.node_, b.node_));
}

inline Expr operator-(const Expr& a, const Expr& b) {
    if (a.is_constant() && b.is_constant()) return Expr::constant(a.value() - b.value());
    if (b.is_constant(0.0)) return a;
    if (a.is_constant(0.0)) return -b;
    return Expr(Expr::make(Op::Sub, 0.0, a.node_, b.node_));
}

inline Expr operator*(const Expr& a, const Expr& b) {
    if (a.is_constant() && b.is_constant()) return Expr::constant(a.value() * b.value());
    if (a.is_constant(0.0) || b.is_constant(0.0)) return Expr::constant(0.0);
    if (a.is_constant(1.0)) return b;
    if (b.is_constant(1.0)) return a;
    if (a.is_constant(-1.0)) return -b;
    if (b.is_constant(-1.0)) return -a;
    return Expr(Expr::make(Op::Mul, 0.0, a.node_, b.node_));
}

inline Expr operator/(const Expr& a, const Expr& b) {
    if (a.is_constant() && b.is_constant() && b.value() != 0.0) return Expr::constant(a.value() / b.value());
    if (a.is_constant(0.0) && !b.is_constant(0.0)) return Expr::constant(0.0);
    if (b.is_constant(1.0)) return a;
    return Expr(Expr::make(Op::Div, 0.0, a.node_, b.node_));
}

inline Expr operator-(const Expr& a) {
    if (a.is_constant()) return Expr::constant(-a.value());
    if (a.op() == Op::Neg) return a.lhs();
    return Expr(Expr::make(Op::Neg, 0.0, a.node_));
}

inline Expr pow(const Expr& base, const Expr& exponent) {
    if (base.is_constant() && exponent.is_constant()) {
        return Expr::constant(std::pow(base.value(), exponent.value()));
    }
    if (exponent.is_constant(1.0)) return base;
    if (exponent.is_constant(0.0)) return Expr::constant(1.0);
    return Expr(Expr::make(Op::Pow, 0.0, base.node_, exponent.node_));
}

inline Expr apply(Op fn, const Expr& arg) {
    if (!detail::is_unary_function(fn)) throw ExpressionError("not a unary function");
    if (arg.is_constant()) return Expr::constant(detail::apply_unary(fn, arg.value()));
    return Expr(Expr::make(fn, 0.0, arg.node_));
}

inline Expr sin(const Expr& e) { return apply(Op::Sin, e); }
inline Expr cos(const Expr& e) { return apply(Op::Cos, e); }
inline Expr tan(const Expr& e) { return apply(Op::Tan, e); }
inline Expr atan(const Expr& e) { return apply(Op::Atan, e); }
inline Expr abs(const Expr& e) { return apply(Op::Abs, e); }
inline Expr exp(const Expr& e) { return apply(Op::Exp, e); }
inline Expr sqrt(const Expr& e) { return apply(Op::Sqrt, e); }

/// Symbolic partial derivative with respect to 'x' or 'y'.
///
/// abs() and powers with a non-constant exponent are rejected; everything
/// else in the grammar differentiates back into the grammar.
inline Expr differentiate(const Expr& e, char var) {
    if (var != 'x' && var != 'y') throw ExpressionError(std::string("unknown variable '") + var + "'");
    const auto d = [var](const Expr& sub) { return differentiate(sub, var); };
    switch (e.op()) {
        case Op::Constant: return Expr::constant(0.0);
        case Op::VarX: return Expr::constant(var == 'x' ? 1.0 : 0.0);
        case Op::VarY: return Expr::constant(var == 'y' ? 1.0 : 0.0);
        case Op::Add: return d(e.lhs()) + d(e.rhs());
        case Op::Sub: return d(e.lhs()) - d(e.rhs());
        case Op::Mul: return d(e.lhs()) * e.rhs() + e.lhs() * d(e.rhs());
        case Op::Div: {
            const Expr u = e.lhs();
            const Expr v = e.rhs();
            if (v.is_closed()) return d(u) / v;
            return (d(u) * v - u * d(v)) / (v * v);
        }
        case Op::Neg: return -d(e.lhs());
        case Op::Pow: {
            const Expr base = e.lhs();
            const Expr expo = e.rhs();
            if (!expo.is_closed()) {
                throw ExpressionError("cannot differentiate a power with a variable exponent: " + e.to_string());
            }
            const double p = expo.eval(0.0, 0.0);
            return Expr::constant(p) * pow(base, Expr::constant(p - 1.0)) * d(base);
        }
        case Op::Sin: return cos(e.lhs()) * d(e.lhs());
        case Op::Cos: return -(sin(e.lhs()) * d(e.lhs()));
        case Op::Tan: {
            const Expr t = tan(e.lhs());
            return (Expr::constant(1.0) + t * t) * d(e.lhs());
        }
        case Op::Atan: {
            const Expr u = e.lhs();
            return d(u) / (Expr::constant(1.0) + u * u);
        }
        case Op::Exp: return e * d(e.lhs());
        case Op::Sqrt: return d(e.lhs()) / (Expr::constant(2.0) * e);
        case Op::Abs:
            throw ExpressionError("abs() is not differentiable everywhere: " + e.to_string());
    }
    throw ExpressionError("unsupported expression node");
}

namespace detail {

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    Expr parse_all() {
        Expr e = parse_expr();
        skip_ws();
        if (pos_ != text_.size()) fail("unexpected trailing input");
        return e;
    }

private:
    [[noreturn]] void fail(const std::string& what) const {
        throw ExpressionError(what + " at position " + std::to_string(pos_) + " in '" + std::string(text_) + "'");
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

    Expr parse_expr() {
        Expr e = parse_term();
        for (;;) {
            if (accept('+')) {
                e = e + parse_term();
            } else if (accept('-')) {
                e = e - parse_term();
            } else {
                return e;
            }
        }
    }

    Expr parse_term() {
        Expr e = parse_unary();
        for (;;) {
            if (accept('*')) {
                e = e * parse_unary();
            } else if (accept('/')) {
                e = e / parse_unary();
            } else {
                return e;
            }
        }
    }

    Expr parse_unary() {
        if (accept('-')) return -parse_unary();
        if (accept('+')) return parse_unary();
        return parse_power();
    }

    Expr parse_power() {
        Expr base = parse_primary();
        if (accept('^')) return pow(base, parse_unary());
        return base;
    }

    Expr parse_primary() {
        skip_ws();
        if (pos_ >= text_.size()) fail("unexpected end of input");
        const char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            Expr e = parse_expr();
            if (!accept(')')) fail("expected ')'");
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c))) {
            const std::size_t start = pos_;
            while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
                ++pos_;
            }
            const std::string_view name = text_.substr(start, pos_ - start);
            if (name == "x") return Expr::x();
            if (name == "y") return Expr::y();
            if (name == "pi") return Expr::constant(std::numbers::pi);
            const Op fn = function_op(name);
            if (!accept('(')) fail("expected '(' after " + std::string(name));
            Expr arg = parse_expr();
            if (!accept(')')) fail("expected ')'");
            return apply(fn, arg);
        }
        fail(std::string("unexpected character '") + c + "'");
    }

    Expr parse_number() {
        const char* begin = text_.data() + pos_;
        char* end = nullptr;
        const std::string buf(begin, text_.size() - pos_);
        const double v = std::strtod(buf.c_str(), &end);
        const std::size_t used = static_cast<std::size_t>(end - buf.c_str());
        if (used == 0) fail("malformed number");
        pos_ += used;
        return Expr::constant(v);
    }

    Op function_op(std::string_view name) const {
        if (name == "sin") return Op::Sin;
        if (name == "cos") return Op::Cos;
        if (name == "tan") return Op::Tan;
        if (name == "atan") return Op::Atan;
        if (name == "abs") return Op::Abs;
        if (name == "exp") return Op::Exp;
        if (name == "sqrt") return Op::Sqrt;
        fail("unknown identifier '" + std::string(name) + "'");
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

}  // namespace detail

inline Expr Expr::parse(std::string_view text) { return detail::Parser(text).parse_all(); }

/// Flat postfix form of an Expr for fast repeated point evaluation.
class CompiledExpr {
public:
    CompiledExpr() : CompiledExpr(Expr::constant(0.0)) {}

    explicit CompiledExpr(const Expr& e) {
        int depth = 0;
        emit(*e.node_, depth);
    }

    [[nodiscard]] double operator()(double xv, double yv) const {
        if (code_.size() == 1) return fetch(code_.front(), xv, yv);
        double stack_buf[kMaxStack] = {};
        std::vector<double> heap;
        double* stack = stack_buf;
        if (max_depth_ > kMaxStack) {
            heap.resize(static_cast<std::size_t>(max_depth_));
            stack = heap.data();
        }
        int top = -1;
        for (const Instr& in : code_) {
            switch (in.op) {
                case Op::Constant:
                case Op::VarX:
                case Op::VarY:
                    stack[++top] = fetch(in, xv, yv);
                    break;
                case Op::Add:
                case Op::Sub:
                case Op::Mul:
                case Op::Div:
                case Op::Pow: {
                    const double r = stack[top--];
                    stack[top] = detail::apply_binary(in.op, stack[top], r);
                    break;
                }
                default:
                    stack[top] = detail::apply_unary(in.op, stack[top]);
                    break;
            }
        }
        return stack[0];
    }

private:
    struct Instr {
        Op op;
        double value;
    };
    static constexpr int kMaxStack = 64;

    static double fetch(const Instr& in, double xv, double yv) {
        return in.op == Op::VarX ? xv : (in.op == Op::VarY ? yv : in.value);
    }

    void emit(const detail::ExprNode& n, int& depth) {
        switch (n.op) {
            case Op::Constant:
            case Op::VarX:
            case Op::VarY:
                code_.push_back({n.op, n.value});
                max_depth_ = std::max(max_depth_, ++depth);
                return;
            case Op::Add:
            case Op::Sub:
            case Op::Mul:
            case Op::Div:
            case Op::Pow:
                emit(*n.lhs, depth);
                emit(*n.rhs, depth);
                code_.push_back({n.op, 0.0});
                --depth;
                return;
            default:
                emit(*n.lhs, depth);
                code_.push_back({n.op, 0.0});
                return;
        }
    }

    std::vector<Instr> code_;
    int max_depth_ = 0;
};

}  // namespace monodiff
