#pragma once

/**
 * A small expression language for Lagrangians, metric entries, coordinate
 * changes and curves.
 *
 * Grammar (precedence low to high):
 *   expr    := term (('+'|'-') term)*
 *   term    := factor (('*'|'/') factor)*
 *   factor  := '-' factor | power
 *   power   := atom ('^' exponent)?            right associative
 *   atom    := number | variable | func '(' expr ')' | '(' expr ')'
 *   func    := exp | log | sin | cos | sqrt
 *
 * Variables are x_1..x_n, y1_1..y1_n, y2_1..y2_n (1-based), plus the curve
 * parameter `t` where a caller enables it. Exponents must be numeric
 * constants (integer or real, possibly negated).
 */

#include <cctype>
#include <cmath>
#include <memory>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "t2geo/errors.hpp"
#include "t2geo/taylor.hpp"

namespace t2geo {

enum class VarClass { X, Y1, Y2, T };

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
    enum class Kind { Constant, Variable, Unary, Binary };
    enum class Func { Neg, Exp, Log, Sin, Cos, Sqrt };
    enum class BinOp { Add, Sub, Mul, Div, Pow };

    Kind kind;
    double cval = 0.0;            // Constant
    VarClass vclass = VarClass::X; // Variable
    int vindex = 0;               // Variable, 0-based
    Func func = Func::Neg;        // Unary
    BinOp op = BinOp::Add;        // Binary
    ExprPtr lhs, rhs;

    static ExprPtr constant(double v) {
        auto e = std::make_shared<Expr>();
        e->kind = Kind::Constant;
        e->cval = v;
        return e;
    }
    static ExprPtr variable(VarClass c, int idx) {
        auto e = std::make_shared<Expr>();
        e->kind = Kind::Variable;
        e->vclass = c;
        e->vindex = idx;
        return e;
    }
    static ExprPtr unary(Func f, ExprPtr a) {
        // Fold negation of a constant so parsed exponents like ^-2 stay constants.
        if (f == Func::Neg && a->kind == Kind::Constant) return constant(-a->cval);
        auto e = std::make_shared<Expr>();
        e->kind = Kind::Unary;
        e->func = f;
        e->lhs = std::move(a);
        return e;
    }
    static ExprPtr binary(BinOp o, ExprPtr a, ExprPtr b) {
        auto e = std::make_shared<Expr>();
        e->kind = Kind::Binary;
        e->op = o;
        e->lhs = std::move(a);
        e->rhs = std::move(b);
        return e;
    }
};

/// Variable bindings for evaluation; spans may be empty when a class is unused.
template <class S>
struct EvalVars {
    std::span<const S> x, y1, y2;
    const S* t = nullptr;
};

template <class S>
S eval(const Expr& e, const EvalVars<S>& v) {
    using std::cos;
    using std::exp;
    using std::log;
    using std::pow;
    using std::sin;
    using std::sqrt;
    switch (e.kind) {
        case Expr::Kind::Constant:
            if constexpr (std::is_same_v<S, double>) return e.cval;
            else {
                // Constants need a context; grab one from any bound variable.
                const S* any = v.t;
                if (!any && !v.x.empty()) any = &v.x[0];
                if (!any && !v.y1.empty()) any = &v.y1[0];
                if (!any && !v.y2.empty()) any = &v.y2[0];
                return S::constant(any->context(), e.cval);
            }
        case Expr::Kind::Variable:
            switch (e.vclass) {
                case VarClass::X: return v.x[e.vindex];
                case VarClass::Y1: return v.y1[e.vindex];
                case VarClass::Y2: return v.y2[e.vindex];
                case VarClass::T: return *v.t;
            }
            break;
        case Expr::Kind::Unary: {
            S a = eval(*e.lhs, v);
            switch (e.func) {
                case Expr::Func::Neg: return -a;
                case Expr::Func::Exp: return exp(a);
                case Expr::Func::Log:
                    if constexpr (std::is_same_v<S, double>) {
                        if (!(a > 0.0)) throw DomainError("log of a nonpositive value");
                    }
                    return log(a);
                case Expr::Func::Sin: return sin(a);
                case Expr::Func::Cos: return cos(a);
                case Expr::Func::Sqrt:
                    if constexpr (std::is_same_v<S, double>) {
                        if (!(a > 0.0)) throw DomainError("sqrt of a nonpositive value");
                    }
                    return sqrt(a);
            }
            break;
        }
        case Expr::Kind::Binary: {
            S a = eval(*e.lhs, v);
            if (e.op == Expr::BinOp::Pow) {
                const double p = e.rhs->cval;
                const double r = std::round(p);
                if constexpr (std::is_same_v<S, double>) {
                    if (std::abs(p - r) < 1e-12 && std::abs(r) < 64.0) {
                        double acc = 1.0;
                        double base = a;
                        int k = static_cast<int>(std::abs(r));
                        while (k-- > 0) acc *= base;
                        if (r < 0) {
                            if (acc == 0.0) throw DomainError("division by zero");
                            acc = 1.0 / acc;
                        }
                        return acc;
                    }
                    if (!(a > 0.0)) throw DomainError("fractional power of a nonpositive base");
                    return pow(a, p);
                } else {
                    return pow(a, p);
                }
            }
            S b = eval(*e.rhs, v);
            switch (e.op) {
                case Expr::BinOp::Add: return a + b;
                case Expr::BinOp::Sub: return a - b;
                case Expr::BinOp::Mul: return a * b;
                case Expr::BinOp::Div:
                    if constexpr (std::is_same_v<S, double>) {
                        if (b == 0.0) throw DomainError("division by zero");
                    }
                    return a / b;
                default: break;
            }
            break;
        }
    }
    throw std::logic_error("eval: malformed expression node");
}

/// Symbolic derivative with respect to one variable. No simplification
/// beyond dropping structurally-zero branches.
inline ExprPtr diff(const ExprPtr& e, VarClass cls, int idx) {
    using K = Expr::Kind;
    using F = Expr::Func;
    using B = Expr::BinOp;
    auto zero = []() { return Expr::constant(0.0); };
    auto is_zero = [](const ExprPtr& p) { return p->kind == K::Constant && p->cval == 0.0; };
    switch (e->kind) {
        case K::Constant: return zero();
        case K::Variable:
            return (e->vclass == cls && e->vindex == idx) ? Expr::constant(1.0) : zero();
        case K::Unary: {
            ExprPtr da = diff(e->lhs, cls, idx);
            if (is_zero(da)) return zero();
            switch (e->func) {
                case F::Neg: return Expr::unary(F::Neg, da);
                case F::Exp: return Expr::binary(B::Mul, e, da);
                case F::Log: return Expr::binary(B::Div, da, e->lhs);
                case F::Sin:
                    return Expr::binary(B::Mul, Expr::unary(F::Cos, e->lhs), da);
                case F::Cos:
                    return Expr::unary(F::Neg,
                                       Expr::binary(B::Mul, Expr::unary(F::Sin, e->lhs), da));
                case F::Sqrt:
                    return Expr::binary(B::Div, da,
                                        Expr::binary(B::Mul, Expr::constant(2.0), e));
            }
            break;
        }
        case K::Binary: {
            switch (e->op) {
                case B::Add: return Expr::binary(B::Add, diff(e->lhs, cls, idx), diff(e->rhs, cls, idx));
                case B::Sub: return Expr::binary(B::Sub, diff(e->lhs, cls, idx), diff(e->rhs, cls, idx));
                case B::Mul: {
                    ExprPtr da = diff(e->lhs, cls, idx), db = diff(e->rhs, cls, idx);
                    if (is_zero(da) && is_zero(db)) return zero();
                    if (is_zero(da)) return Expr::binary(B::Mul, e->lhs, db);
                    if (is_zero(db)) return Expr::binary(B::Mul, da, e->rhs);
                    return Expr::binary(B::Add, Expr::binary(B::Mul, da, e->rhs),
                                        Expr::binary(B::Mul, e->lhs, db));
                }
                case B::Div: {
                    ExprPtr da = diff(e->lhs, cls, idx), db = diff(e->rhs, cls, idx);
                    if (is_zero(db)) {
                        if (is_zero(da)) return zero();
                        return Expr::binary(B::Div, da, e->rhs);
                    }
                    // (a/b)' = a'/b - a b'/b^2
                    ExprPtr t1 = Expr::binary(B::Div, da, e->rhs);
                    ExprPtr t2 = Expr::binary(
                        B::Div, Expr::binary(B::Mul, e->lhs, db),
                        Expr::binary(B::Pow, e->rhs, Expr::constant(2.0)));
                    return Expr::binary(B::Sub, t1, t2);
                }
                case B::Pow: {
                    ExprPtr da = diff(e->lhs, cls, idx);
                    if (is_zero(da)) return zero();
                    const double p = e->rhs->cval;
                    // (u^p)' = p u^(p-1) u'
                    return Expr::binary(
                        B::Mul, Expr::constant(p),
                        Expr::binary(B::Mul,
                                     Expr::binary(B::Pow, e->lhs, Expr::constant(p - 1.0)), da));
                }
            }
            break;
        }
    }
    throw std::logic_error("diff: malformed expression node");
}

namespace detail {

class Parser {
public:
    Parser(std::string src, int n, bool allow_time)
        : src_(std::move(src)), n_(n), allow_time_(allow_time) {}

    ExprPtr run() {
        ExprPtr e = expr();
        skip_ws();
        if (pos_ != src_.size()) throw ParseError("unexpected trailing input", pos_);
        return e;
    }

private:
    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }
    bool eat(char c) {
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    char peek() {
        skip_ws();
        return pos_ < src_.size() ? src_[pos_] : '\0';
    }

    ExprPtr expr() {
        ExprPtr e = term();
        for (;;) {
            if (eat('+')) e = Expr::binary(Expr::BinOp::Add, e, term());
            else if (eat('-')) e = Expr::binary(Expr::BinOp::Sub, e, term());
            else return e;
        }
    }
    ExprPtr term() {
        ExprPtr e = factor();
        for (;;) {
            if (eat('*')) e = Expr::binary(Expr::BinOp::Mul, e, factor());
            else if (eat('/')) e = Expr::binary(Expr::BinOp::Div, e, factor());
            else return e;
        }
    }
    ExprPtr factor() {
        if (eat('-')) return Expr::unary(Expr::Func::Neg, factor());
        return power();
    }
    ExprPtr power() {
        ExprPtr base = atom();
        if (!eat('^')) return base;
        const std::size_t at = pos_;
        ExprPtr e = exponent_operand();
        if (e->kind != Expr::Kind::Constant)
            throw ParseError("exponent must be a numeric constant", at);
        return Expr::binary(Expr::BinOp::Pow, base, e);
    }
    // Exponent: an optionally negated number or parenthesized constant, or a
    // further ^ chain (right associative, must still fold to a constant).
    ExprPtr exponent_operand() {
        if (eat('-')) return Expr::unary(Expr::Func::Neg, exponent_operand());
        if (peek() == '(') {
            eat('(');
            ExprPtr e = exponent_operand();
            if (!eat(')')) throw ParseError("expected ')'", pos_);
            return e;
        }
        ExprPtr base = number();
        if (eat('^')) {
            ExprPtr e = exponent_operand();
            if (e->kind != Expr::Kind::Constant || base->kind != Expr::Kind::Constant)
                throw ParseError("exponent must be a numeric constant", pos_);
            return Expr::constant(std::pow(base->cval, e->cval));
        }
        return base;
    }
    ExprPtr atom() {
        skip_ws();
        if (pos_ >= src_.size()) throw ParseError("unexpected end of input", pos_);
        const char c = src_[pos_];
        if (c == '(') {
            ++pos_;
            ExprPtr e = expr();
            if (!eat(')')) throw ParseError("expected ')'", pos_);
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c))) return identifier();
        throw ParseError(std::string("unexpected character '") + c + "'", pos_);
    }
    ExprPtr number() {
        skip_ws();
        const std::size_t at = pos_;
        std::size_t used = 0;
        double v;
        try {
            v = std::stod(src_.substr(pos_), &used);
        } catch (const std::exception&) {
            throw ParseError("expected a number", at);
        }
        pos_ += used;
        return Expr::constant(v);
    }
    ExprPtr identifier() {
        skip_ws();
        const std::size_t at = pos_;
        std::size_t end = pos_;
        while (end < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[end])) || src_[end] == '_'))
            ++end;
        std::string name = src_.substr(pos_, end - pos_);
        pos_ = end;
        if (name == "exp" || name == "log" || name == "sin" || name == "cos" || name == "sqrt") {
            if (!eat('(')) throw ParseError("expected '(' after function name", pos_);
            ExprPtr a = expr();
            if (!eat(')')) throw ParseError("expected ')'", pos_);
            Expr::Func f = name == "exp"   ? Expr::Func::Exp
                           : name == "log" ? Expr::Func::Log
                           : name == "sin" ? Expr::Func::Sin
                           : name == "cos" ? Expr::Func::Cos
                                           : Expr::Func::Sqrt;
            return Expr::unary(f, a);
        }
        if (name == "t" && allow_time_) return Expr::variable(VarClass::T, 0);
        VarClass cls;
        std::size_t digits;
        if (name.rfind("x_", 0) == 0) {
            cls = VarClass::X;
            digits = 2;
        } else if (name.rfind("y1_", 0) == 0) {
            cls = VarClass::Y1;
            digits = 3;
        } else if (name.rfind("y2_", 0) == 0) {
            cls = VarClass::Y2;
            digits = 3;
        } else {
            throw ParseError("unknown identifier '" + name + "'", at);
        }
        const std::string tail = name.substr(digits);
        if (tail.empty() || tail.find_first_not_of("0123456789") != std::string::npos)
            throw ParseError("bad variable index in '" + name + "'", at);
        const int idx = std::stoi(tail);
        if (idx < 1 || idx > n_)
            throw IndexError("variable index out of range in '" + name + "'", at);
        return Expr::variable(cls, idx - 1);
    }

    std::string src_;
    int n_;
    bool allow_time_;
    std::size_t pos_ = 0;
};

} // namespace detail

inline ExprPtr parse_expression(const std::string& src, int n, bool allow_time = false) {
    return detail::Parser(src, n, allow_time).run();
}

/// Printable form that re-parses to the same tree.
inline std::string to_string(const Expr& e) {
    std::ostringstream os;
    auto num = [&os](double v) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        os << buf;
    };
    switch (e.kind) {
        case Expr::Kind::Constant:
            if (e.cval < 0) {
                os << "(";
                num(e.cval);
                os << ")";
            } else {
                num(e.cval);
            }
            break;
        case Expr::Kind::Variable:
            switch (e.vclass) {
                case VarClass::X: os << "x_" << (e.vindex + 1); break;
                case VarClass::Y1: os << "y1_" << (e.vindex + 1); break;
                case VarClass::Y2: os << "y2_" << (e.vindex + 1); break;
                case VarClass::T: os << "t"; break;
            }
            break;
        case Expr::Kind::Unary:
            switch (e.func) {
                case Expr::Func::Neg: os << "(-" << to_string(*e.lhs) << ")"; break;
                case Expr::Func::Exp: os << "exp(" << to_string(*e.lhs) << ")"; break;
                case Expr::Func::Log: os << "log(" << to_string(*e.lhs) << ")"; break;
                case Expr::Func::Sin: os << "sin(" << to_string(*e.lhs) << ")"; break;
                case Expr::Func::Cos: os << "cos(" << to_string(*e.lhs) << ")"; break;
                case Expr::Func::Sqrt: os << "sqrt(" << to_string(*e.lhs) << ")"; break;
            }
            break;
        case Expr::Kind::Binary: {
            const char* op = e.op == Expr::BinOp::Add   ? "+"
                             : e.op == Expr::BinOp::Sub ? "-"
                             : e.op == Expr::BinOp::Mul ? "*"
                             : e.op == Expr::BinOp::Div ? "/"
                                                        : "^";
            os << "(" << to_string(*e.lhs) << op << to_string(*e.rhs) << ")";
            break;
        }
    }
    return os.str();
}

inline bool structurally_equal(const Expr& a, const Expr& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
        case Expr::Kind::Constant: return a.cval == b.cval;
        case Expr::Kind::Variable: return a.vclass == b.vclass && a.vindex == b.vindex;
        case Expr::Kind::Unary: return a.func == b.func && structurally_equal(*a.lhs, *b.lhs);
        case Expr::Kind::Binary:
            return a.op == b.op && structurally_equal(*a.lhs, *b.lhs) &&
                   structurally_equal(*a.rhs, *b.rhs);
    }
    return false;
}

} // namespace t2geo
