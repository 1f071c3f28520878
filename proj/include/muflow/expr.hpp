#pragma once

// Initial-condition expressions: arithmetic over the variable x with
// constants (including pi), operators + - * / ^ and the functions
// sin, cos, exp, abs.
//
// Grammar:
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := base ('^' factor)?
//   base   := number | 'x' | 'pi' | ident '(' expr ')' | '(' expr ')' | '-' base

#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "muflow/errors.hpp"
#include "muflow/grid.hpp"

namespace muflow {

class Expression {
public:
    static Expression parse(std::string_view src);

    double eval(double x) const {
        scratch_.resize(nodes_.size());
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            const Node& nd = nodes_[i];
            double* s = scratch_.data();
            switch (nd.kind) {
                case Kind::Num: s[i] = nd.num; break;
                case Kind::Var: s[i] = x; break;
                case Kind::Add: s[i] = s[nd.a] + s[nd.b]; break;
                case Kind::Sub: s[i] = s[nd.a] - s[nd.b]; break;
                case Kind::Mul: s[i] = s[nd.a] * s[nd.b]; break;
                case Kind::Div: s[i] = s[nd.a] / s[nd.b]; break;
                case Kind::Pow: s[i] = std::pow(s[nd.a], s[nd.b]); break;
                case Kind::Neg: s[i] = -s[nd.a]; break;
                case Kind::Sin: s[i] = std::sin(s[nd.a]); break;
                case Kind::Cos: s[i] = std::cos(s[nd.a]); break;
                case Kind::Exp: s[i] = std::exp(s[nd.a]); break;
                case Kind::Abs: s[i] = std::abs(s[nd.a]); break;
            }
        }
        return scratch_[static_cast<std::size_t>(root_)];
    }

private:
    enum class Kind { Num, Var, Add, Sub, Mul, Div, Pow, Neg, Sin, Cos, Exp, Abs };
    struct Node {
        Kind kind;
        double num = 0.0;
        int a = -1, b = -1;
    };

    int push(Node nd) {
        nodes_.push_back(nd);
        return static_cast<int>(nodes_.size()) - 1;
    }

    std::vector<Node> nodes_;
    int root_ = -1;
    mutable std::vector<double> scratch_;

    friend class ExprParser;
};

class ExprParser {
public:
    explicit ExprParser(std::string_view src) : src_(src) {}

    Expression run() {
        Expression e;
        out_ = &e;
        pos_ = 0;
        e.root_ = parse_expr();
        skip_ws();
        if (pos_ != src_.size()) fail("end of input or operator");
        out_ = nullptr;
        return e;
    }

private:
    using Kind = Expression::Kind;

    [[noreturn]] void fail(const std::string& expected) const {
        throw ParseError("parse error at position " + std::to_string(pos_) + ": expected " + expected,
                         pos_, expected);
    }

    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!accept(c)) fail(std::string("'") + c + "'");
    }

    int parse_expr() {
        int lhs = parse_term();
        for (;;) {
            if (accept('+')) {
                int rhs = parse_term();
                lhs = out_->push({Kind::Add, 0.0, lhs, rhs});
            } else if (accept('-')) {
                int rhs = parse_term();
                lhs = out_->push({Kind::Sub, 0.0, lhs, rhs});
            } else {
                return lhs;
            }
        }
    }

    int parse_term() {
        int lhs = parse_factor();
        for (;;) {
            if (accept('*')) {
                int rhs = parse_factor();
                lhs = out_->push({Kind::Mul, 0.0, lhs, rhs});
            } else if (accept('/')) {
                int rhs = parse_factor();
                lhs = out_->push({Kind::Div, 0.0, lhs, rhs});
            } else {
                return lhs;
            }
        }
    }

    // '^' is right-associative.
    int parse_factor() {
        int base = parse_base();
        if (accept('^')) {
            int exp = parse_factor();
            return out_->push({Kind::Pow, 0.0, base, exp});
        }
        return base;
    }

    int parse_base() {
        skip_ws();
        if (pos_ >= src_.size()) fail("number, 'x', 'pi', function call or '('");
        char c = src_[pos_];

        if (c == '-') {
            ++pos_;
            int inner = parse_base();
            return out_->push({Kind::Neg, 0.0, inner, -1});
        }
        if (c == '(') {
            ++pos_;
            int inner = parse_expr();
            expect(')');
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c))) return parse_ident();
        fail("number, 'x', 'pi', function call or '('");
    }

    int parse_number() {
        std::size_t start = pos_;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        if (pos_ < src_.size() && src_[pos_] == '.') {
            ++pos_;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        }
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            std::size_t mark = pos_;
            ++pos_;
            if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
            if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
                while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
            } else {
                pos_ = mark;  // 'e' was not an exponent
            }
        }
        double value = 0.0;
        auto res = std::from_chars(src_.data() + start, src_.data() + pos_, value);
        if (res.ec != std::errc() || res.ptr != src_.data() + pos_) {
            pos_ = start;
            fail("number");
        }
        return out_->push({Kind::Num, value, -1, -1});
    }

    int parse_ident() {
        std::size_t start = pos_;
        while (pos_ < src_.size() && std::isalpha(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        std::string_view name = src_.substr(start, pos_ - start);

        if (name == "x") return out_->push({Kind::Var, 0.0, -1, -1});
        if (name == "pi") return out_->push({Kind::Num, std::numbers::pi, -1, -1});

        Kind fn;
        if (name == "sin") fn = Kind::Sin;
        else if (name == "cos") fn = Kind::Cos;
        else if (name == "exp") fn = Kind::Exp;
        else if (name == "abs") fn = Kind::Abs;
        else {
            pos_ = start;
            fail("'x', 'pi', or one of sin/cos/exp/abs");
        }
        expect('(');
        int arg = parse_expr();
        expect(')');
        return out_->push({fn, 0.0, arg, -1});
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    Expression* out_ = nullptr;
};

inline Expression Expression::parse(std::string_view src) { return ExprParser(src).run(); }

/// Evaluate an initial-condition expression at the grid points.
inline PeriodicField parse_initial(std::string_view expr, const PeriodicGrid& grid) {
    Expression e = Expression::parse(expr);
    PeriodicField out(grid);
    for (int j = 0; j < grid.n; ++j) {
        double y = e.eval(grid.point(j));
        if (!std::isfinite(y))
            throw EvalError("expression evaluated to a non-finite value at x = " +
                            std::to_string(grid.point(j)));
        out[j] = y;
    }
    return out;
}

} // namespace muflow
