// Copyright 2026 The dbmerge Authors
// SPDX-License-Identifier: Apache-2.0
#include "dbmerge/expression.hpp"

#include <cctype>
#include <stdexcept>
#include <variant>

namespace dbmerge {

struct Expression::Node {
    enum class Kind { Literal, Column, Negate, Add, Sub, Mul, Div };
    Kind kind;
    Decimal literal;
    std::string column;
    std::shared_ptr<const Node> lhs;
    std::shared_ptr<const Node> rhs;
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Kind = Expression::Node::Kind;

class Parser {
public:
    Parser(std::string_view text, std::set<std::string>& columns) : text_(text), columns_(columns) {}

    NodePtr parse() {
        NodePtr n = expr();
        skip_ws();
        if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
        return n;
    }

private:
    [[noreturn]] void fail(const std::string& what) const {
        throw Error(ErrorCode::RuleParameterError,
                    "expression '" + std::string(text_) + "' at " + std::to_string(pos_) + ": " + what);
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

    static NodePtr binary(Kind k, NodePtr l, NodePtr r) {
        return std::make_shared<Expression::Node>(Expression::Node{k, {}, {}, std::move(l), std::move(r)});
    }

    NodePtr expr() {
        NodePtr n = term();
        for (;;) {
            if (accept('+')) n = binary(Kind::Add, n, term());
            else if (accept('-')) n = binary(Kind::Sub, n, term());
            else return n;
        }
    }

    NodePtr term() {
        NodePtr n = unary();
        for (;;) {
            if (accept('*')) n = binary(Kind::Mul, n, unary());
            else if (accept('/')) n = binary(Kind::Div, n, unary());
            else return n;
        }
    }

    NodePtr unary() {
        if (accept('-')) return binary(Kind::Negate, unary(), nullptr);
        if (accept('+')) return unary();
        return primary();
    }

    NodePtr primary() {
        skip_ws();
        if (pos_ >= text_.size()) fail("unexpected end of expression");
        if (accept('(')) {
            NodePtr n = expr();
            if (!accept(')')) fail("expected ')'");
            return n;
        }
        char c = text_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            std::size_t start = pos_;
            while (pos_ < text_.size() &&
                   (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.'))
                ++pos_;
            auto d = Decimal::parse(text_.substr(start, pos_ - start));
            if (!d) fail("bad number");
            return std::make_shared<Expression::Node>(Expression::Node{Kind::Literal, *d, {}, nullptr, nullptr});
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t start = pos_;
            while (pos_ < text_.size() &&
                   (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
                ++pos_;
            std::string name(text_.substr(start, pos_ - start));
            columns_.insert(name);
            return std::make_shared<Expression::Node>(Expression::Node{Kind::Column, {}, name, nullptr, nullptr});
        }
        fail("unexpected '" + std::string(1, c) + "'");
    }

    std::string_view text_;
    std::set<std::string>& columns_;
    std::size_t pos_ = 0;
};

struct Null {};
struct Fault {
    RowFault fault;
};
using Eval = std::variant<Decimal, Null, Fault>;

int division_scale(const Decimal& a, const Decimal& b) {
    return std::min(Decimal::kMaxScale, std::max(a.scale(), b.scale()) + 6);
}

Eval eval(const Expression::Node& n, const Row& row) {
    switch (n.kind) {
    case Kind::Literal: return n.literal;
    case Kind::Column: {
        const Value& v = row.get(n.column);
        if (is_null(v)) return Null{};
        if (auto* i = std::get_if<std::int64_t>(&v)) return Decimal::from_integer(*i);
        if (auto* d = std::get_if<Decimal>(&v)) return *d;
        return Fault{{"TransformError", n.column + " is not numeric"}};
    }
    default: break;
    }
    Eval l = eval(*n.lhs, row);
    if (!std::holds_alternative<Decimal>(l)) return l;
    const Decimal& a = std::get<Decimal>(l);
    if (n.kind == Kind::Negate) return -a;
    Eval r = eval(*n.rhs, row);
    if (!std::holds_alternative<Decimal>(r)) return r;
    const Decimal& b = std::get<Decimal>(r);
    try {
        switch (n.kind) {
        case Kind::Add: return a + b;
        case Kind::Sub: return a - b;
        case Kind::Mul: return a * b;
        case Kind::Div:
            if (b.is_zero()) return Fault{{"TransformError", "division by zero"}};
            return Decimal::divide(a, b, division_scale(a, b));
        default: break;
        }
    } catch (const std::overflow_error&) {
        return Fault{{"TransformError", "arithmetic overflow"}};
    }
    return Fault{{"TransformError", "bad expression node"}};
}

} // namespace

Expression Expression::parse(std::string_view text) {
    Expression e;
    e.text_ = std::string(text);
    Parser p(e.text_, e.columns_);
    e.root_ = p.parse();
    return e;
}

Expression::Result Expression::evaluate(const Row& row) const {
    Eval r = eval(*root_, row);
    if (auto* d = std::get_if<Decimal>(&r)) return Result{*d, std::nullopt};
    if (auto* f = std::get_if<Fault>(&r)) return Result{std::nullopt, f->fault};
    return Result{};
}

} // namespace dbmerge
